#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace embedforge {

bool is_valid_utf8(std::string_view text);

// Canonical text form used everywhere downstream: UTF-8, NFC-normalized.
// Throws Error(SchemaViolation) on invalid UTF-8.
std::string nfc_normalize(std::string_view text);

// ASCII lowercase; non-ASCII bytes pass through untouched.
std::string ascii_lower(std::string_view text);

// Whitespace tokenization after ASCII lowercasing.
std::vector<std::string> tokenize(std::string_view text);

std::string trim(std::string_view text);

}  // namespace embedforge
