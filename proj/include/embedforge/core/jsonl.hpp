#pragma once

#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "embedforge/core/error.hpp"

namespace embedforge {

using json = nlohmann::json;

// Calls fn(line_number, raw_line) for every nonempty line. Throws
// Error(FileMissing) if the file cannot be opened.
inline void for_each_line(const std::string& path,
                          const std::function<void(std::size_t, const std::string&)>& fn) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileMissing, path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fn(lineno, line);
    }
}

}  // namespace embedforge
