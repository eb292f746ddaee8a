#pragma once

#include <string>
#include <vector>

namespace embedforge {

struct LabeledExample {
    std::string id;
    std::string text;
    std::vector<std::string> labels;  // nonempty, no duplicates
};

// JSONL: {"id": str, "text": str, "labels": [str, ...]}. Strict: any
// malformed line is fatal (these are curated evaluation inputs, not LLM
// output).
std::vector<LabeledExample> load_labeled_examples(const std::string& path);

void save_labeled_examples(const std::string& path, const std::vector<LabeledExample>& examples);

}  // namespace embedforge
