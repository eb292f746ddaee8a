#include "embedforge/dataset/labeled.hpp"

#include <fstream>
#include <set>

#include "embedforge/core/error.hpp"
#include "embedforge/core/jsonl.hpp"
#include "embedforge/core/text.hpp"

namespace embedforge {

std::vector<LabeledExample> load_labeled_examples(const std::string& path) {
    std::vector<LabeledExample> examples;
    for_each_line(path, [&](std::size_t lineno, const std::string& line) {
        const std::string where = path + " line " + std::to_string(lineno);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error&) {
            throw Error(ErrorKind::SchemaViolation, where + ": invalid JSON");
        }
        if (!obj.contains("id") || !obj["id"].is_string() || !obj.contains("text") ||
            !obj["text"].is_string() || !obj.contains("labels") || !obj["labels"].is_array()) {
            throw Error(ErrorKind::SchemaViolation, where + ": expected {id, text, labels}");
        }
        LabeledExample ex;
        ex.id = obj["id"].get<std::string>();
        ex.text = nfc_normalize(obj["text"].get<std::string>());
        std::set<std::string> seen;
        for (const auto& l : obj["labels"]) {
            if (!l.is_string()) throw Error(ErrorKind::SchemaViolation, where + ": non-string label");
            std::string label = nfc_normalize(l.get<std::string>());
            if (!seen.insert(label).second) {
                throw Error(ErrorKind::SchemaViolation, where + ": duplicate label " + label);
            }
            ex.labels.push_back(std::move(label));
        }
        if (ex.labels.empty()) throw Error(ErrorKind::SchemaViolation, where + ": empty labels");
        examples.push_back(std::move(ex));
    });
    return examples;
}

void save_labeled_examples(const std::string& path, const std::vector<LabeledExample>& examples) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::FileMissing, "cannot open for write: " + path);
    for (const auto& ex : examples) {
        out << json{{"id", ex.id}, {"text", ex.text}, {"labels", ex.labels}}.dump() << "\n";
    }
}

}  // namespace embedforge
