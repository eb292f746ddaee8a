#include "embedforge/dataset/triplet.hpp"

#include <fstream>

#include "embedforge/core/error.hpp"
#include "embedforge/core/jsonl.hpp"
#include "embedforge/core/text.hpp"

namespace embedforge {

const char* category_name(Category c) {
    switch (c) {
        case Category::short_long: return "short-long";
        case Category::long_short: return "long-short";
        case Category::short_short: return "short-short";
        case Category::long_long: return "long-long";
        case Category::sts: return "sts";
    }
    return "short-long";
}

Category category_from_name(const std::string& name) {
    if (name == "short-long") return Category::short_long;
    if (name == "long-short") return Category::long_short;
    if (name == "short-short") return Category::short_short;
    if (name == "long-long") return Category::long_long;
    if (name == "sts" || name == "STS") return Category::sts;
    throw Error(ErrorKind::ConfigError, "unknown category '" + name + "'");
}

const char* source_name(TripletSource s) {
    switch (s) {
        case TripletSource::synthetic: return "synthetic";
        case TripletSource::mmarco: return "mmarco";
        case TripletSource::fever: return "fever";
        case TripletSource::hotpotqa: return "hotpotqa";
        case TripletSource::other: return "other";
    }
    return "other";
}

TripletSource source_from_name(const std::string& name) {
    if (name == "synthetic") return TripletSource::synthetic;
    if (name == "mmarco") return TripletSource::mmarco;
    if (name == "fever") return TripletSource::fever;
    if (name == "hotpotqa") return TripletSource::hotpotqa;
    return TripletSource::other;
}

const std::vector<std::string>& required_keys(Category category) {
    static const std::vector<std::string> retrieval = {
        "user-query", "positive-document", "hard-negative-document"};
    static const std::vector<std::string> matching = {
        "input", "positive-document", "hard-negative-document"};
    static const std::vector<std::string> classification = {
        "input-text", "label", "misleading-label"};
    static const std::vector<std::string> sts = {"S1", "S2", "S3"};
    switch (category) {
        case Category::short_long: return retrieval;
        case Category::short_short:
        case Category::long_long: return matching;
        case Category::long_short: return classification;
        case Category::sts: return sts;
    }
    return retrieval;
}

std::optional<std::string> triplet_invariant_violation(const Triplet& t) {
    if (t.query.empty()) return "empty query";
    if (t.positive.empty()) return "empty positive";
    if (t.category != Category::sts) {
        if (t.negative.empty()) return "empty negative";
    } else {
        if (t.negative.empty()) return "empty S3";
        if (t.sts_high.has_value() != t.sts_low.has_value()) return "sts score pair incomplete";
        if (t.sts_high) {
            if (*t.sts_high < 1.0 || *t.sts_high > 5.0 || *t.sts_low < 1.0 || *t.sts_low > 5.0)
                return "sts score out of [1,5]";
            if (*t.sts_high < *t.sts_low) return "sts high score below low score";
        }
    }
    return std::nullopt;
}

Triplet parse_triplet_line(const std::string& line, Category category) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error&) {
        throw Error(ErrorKind::SchemaViolation, "invalid JSON");
    }
    if (!obj.is_object()) throw Error(ErrorKind::SchemaViolation, "not a JSON object");

    Triplet t;
    t.category = category;
    const auto& keys = required_keys(category);
    std::vector<std::string> values;
    for (const auto& key : keys) {
        if (!obj.contains(key)) throw Error(ErrorKind::SchemaViolation, "missing key " + key);
        if (!obj[key].is_string())
            throw Error(ErrorKind::SchemaViolation, "non-string value for " + key);
        std::string value = nfc_normalize(obj[key].get<std::string>());
        if (trim(value).empty()) throw Error(ErrorKind::SchemaViolation, "empty value for " + key);
        values.push_back(std::move(value));
    }
    t.query = values[0];
    t.positive = values[1];
    t.negative = values[2];

    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& key = it.key();
        if (std::find(keys.begin(), keys.end(), key) != keys.end()) continue;
        if (key == "id" && it->is_string()) {
            t.id = it->get<std::string>();
        } else if (key == "source" && it->is_string()) {
            t.source = source_from_name(it->get<std::string>());
        } else if (key == "similarity-high" && it->is_number()) {
            t.sts_high = it->get<double>();
        } else if (key == "similarity-low" && it->is_number()) {
            t.sts_low = it->get<double>();
        } else if (key == "meta" && it->is_object()) {
            for (auto m = it->begin(); m != it->end(); ++m) {
                if (m->is_string()) t.meta[m.key()] = m->get<std::string>();
            }
        } else if (it->is_string()) {
            t.meta[key] = it->get<std::string>();
        }
        // Non-string unknown keys are dropped.
    }

    if (auto violation = triplet_invariant_violation(t)) {
        throw Error(ErrorKind::SchemaViolation, *violation);
    }
    return t;
}

TripletSet load_triplets(const std::string& path, Category category) {
    TripletSet set;
    for_each_line(path, [&](std::size_t lineno, const std::string& line) {
        try {
            Triplet t = parse_triplet_line(line, category);
            if (t.id.empty()) {
                t.id = std::string(category_name(category)) + "-" + std::to_string(lineno);
            }
            set.items.push_back(std::move(t));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SchemaViolation) throw;
            set.rejections.push_back({lineno, e.what()});
        }
    });
    return set;
}

void save_triplets(const std::string& path, const std::vector<Triplet>& triplets) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::FileMissing, "cannot open for write: " + path);
    for (const auto& t : triplets) {
        const auto& keys = required_keys(t.category);
        json obj;
        obj[keys[0]] = t.query;
        obj[keys[1]] = t.positive;
        obj[keys[2]] = t.negative;
        obj["id"] = t.id;
        obj["source"] = source_name(t.source);
        if (t.sts_high) obj["similarity-high"] = *t.sts_high;
        if (t.sts_low) obj["similarity-low"] = *t.sts_low;
        if (!t.meta.empty()) obj["meta"] = t.meta;
        out << obj.dump() << "\n";
    }
}

}  // namespace embedforge
