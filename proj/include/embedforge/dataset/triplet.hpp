#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace embedforge {

enum class Category { short_long, long_short, short_short, long_long, sts };

enum class TripletSource { synthetic, mmarco, fever, hotpotqa, other };

const char* category_name(Category c);
Category category_from_name(const std::string& name);
const char* source_name(TripletSource s);
TripletSource source_from_name(const std::string& name);

// One contrastive example. For sts the three texts are the S1/S2/S3 units:
// query=S1, positive=S2 (target similarity sts_high), negative=S3 (target
// similarity sts_low).
struct Triplet {
    std::string id;
    Category category = Category::short_long;
    std::string query;
    std::string positive;
    std::string negative;
    std::optional<double> sts_high;
    std::optional<double> sts_low;
    TripletSource source = TripletSource::synthetic;
    std::map<std::string, std::string> meta;
};

// Checks the type invariants; returns a reason on violation.
std::optional<std::string> triplet_invariant_violation(const Triplet& t);

struct TripletRejection {
    std::size_t line = 0;
    std::string reason;
};

struct TripletSet {
    std::vector<Triplet> items;
    std::vector<TripletRejection> rejections;

    std::size_t size() const { return items.size(); }
};

// JSONL key sets are fixed per category:
//   short-long    {"user-query","positive-document","hard-negative-document"}
//   short-short / long-long
//                 {"input","positive-document","hard-negative-document"}
//   long-short    {"input-text","label","misleading-label"}
//   sts           {"S1","S2","S3"}
// Optional keys on any line: "id", "source", "meta" (string map), and for
// sts "similarity-high"/"similarity-low". Invalid lines are skipped and
// counted, not fatal.
TripletSet load_triplets(const std::string& path, Category category);

void save_triplets(const std::string& path, const std::vector<Triplet>& triplets);

// Parses one JSONL line; used by the loader and by the generation client to
// validate model responses. Throws Error(SchemaViolation) with the reason.
Triplet parse_triplet_line(const std::string& line, Category category);

const std::vector<std::string>& required_keys(Category category);

}  // namespace embedforge
