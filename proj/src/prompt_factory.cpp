#include "embedforge/prompts/prompt_factory.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "embedforge/core/error.hpp"

#ifndef EMBEDFORGE_RESOURCE_DIR
#define EMBEDFORGE_RESOURCE_DIR "resources"
#endif

namespace embedforge {

const char* tier_name(Tier t) {
    switch (t) {
        case Tier::nano: return "nano";
        case Tier::mini: return "mini";
        case Tier::full: return "full";
    }
    return "nano";
}

Tier tier_from_name(const std::string& name) {
    if (name == "nano") return Tier::nano;
    if (name == "mini") return Tier::mini;
    if (name == "full") return Tier::full;
    throw Error(ErrorKind::ConfigError, "unknown tier '" + name + "'");
}

HardnessTier hardness_tier(const PromptParams& params) {
    int score = 0;
    if (params.difficulty) {
        const std::string& d = *params.difficulty;
        if (d == "High school") score += 1;
        else if (d == "Bachelor's degree") score += 2;
        else if (d == "Master's degree or higher") score += 3;
    }
    if (params.clarity) {
        const std::string& c = *params.clarity;
        if (c == "Understandable with some effort") score += 1;
        else if (c == "Ambiguous") score += 2;
    }
    if (params.lexical_overlap_flag) score += 2;
    if (params.num_words) {
        if (*params.num_words >= 500) score += 2;
        else if (*params.num_words >= 300) score += 1;
    }
    if (params.query_length && *params.query_length == "At least 12 words") score += 1;
    if (params.query_type) {
        if (*params.query_type == "Long-tail") score += 1;
        else if (*params.query_type == "Extremely long-tail") score += 2;
    }
    HardnessTier tier;
    tier.score = score;
    tier.tier = score <= 2 ? Tier::nano : (score <= 5 ? Tier::mini : Tier::full);
    return tier;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileMissing, path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text;
}

template <typename T>
std::vector<T> read_array(const nlohmann::json& obj, const char* key) {
    if (!obj.contains(key)) return {};
    return obj[key].template get<std::vector<T>>();
}

// "4" not "4.0"; "4.5" stays "4.5".
std::string format_score(double v) {
    if (v == std::floor(v)) return std::to_string(static_cast<long long>(v));
    std::ostringstream out;
    out << v;
    return out.str();
}

std::string topics_clause(const TopicPair& topics) {
    std::string out = "\"" + topics.t1 + "\"";
    if (topics.t2) out += " and \"" + *topics.t2 + "\"";
    return out;
}

void substitute(std::string& text, const std::string& placeholder, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
}

bool uses(const std::string& tmpl, const std::string& placeholder) {
    return tmpl.find(placeholder) != std::string::npos;
}

}  // namespace

PromptLibrary::PromptLibrary(const std::string& resource_dir) {
    namespace fs = std::filesystem;
    const Category cats[5] = {Category::short_long, Category::long_short, Category::short_short,
                              Category::long_long, Category::sts};
    for (Category c : cats) {
        templates_[static_cast<int>(c)] =
            read_file((fs::path(resource_dir) / "prompts" / (std::string(category_name(c)) + ".txt"))
                          .string());
    }

    std::ifstream in(fs::path(resource_dir) / "prompt_domains.json");
    if (!in) throw Error(ErrorKind::FileMissing, resource_dir + "/prompt_domains.json");
    nlohmann::json cfg;
    try {
        cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ConfigError, std::string("prompt_domains.json: ") + e.what());
    }
    local_flag_p_ = cfg.value("local_flag_p", 0.3);
    lexical_overlap_p_ = cfg.value("lexical_overlap_p", 0.5);
    local_flag_text_ = cfg.value("local_flag_text", "");
    local_flag_text_sts_ = cfg.value("local_flag_text_sts", local_flag_text_);
    lexical_overlap_text_ = cfg.value("lexical_overlap_text", "");

    for (Category c : cats) {
        const auto& entry = cfg["categories"][category_name(c)];
        Domain& d = domains_[static_cast<int>(c)];
        d.tasks = read_array<std::string>(entry, "tasks");
        d.query_type = read_array<std::string>(entry, "query_type");
        d.query_length = read_array<std::string>(entry, "query_length");
        d.clarity = read_array<std::string>(entry, "clarity");
        d.num_words = read_array<int>(entry, "num_words");
        d.difficulty = read_array<std::string>(entry, "difficulty");
        d.unit = read_array<std::string>(entry, "unit");
        d.high_score = read_array<double>(entry, "high_score");
        d.low_score = read_array<double>(entry, "low_score");
    }
}

std::string PromptLibrary::default_resource_dir() {
    if (const char* env = std::getenv("EMBEDFORGE_RESOURCES"); env && *env) return env;
    return EMBEDFORGE_RESOURCE_DIR;
}

const PromptLibrary& PromptLibrary::builtin() {
    static PromptLibrary library(default_resource_dir());
    return library;
}

const PromptLibrary::Domain& PromptLibrary::domain(Category c) const {
    return domains_[static_cast<int>(c)];
}

const std::string& PromptLibrary::template_text(Category c) const {
    return templates_[static_cast<int>(c)];
}

PromptParams PromptLibrary::sample_params(Category category, const TopicPair& topics,
                                          RngStream& rng) const {
    const Domain& d = domain(category);
    PromptParams p;
    p.category = category;
    p.topics = topics;
    // Draw order is fixed; skipped fields consume no stream state.
    if (!d.tasks.empty()) p.task = rng.pick(d.tasks);
    if (!d.query_type.empty()) p.query_type = rng.pick(d.query_type);
    if (!d.query_length.empty()) p.query_length = rng.pick(d.query_length);
    if (!d.clarity.empty()) p.clarity = rng.pick(d.clarity);
    if (category == Category::short_long) p.lexical_overlap_flag = rng.bernoulli(lexical_overlap_p_);
    if (!d.num_words.empty()) p.num_words = rng.pick(d.num_words);
    if (!d.difficulty.empty()) p.difficulty = rng.pick(d.difficulty);
    if (!d.unit.empty()) p.unit = rng.pick(d.unit);
    if (!d.high_score.empty()) p.high_score = rng.pick(d.high_score);
    if (!d.low_score.empty()) p.low_score = rng.pick(d.low_score);
    p.local_flag = rng.bernoulli(local_flag_p_);
    return p;
}

std::string PromptLibrary::render(const PromptParams& params) const {
    std::string text = template_text(params.category);

    auto require = [&](const char* placeholder, const auto& opt) -> std::string {
        if (!uses(text, placeholder)) return {};
        if (!opt) {
            throw Error(ErrorKind::MissingParameter, std::string(placeholder) + " for category " +
                                                         category_name(params.category));
        }
        return *opt;
    };

    substitute(text, "{task}", require("{task}", params.task));
    substitute(text, "{topics}", topics_clause(params.topics));
    substitute(text, "{query-type}", require("{query-type}", params.query_type));
    substitute(text, "{query-length}", require("{query-length}", params.query_length));
    substitute(text, "{clarity}", require("{clarity}", params.clarity));
    substitute(text, "{difficulty}", require("{difficulty}", params.difficulty));
    substitute(text, "{unit}", require("{unit}", params.unit));
    if (uses(text, "{num-words}")) {
        if (!params.num_words) {
            throw Error(ErrorKind::MissingParameter, "{num-words} for category " +
                                                         std::string(category_name(params.category)));
        }
        substitute(text, "{num-words}", std::to_string(*params.num_words));
    }
    if (uses(text, "{high-score}")) {
        if (!params.high_score || !params.low_score) {
            throw Error(ErrorKind::MissingParameter, "sts similarity scores");
        }
        substitute(text, "{high-score}", format_score(*params.high_score));
        substitute(text, "{low-score}", format_score(*params.low_score));
    }
    substitute(text, "{lexical-overlap}",
               params.lexical_overlap_flag ? lexical_overlap_text_ : "");
    const std::string& local_text =
        params.category == Category::sts ? local_flag_text_sts_ : local_flag_text_;
    substitute(text, "{local-flag}", params.local_flag ? local_text : "");

    // Tidy after empty substitutions: collapse double spaces, fix " .", drop
    // guideline lines that lost their clause.
    std::istringstream lines(text);
    std::ostringstream cleaned;
    std::string line;
    bool first = true;
    while (std::getline(lines, line)) {
        std::size_t pos;
        while ((pos = line.find("  ")) != std::string::npos) line.replace(pos, 2, " ");
        while ((pos = line.find(" .")) != std::string::npos) line.replace(pos, 2, ".");
        while (!line.empty() && line.back() == ' ') line.pop_back();
        if (line == "-") continue;
        if (!first) cleaned << "\n";
        cleaned << line;
        first = false;
    }
    std::string result = cleaned.str();

    if (result.find('{') != std::string::npos) {
        throw Error(ErrorKind::MissingParameter,
                    "unsubstituted placeholder in rendered prompt");
    }
    return result;
}

nlohmann::json params_to_json(const PromptParams& p) {
    nlohmann::json obj;
    obj["category"] = category_name(p.category);
    if (p.task) obj["task"] = *p.task;
    if (p.query_type) obj["query_type"] = *p.query_type;
    if (p.query_length) obj["query_length"] = *p.query_length;
    if (p.clarity) obj["clarity"] = *p.clarity;
    obj["lexical_overlap_flag"] = p.lexical_overlap_flag;
    if (p.num_words) obj["num_words"] = *p.num_words;
    if (p.difficulty) obj["difficulty"] = *p.difficulty;
    obj["local_flag"] = p.local_flag;
    if (p.unit) obj["unit"] = *p.unit;
    if (p.high_score) obj["high_score"] = *p.high_score;
    if (p.low_score) obj["low_score"] = *p.low_score;
    obj["t1"] = p.topics.t1;
    if (p.topics.t2) obj["t2"] = *p.topics.t2;
    return obj;
}

PromptParams params_from_json(const nlohmann::json& obj) {
    PromptParams p;
    p.category = category_from_name(obj.at("category").get<std::string>());
    auto opt_str = [&](const char* key) -> std::optional<std::string> {
        if (obj.contains(key)) return obj[key].get<std::string>();
        return std::nullopt;
    };
    p.task = opt_str("task");
    p.query_type = opt_str("query_type");
    p.query_length = opt_str("query_length");
    p.clarity = opt_str("clarity");
    p.lexical_overlap_flag = obj.value("lexical_overlap_flag", false);
    if (obj.contains("num_words")) p.num_words = obj["num_words"].get<int>();
    p.difficulty = opt_str("difficulty");
    p.local_flag = obj.value("local_flag", false);
    p.unit = opt_str("unit");
    if (obj.contains("high_score")) p.high_score = obj["high_score"].get<double>();
    if (obj.contains("low_score")) p.low_score = obj["low_score"].get<double>();
    p.topics.t1 = obj.value("t1", std::string{});
    if (obj.contains("t2")) p.topics.t2 = obj["t2"].get<std::string>();
    return p;
}

}  // namespace embedforge
