#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "embedforge/core/rng.hpp"
#include "embedforge/dataset/triplet.hpp"
#include "embedforge/topics/topic_model.hpp"

namespace embedforge {

// Sampled template parameters. Optional fields are present exactly when the
// category's template has the matching placeholder.
struct PromptParams {
    Category category = Category::short_long;
    std::optional<std::string> task;
    std::optional<std::string> query_type;
    std::optional<std::string> query_length;
    std::optional<std::string> clarity;
    bool lexical_overlap_flag = false;  // drawn only for short-long
    std::optional<int> num_words;
    std::optional<std::string> difficulty;
    bool local_flag = false;
    std::optional<std::string> unit;
    std::optional<double> high_score;
    std::optional<double> low_score;
    TopicPair topics;
};

enum class Tier { nano, mini, full };

const char* tier_name(Tier t);
Tier tier_from_name(const std::string& name);

struct HardnessTier {
    Tier tier = Tier::nano;
    int score = 0;
};

// Additive difficulty score over the sampled parameters; tier cut points
// are nano <= 2, mini 3..5, full >= 6.
HardnessTier hardness_tier(const PromptParams& params);

// Templates and parameter domains live as text resources so they can be
// audited and edited without a rebuild.
class PromptLibrary {
public:
    explicit PromptLibrary(const std::string& resource_dir);

    // Shared instance backed by the default resource directory
    // (EMBEDFORGE_RESOURCES env var, falling back to the build-time path).
    static const PromptLibrary& builtin();

    static std::string default_resource_dir();

    PromptParams sample_params(Category category, const TopicPair& topics, RngStream& rng) const;

    std::string render(const PromptParams& params) const;

    double local_flag_p() const { return local_flag_p_; }
    double lexical_overlap_p() const { return lexical_overlap_p_; }

private:
    struct Domain {
        std::vector<std::string> tasks;
        std::vector<std::string> query_type;
        std::vector<std::string> query_length;
        std::vector<std::string> clarity;
        std::vector<int> num_words;
        std::vector<std::string> difficulty;
        std::vector<std::string> unit;
        std::vector<double> high_score;
        std::vector<double> low_score;
    };

    const Domain& domain(Category c) const;
    const std::string& template_text(Category c) const;

    std::string templates_[5];
    Domain domains_[5];
    double local_flag_p_ = 0.3;
    double lexical_overlap_p_ = 0.5;
    std::string local_flag_text_;
    std::string local_flag_text_sts_;
    std::string lexical_overlap_text_;
};

// Serialization for prompt records emitted by gen-prompts and the campaign
// journal.
nlohmann::json params_to_json(const PromptParams& params);
PromptParams params_from_json(const nlohmann::json& obj);

}  // namespace embedforge
