#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "embedforge/core/error.hpp"
#include "embedforge/prompts/prompt_factory.hpp"

using namespace embedforge;

namespace {

const Category kAll[5] = {Category::short_long, Category::long_short, Category::short_short,
                          Category::long_long, Category::sts};

PromptParams base_short_long() {
    PromptParams p;
    p.category = Category::short_long;
    p.task = "Given a question, retrieve documents that can help to answer the question.";
    p.query_type = "Common";
    p.query_length = "Less than 7 words";
    p.clarity = "Clear";
    p.num_words = 50;
    p.difficulty = "Layman";
    p.topics = {"Science", std::optional<std::string>{"Chemistry"}};
    return p;
}

}  // namespace

TEST_CASE("sampled params carry exactly the fields their template uses") {
    const auto& lib = PromptLibrary::builtin();
    RngStream rng(1);

    const auto sts = lib.sample_params(Category::sts, {"A", std::nullopt}, rng);
    CHECK(sts.unit.has_value());
    CHECK(sts.high_score.has_value());
    CHECK(sts.low_score.has_value());
    CHECK(sts.difficulty.has_value());
    CHECK(!sts.query_type.has_value());
    CHECK(!sts.num_words.has_value());
    CHECK(!sts.task.has_value());

    const auto sl = lib.sample_params(Category::short_long, {"A", std::nullopt}, rng);
    CHECK(sl.task.has_value());
    CHECK(sl.query_type.has_value());
    CHECK(sl.query_length.has_value());
    CHECK(sl.clarity.has_value());
    CHECK(sl.num_words.has_value());
    CHECK(sl.difficulty.has_value());
    CHECK(!sl.unit.has_value());

    const auto ss = lib.sample_params(Category::short_short, {"A", std::nullopt}, rng);
    CHECK(ss.task.has_value());
    CHECK(!ss.query_type.has_value());
    CHECK(!ss.clarity.has_value());
    CHECK(!ss.difficulty.has_value());
}

TEST_CASE("campaign flag rates match p=0.3 and p=0.5 over 10k draws") {
    const auto& lib = PromptLibrary::builtin();
    int local = 0;
    int overlap = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        RngStream rng(derive_seed(77, static_cast<std::uint64_t>(i)));
        const auto p = lib.sample_params(Category::short_long, {"A", std::nullopt}, rng);
        local += p.local_flag ? 1 : 0;
        overlap += p.lexical_overlap_flag ? 1 : 0;
    }
    CHECK(local / static_cast<double>(n) == doctest::Approx(0.3).epsilon(0.1));
    CHECK(local / static_cast<double>(n) > 0.27);
    CHECK(local / static_cast<double>(n) < 0.33);
    CHECK(overlap / static_cast<double>(n) > 0.47);
    CHECK(overlap / static_cast<double>(n) < 0.53);
}

TEST_CASE("short-long render includes the fixed scaffolding") {
    const auto& lib = PromptLibrary::builtin();
    auto params = base_short_long();
    params.lexical_overlap_flag = false;
    const std::string text = lib.render(params);
    CHECK(text.find("a random user search query") != std::string::npos);
    CHECK(text.find("Minimum lexical overlap") == std::string::npos);
    CHECK(text.find("\"Science\" and \"Chemistry\"") != std::string::npos);
    CHECK(text.find("at least 50 words long") != std::string::npos);

    params.lexical_overlap_flag = true;
    CHECK(lib.render(params).find("Minimum lexical overlap") != std::string::npos);
}

TEST_CASE("local flag appends the Flemish/Dutch-context instruction") {
    const auto& lib = PromptLibrary::builtin();
    PromptParams params;
    params.category = Category::long_short;
    params.task = "Identifying the polarity of a user opinion, review or post";
    params.query_length = "at least 50";
    params.clarity = "Clear";
    params.difficulty = "Layman";
    params.topics = {"Sport", std::nullopt};

    params.local_flag = false;
    const std::string without = lib.render(params);
    CHECK(without.find("Flemish or Dutch context") == std::string::npos);

    params.local_flag = true;
    const std::string with = lib.render(params);
    const auto pos = with.find("Flemish or Dutch context");
    REQUIRE(pos != std::string::npos);
    // The local clause is the last guideline before the closing instruction.
    CHECK(with.find("Your output must always be", pos) != std::string::npos);
}

TEST_CASE("sts substitutes both similarity scores") {
    const auto& lib = PromptLibrary::builtin();
    PromptParams params;
    params.category = Category::sts;
    params.unit = "sentence";
    params.high_score = 4.5;
    params.low_score = 3.0;
    params.difficulty = "Layman";
    params.topics = {"Muziek", std::nullopt};
    const std::string text = lib.render(params);
    CHECK(text.find("should be 4.5") != std::string::npos);
    CHECK(text.find("should be 3") != std::string::npos);
    CHECK(text.find("sentence triple") != std::string::npos);
    CHECK(text.find("query_type") == std::string::npos);
}

TEST_CASE("single-topic pairs name only T1") {
    const auto& lib = PromptLibrary::builtin();
    auto params = base_short_long();
    params.topics = {"Geschiedenis", std::nullopt};
    const std::string text = lib.render(params);
    CHECK(text.find("about \"Geschiedenis\".") != std::string::npos);
    CHECK(text.find(" and \"") == std::string::npos);
}

TEST_CASE("rendering is pure and leaves no placeholder braces") {
    const auto& lib = PromptLibrary::builtin();
    for (Category c : kAll) {
        for (int i = 0; i < 200; ++i) {
            RngStream rng(derive_seed(13, static_cast<std::uint64_t>(i * 5 + static_cast<int>(c))));
            const auto params =
                lib.sample_params(c, {"Topic A", std::optional<std::string>{"Topic B"}}, rng);
            const std::string once = lib.render(params);
            CHECK(once.find('{') == std::string::npos);
            CHECK(once.find('}') == std::string::npos);
            CHECK(once == lib.render(params));  // byte-identical on re-render
        }
    }
}

TEST_CASE("missing parameter is a programming error") {
    const auto& lib = PromptLibrary::builtin();
    PromptParams params;
    params.category = Category::sts;  // no unit/scores/difficulty set
    params.topics = {"A", std::nullopt};
    CHECK_THROWS_AS((void)lib.render(params), Error);
}

TEST_CASE("hardness scoring matches the hand-applied table") {
    // Layman, Clear, no flags, 50 words, Common -> 0 -> nano.
    auto params = base_short_long();
    auto tier = hardness_tier(params);
    CHECK(tier.score == 0);
    CHECK(tier.tier == Tier::nano);

    // Master, Ambiguous, overlap flag, 500 words, Extremely long-tail
    // -> 3+2+2+2+2 = 11 -> full.
    params.difficulty = "Master's degree or higher";
    params.clarity = "Ambiguous";
    params.lexical_overlap_flag = true;
    params.num_words = 500;
    params.query_type = "Extremely long-tail";
    tier = hardness_tier(params);
    CHECK(tier.score == 11);
    CHECK(tier.tier == Tier::full);

    // Bachelor, some effort, no flags, 300 words, Common -> 2+1+0+1 = 4 -> mini.
    params = base_short_long();
    params.difficulty = "Bachelor's degree";
    params.clarity = "Understandable with some effort";
    params.num_words = 300;
    tier = hardness_tier(params);
    CHECK(tier.score == 4);
    CHECK(tier.tier == Tier::mini);
}

TEST_CASE("query length of at least 12 words contributes one point") {
    auto params = base_short_long();
    params.query_length = "At least 12 words";
    CHECK(hardness_tier(params).score == 1);
}

TEST_CASE("tier is monotone in every contributing field") {
    const std::vector<std::string> difficulties = {"Layman", "High school", "Bachelor's degree",
                                                   "Master's degree or higher"};
    const std::vector<std::string> clarities = {"Clear", "Understandable with some effort",
                                                "Ambiguous"};
    const std::vector<std::string> query_types = {"Common", "Long-tail", "Extremely long-tail"};
    const std::vector<int> words = {50, 100, 200, 300, 400, 500};

    RngStream rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        auto params = base_short_long();
        params.difficulty = difficulties[rng.below(difficulties.size())];
        params.clarity = clarities[rng.below(clarities.size())];
        params.query_type = query_types[rng.below(query_types.size())];
        params.num_words = words[rng.below(words.size())];
        params.lexical_overlap_flag = rng.bernoulli(0.5);
        const int before = hardness_tier(params).score;
        const Tier tier_before = hardness_tier(params).tier;

        auto bumped = params;
        switch (rng.below(5)) {
            case 0: {
                auto it = std::find(difficulties.begin(), difficulties.end(), *params.difficulty);
                if (it + 1 != difficulties.end()) bumped.difficulty = *(it + 1);
                break;
            }
            case 1: {
                auto it = std::find(clarities.begin(), clarities.end(), *params.clarity);
                if (it + 1 != clarities.end()) bumped.clarity = *(it + 1);
                break;
            }
            case 2: {
                auto it = std::find(query_types.begin(), query_types.end(), *params.query_type);
                if (it + 1 != query_types.end()) bumped.query_type = *(it + 1);
                break;
            }
            case 3: {
                auto it = std::find(words.begin(), words.end(), *params.num_words);
                if (it + 1 != words.end()) bumped.num_words = *(it + 1);
                break;
            }
            case 4: bumped.lexical_overlap_flag = true; break;
        }
        CHECK(hardness_tier(bumped).score >= before);
        CHECK(static_cast<int>(hardness_tier(bumped).tier) >= static_cast<int>(tier_before));
    }
}

TEST_CASE("params survive a JSON round-trip") {
    const auto& lib = PromptLibrary::builtin();
    RngStream rng(3);
    for (Category c : kAll) {
        const auto params = lib.sample_params(c, {"T1", std::optional<std::string>{"T2"}}, rng);
        const auto back = params_from_json(params_to_json(params));
        CHECK(lib.render(back) == lib.render(params));
        CHECK(hardness_tier(back).score == hardness_tier(params).score);
    }
}
