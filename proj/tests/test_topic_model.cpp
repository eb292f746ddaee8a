#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "embedforge/core/error.hpp"
#include "embedforge/topics/topic_model.hpp"
#include "test_support.hpp"

using namespace embedforge;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

LabeledQuery lq(const std::string& t1) { return {"q", {{t1, 0.9}}}; }
LabeledQuery lq(const std::string& t1, const std::string& t2) {
    return {"q", {{t1, 0.9}, {t2, 0.5}}};
}

// The counting fixture from the sampler statistics checks:
// [(A,B),(A,C),(A,B),(D)].
std::vector<LabeledQuery> counting_fixture() {
    return {lq("A", "B"), lq("A", "C"), lq("A", "B"), lq("D")};
}

}  // namespace

TEST_CASE("fit matches the hand-counted oracle") {
    const auto dist = fit_topic_distribution(counting_fixture());
    CHECK(dist.p_t1.at("A") == doctest::Approx(0.75));
    CHECK(dist.p_t1.at("D") == doctest::Approx(0.25));
    CHECK(dist.p_t2_given_t1.at("A").at("B") == doctest::Approx(2.0 / 3.0));
    CHECK(dist.p_t2_given_t1.at("A").at("C") == doctest::Approx(1.0 / 3.0));
    CHECK(dist.singleton_mass.at("D") == doctest::Approx(1.0));
    CHECK(dist.singleton_mass.at("A") == doctest::Approx(0.0));
}

TEST_CASE("single sample gives a degenerate distribution") {
    const auto dist = fit_topic_distribution({lq("A", "B")});
    CHECK(dist.p_t1.at("A") == doctest::Approx(1.0));
    CHECK(dist.p_t2_given_t1.at("A").at("B") == doctest::Approx(1.0));

    RngStream rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto pair = sample_topic_pair(dist, rng);
        CHECK(pair.t1 == "A");
        REQUIRE(pair.t2.has_value());
        CHECK(*pair.t2 == "B");
    }
}

TEST_CASE("empty input is rejected") {
    CHECK_THROWS_AS((void)fit_topic_distribution({}), Error);
}

TEST_CASE("fitting is permutation invariant") {
    auto samples = counting_fixture();
    const auto reference = fit_topic_distribution(samples);
    std::reverse(samples.begin(), samples.end());
    const auto flipped = fit_topic_distribution(samples);
    CHECK(reference.p_t1 == flipped.p_t1);
    CHECK(reference.p_t2_given_t1 == flipped.p_t2_given_t1);
    CHECK(reference.singleton_mass == flipped.singleton_mass);
}

TEST_CASE("sampled marginals converge to the fitted distribution") {
    const auto dist = fit_topic_distribution(counting_fixture());
    RngStream rng(17);
    std::map<std::string, int> counts;
    std::map<std::string, int> t2_counts;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto pair = sample_topic_pair(dist, rng);
        counts[pair.t1]++;
        if (pair.t1 == "A") {
            REQUIRE(pair.t2.has_value());  // singleton mass of A is zero
            t2_counts[*pair.t2]++;
        } else {
            CHECK(!pair.t2.has_value());  // D is always a singleton
        }
    }
    // 3-sigma binomial bounds around p=0.75 for n=10000 (~ +/- 0.013).
    const double freq_a = counts["A"] / static_cast<double>(n);
    CHECK(freq_a > 0.75 - 3.0 * std::sqrt(0.75 * 0.25 / n));
    CHECK(freq_a < 0.75 + 3.0 * std::sqrt(0.75 * 0.25 / n));
    CHECK(freq_a > 0.73);
    CHECK(freq_a < 0.77);
    const double freq_b = t2_counts["B"] / static_cast<double>(counts["A"]);
    CHECK(freq_b == doctest::Approx(2.0 / 3.0).epsilon(0.05));
}

TEST_CASE("same seed reproduces the pair sequence exactly") {
    const auto dist = fit_topic_distribution(counting_fixture());
    RngStream a(123);
    RngStream b(123);
    for (int i = 0; i < 200; ++i) {
        const auto pa = sample_topic_pair(dist, a);
        const auto pb = sample_topic_pair(dist, b);
        CHECK(pa.t1 == pb.t1);
        CHECK(pa.t2 == pb.t2);
    }
}

TEST_CASE("large-taxonomy empirical marginal stays close in L1") {
    // Query-log-like first-label marginal: sharply decaying mass, with a
    // long tail of taxonomy topics that only ever occur as second labels.
    // (A flat marginal over hundreds of topics cannot meet 0.01 at 100k
    // draws; the binomial deviations alone sum to several times that.)
    std::vector<LabeledQuery> samples;
    int topic_id = 0;
    for (double mass = 3000.0; mass >= 1.0; mass *= 0.7, ++topic_id) {
        const std::string t1 = "t" + std::to_string(topic_id);
        for (int c = 0; c < static_cast<int>(mass); ++c) {
            samples.push_back(lq(t1, "tail" + std::to_string((topic_id * 37 + c) % 1000)));
        }
    }
    const auto dist = fit_topic_distribution(samples);
    CHECK(dist.taxonomy.size() > 500);  // tail topics inflate the taxonomy

    RngStream rng(29);
    std::map<std::string, int> counts;
    const int n = 100000;
    for (int i = 0; i < n; ++i) counts[sample_topic_pair(dist, rng).t1]++;
    double l1 = 0.0;
    for (const auto& [topic, p] : dist.p_t1) {
        l1 += std::abs(p - counts[topic] / static_cast<double>(n));
    }
    CHECK(l1 < 0.01);
}

TEST_CASE("labeled query ingestion sorts by descending score with lexicographic ties") {
    TempDir tmp("topics");
    write_file(tmp.path("q.jsonl"),
               R"({"query":"x","labels":[["zeta",0.5],["alpha",0.5],["top",0.9]]})" "\n");
    const auto samples = load_labeled_queries(tmp.path("q.jsonl"));
    REQUIRE(samples.size() == 1);
    REQUIRE(samples[0].labels.size() == 3);
    CHECK(samples[0].labels[0].first == "top");
    CHECK(samples[0].labels[1].first == "alpha");  // tie broken lexicographically
    CHECK(samples[0].labels[2].first == "zeta");
}

TEST_CASE("distribution serializes through JSON unchanged") {
    TempDir tmp("dist");
    const auto dist = fit_topic_distribution(counting_fixture());
    save_topic_distribution(tmp.path("d.json"), dist);
    const auto back = load_topic_distribution(tmp.path("d.json"));
    CHECK(back.p_t1 == dist.p_t1);
    CHECK(back.p_t2_given_t1 == dist.p_t2_given_t1);
    CHECK(back.singleton_mass == dist.singleton_mass);
}

TEST_CASE("invalid probability tables are rejected") {
    TopicDistribution bad;
    bad.taxonomy = {"A"};
    bad.p_t1["A"] = 0.5;  // does not sum to 1
    bad.singleton_mass["A"] = 1.0;
    CHECK_THROWS_AS(validate_distribution(bad), Error);
}
