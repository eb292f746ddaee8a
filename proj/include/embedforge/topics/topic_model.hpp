#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "embedforge/core/rng.hpp"

namespace embedforge {

// Query with classifier labels, ordered by descending score (ties broken
// lexicographically at ingest).
struct LabeledQuery {
    std::string query;
    std::vector<std::pair<std::string, double>> labels;
};

// Fitted P(T1) and P(T2|T1) tables. singleton_mass[T1] is the probability
// that a T1 draw has no second topic. Immutable after fit.
struct TopicDistribution {
    std::vector<std::string> taxonomy;
    std::map<std::string, double> p_t1;
    std::map<std::string, std::map<std::string, double>> p_t2_given_t1;
    std::map<std::string, double> singleton_mass;
};

struct TopicPair {
    std::string t1;
    std::optional<std::string> t2;
};

// Empirical fit over the top-2 labels of each sample. Samples with a single
// label contribute to singleton_mass of that label.
TopicDistribution fit_topic_distribution(const std::vector<LabeledQuery>& samples);

// T1 ~ p_t1; with probability singleton_mass(T1) no T2, otherwise
// T2 ~ p_t2_given_t1[T1]. Two rng draws per call, always.
TopicPair sample_topic_pair(const TopicDistribution& dist, RngStream& rng);

// Checks the probability-sum invariants to 1e-9.
void validate_distribution(const TopicDistribution& dist);

// JSONL: {"query": str, "labels": [[topic, score], ...]}
std::vector<LabeledQuery> load_labeled_queries(const std::string& path);

void save_topic_distribution(const std::string& path, const TopicDistribution& dist);
TopicDistribution load_topic_distribution(const std::string& path);

}  // namespace embedforge
