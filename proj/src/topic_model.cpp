#include "embedforge/topics/topic_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "embedforge/core/error.hpp"
#include "embedforge/core/jsonl.hpp"
#include "embedforge/core/text.hpp"

namespace embedforge {

TopicDistribution fit_topic_distribution(const std::vector<LabeledQuery>& samples) {
    if (samples.empty()) throw Error(ErrorKind::EmptyInput, "no labeled queries");

    std::map<std::string, std::size_t> t1_counts;
    std::map<std::string, std::map<std::string, std::size_t>> t2_counts;
    std::map<std::string, std::size_t> singleton_counts;
    std::set<std::string> taxonomy;

    for (const auto& sample : samples) {
        if (sample.labels.empty()) {
            throw Error(ErrorKind::EmptyInput, "sample without labels: " + sample.query);
        }
        const std::string& t1 = sample.labels[0].first;
        taxonomy.insert(t1);
        t1_counts[t1] += 1;
        if (sample.labels.size() >= 2) {
            const std::string& t2 = sample.labels[1].first;
            taxonomy.insert(t2);
            t2_counts[t1][t2] += 1;
        } else {
            singleton_counts[t1] += 1;
        }
    }

    TopicDistribution dist;
    dist.taxonomy.assign(taxonomy.begin(), taxonomy.end());
    const double n = static_cast<double>(samples.size());
    for (const auto& [t1, count] : t1_counts) {
        dist.p_t1[t1] = static_cast<double>(count) / n;
        const double n_t1 = static_cast<double>(count);
        dist.singleton_mass[t1] = static_cast<double>(singleton_counts[t1]) / n_t1;
        auto it = t2_counts.find(t1);
        if (it != t2_counts.end()) {
            for (const auto& [t2, c2] : it->second) {
                // Normalized by all T1-first samples so that
                // p_t2_given_t1[t1] plus singleton_mass[t1] sums to 1.
                dist.p_t2_given_t1[t1][t2] = static_cast<double>(c2) / n_t1;
            }
        } else {
            dist.p_t2_given_t1[t1] = {};
        }
    }
    validate_distribution(dist);
    return dist;
}

void validate_distribution(const TopicDistribution& dist) {
    double total = 0.0;
    for (const auto& [t1, p] : dist.p_t1) {
        if (p < 0.0) throw Error(ErrorKind::SchemaViolation, "negative P(T1) for " + t1);
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw Error(ErrorKind::SchemaViolation, "P(T1) sums to " + std::to_string(total));
    }
    for (const auto& [t1, p] : dist.p_t1) {
        (void)p;
        double cond = 0.0;
        auto s = dist.singleton_mass.find(t1);
        if (s != dist.singleton_mass.end()) {
            if (s->second < 0.0) throw Error(ErrorKind::SchemaViolation, "negative singleton mass");
            cond += s->second;
        }
        auto it = dist.p_t2_given_t1.find(t1);
        if (it != dist.p_t2_given_t1.end()) {
            for (const auto& [t2, p2] : it->second) {
                if (p2 < 0.0)
                    throw Error(ErrorKind::SchemaViolation, "negative P(" + t2 + "|" + t1 + ")");
                cond += p2;
            }
        }
        if (std::abs(cond - 1.0) > 1e-9) {
            throw Error(ErrorKind::SchemaViolation,
                        "P(T2|" + t1 + ") + singleton mass sums to " + std::to_string(cond));
        }
    }
}

namespace {

// Deterministic categorical draw over a sorted map: walk entries in key
// order accumulating probability until the uniform variate is covered.
const std::string& draw_categorical(const std::map<std::string, double>& table, double u) {
    double acc = 0.0;
    const std::string* last = nullptr;
    for (const auto& [key, p] : table) {
        acc += p;
        last = &key;
        if (u < acc) return key;
    }
    return *last;  // u landed in the closing rounding gap
}

}  // namespace

TopicPair sample_topic_pair(const TopicDistribution& dist, RngStream& rng) {
    TopicPair pair;
    pair.t1 = draw_categorical(dist.p_t1, rng.real01());
    const double u = rng.real01();
    double singleton = 0.0;
    auto s = dist.singleton_mass.find(pair.t1);
    if (s != dist.singleton_mass.end()) singleton = s->second;
    if (u < singleton) return pair;
    auto it = dist.p_t2_given_t1.find(pair.t1);
    if (it == dist.p_t2_given_t1.end() || it->second.empty()) return pair;
    // u - singleton ranges over [0, conditional mass), so the same variate
    // drives both the singleton decision and the conditional draw.
    pair.t2 = draw_categorical(it->second, u - singleton);
    return pair;
}

std::vector<LabeledQuery> load_labeled_queries(const std::string& path) {
    std::vector<LabeledQuery> samples;
    for_each_line(path, [&](std::size_t lineno, const std::string& line) {
        const std::string where = path + " line " + std::to_string(lineno);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error&) {
            throw Error(ErrorKind::SchemaViolation, where + ": invalid JSON");
        }
        if (!obj.contains("query") || !obj["query"].is_string() || !obj.contains("labels") ||
            !obj["labels"].is_array()) {
            throw Error(ErrorKind::SchemaViolation, where + ": expected {query, labels}");
        }
        LabeledQuery q;
        q.query = nfc_normalize(obj["query"].get<std::string>());
        for (const auto& entry : obj["labels"]) {
            if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
                !entry[1].is_number()) {
                throw Error(ErrorKind::SchemaViolation, where + ": label entries are [topic, score]");
            }
            double score = entry[1].get<double>();
            if (score < 0.0 || score > 1.0) {
                throw Error(ErrorKind::SchemaViolation, where + ": score outside [0,1]");
            }
            q.labels.emplace_back(nfc_normalize(entry[0].get<std::string>()), score);
        }
        // Descending score, ties lexicographic by topic.
        std::stable_sort(q.labels.begin(), q.labels.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        samples.push_back(std::move(q));
    });
    return samples;
}

void save_topic_distribution(const std::string& path, const TopicDistribution& dist) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::FileMissing, "cannot open for write: " + path);
    json obj;
    obj["taxonomy"] = dist.taxonomy;
    obj["p_t1"] = dist.p_t1;
    obj["p_t2_given_t1"] = dist.p_t2_given_t1;
    obj["singleton_mass"] = dist.singleton_mass;
    out << obj.dump(2) << "\n";
}

TopicDistribution load_topic_distribution(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileMissing, path);
    json obj;
    try {
        obj = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::SchemaViolation, path + ": " + e.what());
    }
    TopicDistribution dist;
    dist.taxonomy = obj.value("taxonomy", std::vector<std::string>{});
    dist.p_t1 = obj.value("p_t1", std::map<std::string, double>{});
    for (auto it = obj["p_t2_given_t1"].begin(); it != obj["p_t2_given_t1"].end(); ++it) {
        dist.p_t2_given_t1[it.key()] = it->get<std::map<std::string, double>>();
    }
    dist.singleton_mass = obj.value("singleton_mass", std::map<std::string, double>{});
    validate_distribution(dist);
    return dist;
}

}  // namespace embedforge
