#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "embedforge/dataset/triplet.hpp"

namespace embedforge {

struct RerankScore {
    std::string id;
    double s_pos = 0.0;
    double s_neg = 0.0;
};

struct FilterConfig {
    double threshold_c = 0.96;  // keep iff 0 < s_pos - s_neg < C, both strict
};

// Scores documents against a query; implementations must return values in
// [0, 1], one per document.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::vector<double> score(const std::string& query,
                                      const std::vector<std::string>& documents) = 0;
};

// Content-hash score cache so repeated (query, doc) pairs hit the scorer
// once. Optionally file-backed (JSONL of {"key","score"}), appended on miss.
class ScoreCache {
public:
    ScoreCache() = default;
    explicit ScoreCache(const std::string& path);
    ~ScoreCache();

    bool lookup(const std::string& query, const std::string& doc, double& out) const;
    void insert(const std::string& query, const std::string& doc, double score);
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, double> entries_;
    std::string path_;
};

// One RerankScore per non-sts triplet. Throws ScoreOutOfRange if the scorer
// violates its [0,1] contract.
std::vector<RerankScore> score_triplets(const std::vector<Triplet>& triplets, Scorer& scorer,
                                        ScoreCache* cache = nullptr);

struct FilterOutcome {
    std::vector<std::string> kept;
    std::vector<std::pair<std::string, std::string>> rejected;  // id, reason
};

FilterOutcome filter_triplets(const std::vector<RerankScore>& scores, const FilterConfig& cfg);

// HTTP reranker: POST {query, documents: [...]} -> {scores: [...]}.
std::unique_ptr<Scorer> make_http_scorer(const std::string& url, int timeout_seconds = 60);

// scores.jsonl: {"id", "s_pos", "s_neg"} per line.
std::vector<RerankScore> load_rerank_scores(const std::string& path);
void save_rerank_scores(const std::string& path, const std::vector<RerankScore>& scores);

}  // namespace embedforge
