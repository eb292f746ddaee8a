#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "embedforge/core/parallel.hpp"
#include "embedforge/core/rng.hpp"

namespace embedforge {

struct MiningParams {
    int top_n_for_sigma = 1000;
    int candidate_window_k = 100;
    int negatives_per_query = 1;
    std::uint64_t seed = 0;
};

struct MinedNegatives {
    std::string query_id;
    std::string positive_id;
    double sigma = 0.0;
    std::vector<std::string> eligible;  // descending score order
    std::vector<std::string> sampled;
};

// Ranks docs by teacher score, takes sigma as the population standard
// deviation of the top-N scores, and keeps candidates inside the top-K
// window whose score is at most S(d+) - sigma. The open interval
// (S(d+) - sigma, S(d+)) is the ignore margin: a doc scoring exactly at the
// boundary stays eligible. Docs in other_judged (known relevant for this
// query) are excluded as likely false negatives.
MinedNegatives mine_hard_negatives(const std::map<std::string, double>& scores,
                                   const std::string& positive,
                                   const std::set<std::string>& other_judged,
                                   const MiningParams& params, RngStream& rng);

// One score run: query id -> (doc id -> teacher score).
using ScoreRun = std::map<std::string, std::map<std::string, double>>;

// TREC-style run TSV: query-id, doc-id, score.
ScoreRun load_score_run(const std::string& path);

struct MiningOutcome {
    std::vector<MinedNegatives> mined;
    std::size_t empty_eligible = 0;
    std::size_t positive_missing = 0;
};

// Mines every (query, judged-positive) pair found in qrels against the run.
// Queries are independent; per-query streams derive from params.seed so the
// result does not depend on scheduling.
MiningOutcome mine_run(const ScoreRun& run,
                       const std::map<std::string, std::map<std::string, int>>& qrels,
                       const MiningParams& params, ExecPolicy policy = ExecPolicy::parallel);

void save_mined_negatives(const std::string& path, const std::vector<MinedNegatives>& mined);

}  // namespace embedforge
