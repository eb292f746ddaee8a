#include "embedforge/mining/negative_miner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "embedforge/core/error.hpp"
#include "embedforge/core/jsonl.hpp"

namespace embedforge {

MinedNegatives mine_hard_negatives(const std::map<std::string, double>& scores,
                                   const std::string& positive,
                                   const std::set<std::string>& other_judged,
                                   const MiningParams& params, RngStream& rng) {
    auto pos_it = scores.find(positive);
    if (pos_it == scores.end()) throw Error(ErrorKind::PositiveMissing, positive);
    for (const auto& [id, score] : scores) {
        if (!std::isfinite(score)) {
            throw Error(ErrorKind::SchemaViolation, "non-finite score for " + id);
        }
    }

    std::vector<std::pair<std::string, double>> ranked(scores.begin(), scores.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    const std::size_t top_n =
        std::min<std::size_t>(static_cast<std::size_t>(params.top_n_for_sigma), ranked.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < top_n; ++i) mean += ranked[i].second;
    mean /= static_cast<double>(top_n);
    double var = 0.0;
    for (std::size_t i = 0; i < top_n; ++i) {
        const double d = ranked[i].second - mean;
        var += d * d;
    }
    var /= static_cast<double>(top_n);  // population variance
    const double sigma = std::sqrt(var);

    MinedNegatives result;
    result.positive_id = positive;
    result.sigma = sigma;

    const double s_pos = pos_it->second;
    const double threshold = s_pos - sigma;
    const std::size_t window =
        std::min<std::size_t>(static_cast<std::size_t>(params.candidate_window_k), ranked.size());
    for (std::size_t i = 0; i < window; ++i) {
        const auto& [id, score] = ranked[i];
        if (id == positive) continue;
        if (other_judged.count(id)) continue;
        if (score <= threshold) result.eligible.push_back(id);
    }
    if (result.eligible.empty()) {
        throw Error(ErrorKind::EmptyEligible, "query has no mineable negatives");
    }

    const std::size_t want = static_cast<std::size_t>(params.negatives_per_query);
    for (std::size_t idx : rng.sample_indices(result.eligible.size(), want)) {
        result.sampled.push_back(result.eligible[idx]);
    }
    return result;
}

MiningOutcome mine_run(const ScoreRun& run,
                       const std::map<std::string, std::map<std::string, int>>& qrels,
                       const MiningParams& params, ExecPolicy policy) {
    // Flatten to (query, positive) jobs in deterministic order.
    struct Job {
        const std::string* qid;
        const std::string* pos;
        const std::map<std::string, double>* scores;
        std::set<std::string> judged;
    };
    std::vector<Job> jobs;
    for (const auto& [qid, docs] : qrels) {
        auto run_it = run.find(qid);
        if (run_it == run.end()) continue;
        std::set<std::string> judged;
        for (const auto& [did, grade] : docs) {
            if (grade > 0) judged.insert(did);
        }
        for (const auto& [did, grade] : docs) {
            if (grade <= 0) continue;
            Job job;
            job.qid = &qid;
            job.pos = &did;
            job.scores = &run_it->second;
            job.judged = judged;
            job.judged.erase(did);
            jobs.push_back(std::move(job));
        }
    }

    // Exceptions must not escape the parallel region; fold them into a
    // per-job status and rethrow unexpected ones afterwards.
    std::vector<int> status(jobs.size(), 0);  // 0 ok, 1 empty, 2 missing, 3 fatal
    std::vector<std::string> fatal(jobs.size());
    std::vector<MinedNegatives> mined(jobs.size());
    parallel_for(policy, jobs.size(), [&](std::size_t i) {
        RngStream rng(derive_seed(params.seed, static_cast<std::uint64_t>(i)));
        try {
            mined[i] = mine_hard_negatives(*jobs[i].scores, *jobs[i].pos, jobs[i].judged, params, rng);
            mined[i].query_id = *jobs[i].qid;
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::EmptyEligible) status[i] = 1;
            else if (e.kind() == ErrorKind::PositiveMissing) status[i] = 2;
            else {
                status[i] = 3;
                fatal[i] = e.what();
            }
        }
    });

    MiningOutcome outcome;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (status[i] == 0) outcome.mined.push_back(std::move(mined[i]));
        else if (status[i] == 1) ++outcome.empty_eligible;
        else if (status[i] == 2) ++outcome.positive_missing;
        else throw Error(ErrorKind::SchemaViolation, fatal[i]);
    }
    return outcome;
}

ScoreRun load_score_run(const std::string& path) {
    ScoreRun run;
    for_each_line(path, [&](std::size_t lineno, const std::string& line) {
        std::istringstream row(line);
        std::string qid, did, score_str;
        if (!std::getline(row, qid, '\t') || !std::getline(row, did, '\t') ||
            !std::getline(row, score_str, '\t')) {
            throw Error(ErrorKind::SchemaViolation,
                        path + " line " + std::to_string(lineno) +
                            ": expected query-id, doc-id, score");
        }
        try {
            run[qid][did] = std::stod(score_str);
        } catch (const std::exception&) {
            throw Error(ErrorKind::SchemaViolation,
                        path + " line " + std::to_string(lineno) + ": bad score");
        }
    });
    return run;
}

void save_mined_negatives(const std::string& path, const std::vector<MinedNegatives>& mined) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::FileMissing, "cannot open for write: " + path);
    for (const auto& m : mined) {
        json obj;
        obj["qid"] = m.query_id;
        obj["pos"] = m.positive_id;
        obj["negs"] = m.sampled;
        obj["sigma"] = m.sigma;
        out << obj.dump() << "\n";
    }
}

}  // namespace embedforge
