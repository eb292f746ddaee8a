#include "embedforge/filter/triplet_filter.hpp"

#include <cmath>
#include <fstream>

#include <httplib.h>

#include "embedforge/core/error.hpp"
#include "embedforge/core/hash.hpp"
#include "embedforge/core/jsonl.hpp"

namespace embedforge {

namespace {

std::string pair_key(const std::string& query, const std::string& doc) {
    std::string payload = query;
    payload.push_back('\x1f');
    payload += doc;
    return sha256_hex(payload);
}

void check_score(double s) {
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
        throw Error(ErrorKind::ScoreOutOfRange, "reranker returned " + std::to_string(s));
    }
}

}  // namespace

ScoreCache::ScoreCache(const std::string& path) : path_(path) {
    std::ifstream probe(path);
    if (!probe) return;  // fresh cache file, created on first insert
    probe.close();
    for_each_line(path, [&](std::size_t, const std::string& line) {
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.contains("key") || !obj.contains("score")) return;
        entries_[obj["key"].get<std::string>()] = obj["score"].get<double>();
    });
}

ScoreCache::~ScoreCache() = default;

bool ScoreCache::lookup(const std::string& query, const std::string& doc, double& out) const {
    auto it = entries_.find(pair_key(query, doc));
    if (it == entries_.end()) return false;
    out = it->second;
    return true;
}

void ScoreCache::insert(const std::string& query, const std::string& doc, double score) {
    const std::string key = pair_key(query, doc);
    if (!entries_.emplace(key, score).second) return;
    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app);
        out << json{{"key", key}, {"score", score}}.dump() << "\n";
    }
}

std::vector<RerankScore> score_triplets(const std::vector<Triplet>& triplets, Scorer& scorer,
                                        ScoreCache* cache) {
    ScoreCache local;
    if (!cache) cache = &local;

    auto score_pair = [&](const std::string& query, const std::string& doc) {
        double s;
        if (cache->lookup(query, doc, s)) return s;
        const auto scores = scorer.score(query, {doc});
        if (scores.size() != 1) {
            throw Error(ErrorKind::SchemaError, "scorer returned wrong count");
        }
        check_score(scores[0]);
        cache->insert(query, doc, scores[0]);
        return scores[0];
    };

    std::vector<RerankScore> out;
    out.reserve(triplets.size());
    for (const auto& t : triplets) {
        if (t.category == Category::sts) continue;  // no hard negative to judge
        RerankScore rs;
        rs.id = t.id;
        rs.s_pos = score_pair(t.query, t.positive);
        rs.s_neg = score_pair(t.query, t.negative);
        out.push_back(std::move(rs));
    }
    return out;
}

FilterOutcome filter_triplets(const std::vector<RerankScore>& scores, const FilterConfig& cfg) {
    if (!(cfg.threshold_c > 0.0) || cfg.threshold_c > 1.0) {
        throw Error(ErrorKind::ConfigError, "threshold C must lie in (0, 1]");
    }
    FilterOutcome outcome;
    for (const auto& s : scores) {
        check_score(s.s_pos);
        check_score(s.s_neg);
        const double margin = s.s_pos - s.s_neg;
        if (margin <= 0.0) {
            outcome.rejected.emplace_back(s.id, "non-positive margin");
        } else if (margin >= cfg.threshold_c) {
            outcome.rejected.emplace_back(s.id, "margin >= C");
        } else {
            outcome.kept.push_back(s.id);
        }
    }
    return outcome;
}

namespace {

class HttpScorer final : public Scorer {
public:
    HttpScorer(const std::string& url, int timeout_seconds) {
        auto slash = url.find('/', url.find("://") + 3);
        host_ = slash == std::string::npos ? url : url.substr(0, slash);
        path_ = slash == std::string::npos ? "/" : url.substr(slash);
        timeout_ = timeout_seconds;
    }

    std::vector<double> score(const std::string& query,
                              const std::vector<std::string>& documents) override {
        httplib::Client client(host_);
        client.set_read_timeout(timeout_, 0);
        json body{{"query", query}, {"documents", documents}};
        auto res = client.Post(path_, body.dump(), "application/json");
        if (!res || res->status != 200) {
            throw Error(ErrorKind::TransportError,
                        "reranker POST failed" +
                            (res ? " with status " + std::to_string(res->status) : ""));
        }
        json obj = json::parse(res->body, nullptr, false);
        if (obj.is_discarded() || !obj.contains("scores") || !obj["scores"].is_array() ||
            obj["scores"].size() != documents.size()) {
            throw Error(ErrorKind::SchemaError, "reranker response missing scores");
        }
        std::vector<double> scores;
        for (const auto& s : obj["scores"]) {
            if (!s.is_number()) throw Error(ErrorKind::SchemaError, "non-numeric score");
            scores.push_back(s.get<double>());
        }
        return scores;
    }

private:
    std::string host_;
    std::string path_;
    int timeout_ = 60;
};

}  // namespace

std::unique_ptr<Scorer> make_http_scorer(const std::string& url, int timeout_seconds) {
    return std::make_unique<HttpScorer>(url, timeout_seconds);
}

std::vector<RerankScore> load_rerank_scores(const std::string& path) {
    std::vector<RerankScore> scores;
    for_each_line(path, [&](std::size_t lineno, const std::string& line) {
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error&) {
            throw Error(ErrorKind::SchemaViolation,
                        path + " line " + std::to_string(lineno) + ": invalid JSON");
        }
        if (!obj.contains("id") || !obj.contains("s_pos") || !obj.contains("s_neg")) {
            throw Error(ErrorKind::SchemaViolation,
                        path + " line " + std::to_string(lineno) + ": expected {id, s_pos, s_neg}");
        }
        scores.push_back(
            {obj["id"].get<std::string>(), obj["s_pos"].get<double>(), obj["s_neg"].get<double>()});
    });
    return scores;
}

void save_rerank_scores(const std::string& path, const std::vector<RerankScore>& scores) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::FileMissing, "cannot open for write: " + path);
    for (const auto& s : scores) {
        out << json{{"id", s.id}, {"s_pos", s.s_pos}, {"s_neg", s.s_neg}}.dump() << "\n";
    }
}

}  // namespace embedforge
