#include "embedforge/training/toy_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "embedforge/core/error.hpp"
#include "embedforge/core/hash.hpp"
#include "embedforge/core/rng.hpp"
#include "embedforge/core/text.hpp"

namespace embedforge {

ToyEncoder::ToyEncoder(int hash_dim, int embed_dim, std::uint64_t seed)
    : hash_dim_(hash_dim), embed_dim_(embed_dim) {
    if (hash_dim < 1 || embed_dim < 1) {
        throw Error(ErrorKind::ConfigError, "encoder dims must be positive");
    }
    weights_.resize(static_cast<std::size_t>(hash_dim) * embed_dim);
    RngStream rng(derive_seed(seed, "toy-encoder-init"));
    const double scale = 1.0 / std::sqrt(static_cast<double>(embed_dim));
    for (double& w : weights_) w = rng.gaussian() * scale;
}

std::vector<std::pair<std::uint32_t, double>> ToyEncoder::featurize(const std::string& text) const {
    const auto tokens = tokenize(text);
    if (tokens.empty()) throw Error(ErrorKind::EmptyText, "no tokens after tokenization");
    std::map<std::uint32_t, double> counts;
    for (const auto& tok : tokens) {
        counts[static_cast<std::uint32_t>(fnv1a64(tok) % static_cast<std::uint64_t>(hash_dim_))] +=
            1.0;
    }
    return {counts.begin(), counts.end()};
}

namespace {

std::vector<double> project_and_normalize(const ToyEncoder& enc,
                                          const std::vector<std::pair<std::uint32_t, double>>& feats,
                                          double* out_norm = nullptr) {
    std::vector<double> v(static_cast<std::size_t>(enc.embed_dim()), 0.0);
    for (const auto& [bucket, count] : feats) {
        for (int e = 0; e < enc.embed_dim(); ++e) {
            v[static_cast<std::size_t>(e)] += count * enc.weight(static_cast<int>(bucket), e);
        }
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (out_norm) *out_norm = norm;
    if (norm > 0.0) {
        for (double& x : v) x /= norm;
    }
    return v;
}

}  // namespace

std::vector<double> ToyEncoder::encode(const std::string& text) const {
    return project_and_normalize(*this, featurize(text));
}

std::vector<std::vector<double>> ToyEncoder::encode_batch(const std::vector<std::string>& texts,
                                                          ExecPolicy policy) const {
    std::vector<std::vector<double>> out(texts.size());
    std::vector<int> empty(texts.size(), 0);
    parallel_for(policy, texts.size(), [&](std::size_t i) {
        try {
            out[i] = encode(texts[i]);
        } catch (const Error&) {
            empty[i] = 1;
        }
    });
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (empty[i]) throw Error(ErrorKind::EmptyText, "text " + std::to_string(i));
    }
    return out;
}

EmbeddingStore ToyEncoder::embed_texts(const std::map<std::string, std::string>& texts,
                                       ExecPolicy policy) const {
    std::vector<std::string> ids;
    std::vector<std::string> bodies;
    for (const auto& [id, text] : texts) {
        ids.push_back(id);
        bodies.push_back(text);
    }
    const auto encoded = encode_batch(bodies, policy);
    EmbeddingStore store;
    store.dim = static_cast<std::uint32_t>(embed_dim_);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::vector<float> vec(encoded[i].begin(), encoded[i].end());
        store.entries[ids[i]] = std::move(vec);
    }
    return store;
}

BatchGradient batch_loss_and_grad(const ToyEncoder& encoder, const std::vector<Triplet>& batch,
                                  double tau, bool in_batch_negatives, ExecPolicy policy) {
    const std::size_t b = batch.size();
    if (b == 0) throw Error(ErrorKind::EmptyInput, "empty batch");
    const int dim = encoder.embed_dim();

    // Text slots: queries [0,b), positives [b,2b), negatives [2b,3b).
    std::vector<std::vector<std::pair<std::uint32_t, double>>> feats(3 * b);
    std::vector<std::vector<double>> unit(3 * b);
    std::vector<double> norms(3 * b, 0.0);
    parallel_for(policy, 3 * b, [&](std::size_t slot) {
        const Triplet& t = batch[slot % b];
        const std::string& text = slot < b ? t.query : (slot < 2 * b ? t.positive : t.negative);
        feats[slot] = encoder.featurize(text);
        unit[slot] = project_and_normalize(encoder, feats[slot], &norms[slot]);
    });

    // Candidate columns and similarity rows.
    std::vector<std::vector<double>> sims(b);
    std::vector<std::size_t> labels(b);
    const std::size_t n_cand = in_batch_negatives ? 2 * b : 2;
    parallel_for(policy, b, [&](std::size_t i) {
        sims[i].resize(n_cand);
        const auto& q = unit[i];
        auto dot = [&](const std::vector<double>& c) {
            double s = 0.0;
            for (int e = 0; e < dim; ++e) s += q[static_cast<std::size_t>(e)] * c[static_cast<std::size_t>(e)];
            return s;
        };
        if (in_batch_negatives) {
            for (std::size_t j = 0; j < b; ++j) sims[i][j] = dot(unit[b + j]);
            for (std::size_t j = 0; j < b; ++j) sims[i][b + j] = dot(unit[2 * b + j]);
            labels[i] = i;
        } else {
            sims[i][0] = dot(unit[b + i]);
            sims[i][1] = dot(unit[2 * b + i]);
            labels[i] = 0;
        }
    });

    const InfoNceResult nce = infonce_loss(sims, labels, tau, policy);

    // d(loss)/d(unit vector) per slot.
    std::vector<std::vector<double>> d_unit(3 * b, std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < sims[i].size(); ++j) {
            const double g = nce.grad[i][j];
            if (g == 0.0) continue;
            const std::size_t cand_slot = in_batch_negatives
                                              ? (j < b ? b + j : 2 * b + (j - b))
                                              : (j == 0 ? b + i : 2 * b + i);
            for (int e = 0; e < dim; ++e) {
                d_unit[i][static_cast<std::size_t>(e)] += g * unit[cand_slot][static_cast<std::size_t>(e)];
                d_unit[cand_slot][static_cast<std::size_t>(e)] += g * unit[i][static_cast<std::size_t>(e)];
            }
        }
    }

    // Through the normalization and projection into sparse weight rows.
    std::map<std::uint32_t, std::vector<double>> grad_rows;
    for (std::size_t slot = 0; slot < 3 * b; ++slot) {
        const double norm = norms[slot];
        if (norm <= 0.0) continue;
        double proj = 0.0;
        for (int e = 0; e < dim; ++e) {
            proj += d_unit[slot][static_cast<std::size_t>(e)] * unit[slot][static_cast<std::size_t>(e)];
        }
        std::vector<double> d_raw(static_cast<std::size_t>(dim));
        for (int e = 0; e < dim; ++e) {
            d_raw[static_cast<std::size_t>(e)] =
                (d_unit[slot][static_cast<std::size_t>(e)] -
                 proj * unit[slot][static_cast<std::size_t>(e)]) /
                norm;
        }
        for (const auto& [bucket, count] : feats[slot]) {
            auto& row = grad_rows[bucket];
            if (row.empty()) row.assign(static_cast<std::size_t>(dim), 0.0);
            for (int e = 0; e < dim; ++e) {
                row[static_cast<std::size_t>(e)] += count * d_raw[static_cast<std::size_t>(e)];
            }
        }
    }

    BatchGradient out;
    out.loss = nce.loss;
    out.rows.assign(grad_rows.begin(), grad_rows.end());
    return out;
}

TrainResult train_toy(const std::vector<Triplet>& data, const TrainingConfig& cfg, int hash_dim,
                      int embed_dim, ExecPolicy policy) {
    cfg.validate();
    if (data.size() < 4 * static_cast<std::size_t>(cfg.batch_size)) {
        throw Error(ErrorKind::EmptyInput, "need at least 4 x batch_size items");
    }

    // Group by (source, category); the synthetic classification subset
    // trains without in-batch negatives.
    std::map<std::string, std::vector<std::size_t>> groups;
    std::map<std::string, bool> is_cls;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Triplet& t = data[i];
        const std::string key =
            std::string(source_name(t.source)) + ":" + category_name(t.category);
        groups[key].push_back(i);
        is_cls[key] =
            t.source == TripletSource::synthetic && t.category == Category::long_short;
    }
    std::vector<SourceSpec> mix;
    for (const auto& [name, items] : groups) {
        mix.push_back({name, items.size(), is_cls[name]});
    }

    TrainResult result;
    result.encoder = ToyEncoder(hash_dim, embed_dim, cfg.seed);

    // One fixed plan reused every epoch: with a zero learning rate the loss
    // curve then repeats exactly per epoch.
    const std::vector<Batch> plan = build_epoch(mix, cfg);
    const std::size_t total_steps = plan.size() * static_cast<std::size_t>(cfg.epochs);
    const std::size_t warmup_steps =
        static_cast<std::size_t>(cfg.warmup_ratio * static_cast<double>(total_steps));

    std::size_t step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const Batch& batch : plan) {
            std::vector<Triplet> items;
            items.reserve(batch.items.size());
            for (std::size_t idx : batch.items) items.push_back(data[groups[batch.source][idx]]);
            const BatchGradient grad = batch_loss_and_grad(
                result.encoder, items, cfg.temperature, batch.in_batch_negatives_enabled, policy);
            if (!std::isfinite(grad.loss)) {
                result.diverged = true;
                return result;
            }
            result.losses.push_back(grad.loss);
            const double lr =
                step < warmup_steps
                    ? cfg.learning_rate * static_cast<double>(step + 1) /
                          static_cast<double>(warmup_steps)
                    : cfg.learning_rate;
            // Snapshot the touched rows so a non-finite update can roll back
            // to the last good state.
            std::vector<std::pair<std::uint32_t, std::vector<double>>> snapshot;
            snapshot.reserve(grad.rows.size());
            for (const auto& [bucket, row] : grad.rows) {
                (void)row;
                std::vector<double> saved(static_cast<std::size_t>(embed_dim));
                for (int e = 0; e < embed_dim; ++e) {
                    saved[static_cast<std::size_t>(e)] =
                        result.encoder.weight(static_cast<int>(bucket), e);
                }
                snapshot.emplace_back(bucket, std::move(saved));
            }
            bool overflowed = false;
            for (const auto& [bucket, row] : grad.rows) {
                for (int e = 0; e < embed_dim; ++e) {
                    double& w = result.encoder.weight(static_cast<int>(bucket), e);
                    w -= lr * row[static_cast<std::size_t>(e)];
                    if (!std::isfinite(w)) overflowed = true;
                }
            }
            if (overflowed) {
                for (const auto& [bucket, saved] : snapshot) {
                    for (int e = 0; e < embed_dim; ++e) {
                        result.encoder.weight(static_cast<int>(bucket), e) =
                            saved[static_cast<std::size_t>(e)];
                    }
                }
                result.diverged = true;
                return result;
            }
            ++step;
        }
    }
    return result;
}

void save_loss_curve(const std::string& path, const std::vector<double>& losses) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::FileMissing, "cannot open for write: " + path);
    out << "batch_index,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i) {
        out << i << "," << losses[i] << "\n";
    }
}

ToyTask make_separable_topic_task(int n_topics, int train_per_topic, int heldout_queries_per_topic,
                                  int docs_per_topic, std::uint64_t seed) {
    RngStream rng(derive_seed(seed, "toy-task"));
    const int vocab_per_side = 32;

    // Per topic, the query side and the document side use disjoint token
    // sets. A randomly initialized encoder therefore scores near zero on
    // every (query, doc) pair; only the trained alignment can link them.
    auto query_token = [&](int topic, std::uint64_t k) {
        return "t" + std::to_string(topic) + "q" + std::to_string(k);
    };
    auto doc_token = [&](int topic, std::uint64_t k) {
        return "t" + std::to_string(topic) + "d" + std::to_string(k);
    };
    auto make_text = [&](int topic, bool query_side, int min_tokens, int max_tokens) {
        const int n = min_tokens + static_cast<int>(rng.below(
                                       static_cast<std::uint64_t>(max_tokens - min_tokens + 1)));
        std::string text;
        for (int i = 0; i < n; ++i) {
            if (i) text += " ";
            const auto k = rng.below(vocab_per_side);
            text += query_side ? query_token(topic, k) : doc_token(topic, k);
        }
        return text;
    };

    ToyTask task;
    for (int topic = 0; topic < n_topics; ++topic) {
        for (int i = 0; i < train_per_topic; ++i) {
            Triplet t;
            t.id = "toy-" + std::to_string(topic) + "-" + std::to_string(i);
            t.category = Category::short_long;
            t.source = TripletSource::synthetic;
            t.query = make_text(topic, true, 3, 6);
            t.positive = make_text(topic, false, 8, 16);
            int other = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_topics - 1)));
            if (other >= topic) ++other;
            t.negative = make_text(other, false, 8, 16);
            task.train.push_back(std::move(t));
        }
    }

    for (int topic = 0; topic < n_topics; ++topic) {
        for (int d = 0; d < docs_per_topic; ++d) {
            task.heldout.corpus["d" + std::to_string(topic) + "-" + std::to_string(d)] =
                make_text(topic, false, 8, 16);
        }
    }
    for (int topic = 0; topic < n_topics; ++topic) {
        for (int q = 0; q < heldout_queries_per_topic; ++q) {
            const std::string qid = "q" + std::to_string(topic) + "-" + std::to_string(q);
            task.heldout.queries[qid] = make_text(topic, true, 3, 6);
            for (int d = 0; d < docs_per_topic; ++d) {
                task.heldout.qrels[qid]["d" + std::to_string(topic) + "-" + std::to_string(d)] = 1;
            }
        }
    }
    return task;
}

}  // namespace embedforge
