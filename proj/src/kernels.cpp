#include "embedforge/eval/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "embedforge/core/error.hpp"
#include "embedforge/core/rng.hpp"

namespace embedforge {

std::vector<float> l2_normalized(const std::vector<float>& v) {
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    std::vector<float> out(v);
    if (norm > 0.0) {
        for (float& x : out) x = static_cast<float>(x / norm);
    }
    return out;
}

double dot_product(const std::vector<float>& a, const std::vector<float>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

double euclidean_distance(const std::vector<float>& a, const std::vector<float>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double manhattan_distance(const std::vector<float>& a, const std::vector<float>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::abs(static_cast<double>(a[i]) - b[i]);
    }
    return s;
}

std::vector<std::vector<std::uint32_t>> rank_by_cosine(
    const std::vector<std::vector<float>>& queries, const std::vector<std::vector<float>>& docs,
    ExecPolicy policy) {
    std::vector<std::vector<std::uint32_t>> ranked(queries.size());
    parallel_for(policy, queries.size(), [&](std::size_t qi) {
        std::vector<double> scores(docs.size());
        for (std::size_t di = 0; di < docs.size(); ++di) {
            scores[di] = cosine_similarity(queries[qi], docs[di]);
        }
        std::vector<std::uint32_t> order(docs.size());
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return scores[a] > scores[b];
        });
        ranked[qi] = std::move(order);
    });
    return ranked;
}

namespace {

double squared_distance(const std::vector<float>& p, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = static_cast<double>(p[i]) - c[i];
        s += d * d;
    }
    return s;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<float>>& points, int k, int n_restarts,
                    int max_iter, std::uint64_t seed, ExecPolicy policy) {
    const std::size_t n = points.size();
    if (n == 0 || k < 1) throw Error(ErrorKind::EmptyInput, "kmeans needs points and k >= 1");
    const std::size_t dim = points[0].size();

    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();

    for (int restart = 0; restart < n_restarts; ++restart) {
        RngStream rng(derive_seed(seed, "kmeans:" + std::to_string(restart)));

        // k-means++ seeding.
        std::vector<std::vector<double>> centers;
        centers.reserve(static_cast<std::size_t>(k));
        {
            const std::size_t first = static_cast<std::size_t>(rng.below(n));
            centers.emplace_back(points[first].begin(), points[first].end());
            std::vector<double> d2(n);
            while (centers.size() < static_cast<std::size_t>(k)) {
                double total = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double nearest = std::numeric_limits<double>::infinity();
                    for (const auto& c : centers) nearest = std::min(nearest, squared_distance(points[i], c));
                    d2[i] = nearest;
                    total += nearest;
                }
                std::size_t chosen = 0;
                if (total > 0.0) {
                    const double u = rng.real01() * total;
                    double acc = 0.0;
                    chosen = n - 1;
                    for (std::size_t i = 0; i < n; ++i) {
                        acc += d2[i];
                        if (u < acc) {
                            chosen = i;
                            break;
                        }
                    }
                } else {
                    chosen = static_cast<std::size_t>(rng.below(n));
                }
                centers.emplace_back(points[chosen].begin(), points[chosen].end());
            }
        }

        std::vector<int> assignment(n, -1);
        for (int iter = 0; iter < max_iter; ++iter) {
            // Assignment: nearest center, ties to the lowest center index.
            std::vector<int> next(n);
            parallel_for(policy, n, [&](std::size_t i) {
                double best_d = std::numeric_limits<double>::infinity();
                int best_c = 0;
                for (int c = 0; c < k; ++c) {
                    const double d = squared_distance(points[i], centers[static_cast<std::size_t>(c)]);
                    if (d < best_d) {
                        best_d = d;
                        best_c = c;
                    }
                }
                next[i] = best_c;
            });
            const bool converged = next == assignment;
            assignment = std::move(next);
            if (converged) break;

            std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
            std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                                  std::vector<double>(dim, 0.0));
            for (std::size_t i = 0; i < n; ++i) {
                const auto c = static_cast<std::size_t>(assignment[i]);
                counts[c]++;
                for (std::size_t d = 0; d < dim; ++d) sums[c][d] += points[i][d];
            }
            for (int c = 0; c < k; ++c) {
                const auto cs = static_cast<std::size_t>(c);
                if (counts[cs] == 0) {
                    // Re-seed an empty cluster at the point farthest from its
                    // current center (deterministic: ties to lowest index).
                    double worst = -1.0;
                    std::size_t worst_i = 0;
                    for (std::size_t i = 0; i < n; ++i) {
                        const double d = squared_distance(
                            points[i], centers[static_cast<std::size_t>(assignment[i])]);
                        if (d > worst) {
                            worst = d;
                            worst_i = i;
                        }
                    }
                    centers[cs].assign(points[worst_i].begin(), points[worst_i].end());
                } else {
                    for (std::size_t d = 0; d < dim; ++d) {
                        centers[cs][d] = sums[cs][d] / static_cast<double>(counts[cs]);
                    }
                }
            }
        }

        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            inertia += squared_distance(points[i], centers[static_cast<std::size_t>(assignment[i])]);
        }
        if (inertia < best.inertia) {
            best.inertia = inertia;
            best.assignment = assignment;
        }
    }
    return best;
}

LogisticRegression::LogisticRegression(int n_features, int n_classes)
    : n_features_(n_features), n_classes_(n_classes) {
    weights_.assign(static_cast<std::size_t>(n_classes) * (n_features + 1), 0.0);
}

std::vector<double> LogisticRegression::scores(const std::vector<float>& x) const {
    std::vector<double> out(static_cast<std::size_t>(n_classes_), 0.0);
    for (int c = 0; c < n_classes_; ++c) {
        const double* w = weights_.data() + static_cast<std::size_t>(c) * (n_features_ + 1);
        double s = w[n_features_];  // bias
        for (int f = 0; f < n_features_; ++f) s += w[f] * x[static_cast<std::size_t>(f)];
        out[static_cast<std::size_t>(c)] = s;
    }
    return out;
}

void LogisticRegression::fit(const std::vector<std::vector<float>>& x, const std::vector<int>& y,
                             int max_iter, double reg_strength) {
    const std::size_t n = x.size();
    if (n == 0 || y.size() != n) throw Error(ErrorKind::EmptyInput, "bad training data");
    const double lambda = reg_strength / static_cast<double>(n);
    const std::size_t stride = static_cast<std::size_t>(n_features_) + 1;

    auto objective_and_grad = [&](const std::vector<double>& w, std::vector<double>* grad) {
        if (grad) grad->assign(w.size(), 0.0);
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> logits(static_cast<std::size_t>(n_classes_), 0.0);
            for (int c = 0; c < n_classes_; ++c) {
                const double* wc = w.data() + static_cast<std::size_t>(c) * stride;
                double s = wc[n_features_];
                for (int f = 0; f < n_features_; ++f) s += wc[f] * x[i][static_cast<std::size_t>(f)];
                logits[static_cast<std::size_t>(c)] = s;
            }
            const double max_l = *std::max_element(logits.begin(), logits.end());
            double denom = 0.0;
            for (double& l : logits) {
                l = std::exp(l - max_l);
                denom += l;
            }
            loss += -std::log(logits[static_cast<std::size_t>(y[i])] / denom);
            if (grad) {
                for (int c = 0; c < n_classes_; ++c) {
                    const double p = logits[static_cast<std::size_t>(c)] / denom;
                    const double g = (p - (c == y[i] ? 1.0 : 0.0)) / static_cast<double>(n);
                    double* gc = grad->data() + static_cast<std::size_t>(c) * stride;
                    for (int f = 0; f < n_features_; ++f) {
                        gc[f] += g * x[i][static_cast<std::size_t>(f)];
                    }
                    gc[n_features_] += g;
                }
            }
        }
        loss /= static_cast<double>(n);
        for (int c = 0; c < n_classes_; ++c) {
            const double* wc = w.data() + static_cast<std::size_t>(c) * stride;
            for (int f = 0; f < n_features_; ++f) {
                loss += 0.5 * lambda * wc[f] * wc[f];
                if (grad) (*grad)[static_cast<std::size_t>(c) * stride + f] += lambda * wc[f];
            }
        }
        return loss;
    };

    std::vector<double> grad;
    double loss = objective_and_grad(weights_, &grad);
    double step = 1.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        double grad_norm2 = 0.0;
        for (double g : grad) grad_norm2 += g * g;
        if (grad_norm2 < 1e-12) break;

        // Backtracking line search on the Armijo condition.
        std::vector<double> trial(weights_.size());
        double trial_loss = 0.0;
        bool accepted = false;
        for (int half = 0; half < 30; ++half) {
            for (std::size_t j = 0; j < weights_.size(); ++j) {
                trial[j] = weights_[j] - step * grad[j];
            }
            trial_loss = objective_and_grad(trial, nullptr);
            if (trial_loss <= loss - 1e-4 * step * grad_norm2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        weights_ = trial;
        loss = objective_and_grad(weights_, &grad);
        step *= 2.0;  // let the next step grow back
    }
}

int LogisticRegression::predict(const std::vector<float>& x) const {
    const auto s = scores(x);
    return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

std::vector<int> knn_vote(const std::vector<std::vector<float>>& train_vectors,
                          const std::vector<std::vector<int>>& train_label_rows,
                          const std::vector<float>& query, int k, std::size_t n_labels) {
    const std::size_t n = train_vectors.size();
    if (n == 0) throw Error(ErrorKind::EmptyInput, "empty train set");
    std::vector<double> sims(n);
    for (std::size_t i = 0; i < n; ++i) sims[i] = cosine_similarity(query, train_vectors[i]);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
    const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), n);

    std::vector<int> votes(n_labels, 0);
    for (std::size_t i = 0; i < k_eff; ++i) {
        for (std::size_t l = 0; l < n_labels; ++l) votes[l] += train_label_rows[order[i]][l];
    }
    std::vector<int> prediction(n_labels, 0);
    for (std::size_t l = 0; l < n_labels; ++l) {
        prediction[l] = 2 * static_cast<std::size_t>(votes[l]) > k_eff ? 1 : 0;
    }
    return prediction;
}

}  // namespace embedforge
