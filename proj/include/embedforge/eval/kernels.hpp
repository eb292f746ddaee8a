#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embedforge/core/parallel.hpp"

namespace embedforge {

// L2-normalized copy; zero vectors stay zero.
std::vector<float> l2_normalized(const std::vector<float>& v);

double dot_product(const std::vector<float>& a, const std::vector<float>& b);
double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b);
double euclidean_distance(const std::vector<float>& a, const std::vector<float>& b);
double manhattan_distance(const std::vector<float>& a, const std::vector<float>& b);

// For each query row, all candidate indices ordered by cosine descending,
// ties by ascending index. Callers that need id-ordered tie-breaking sort
// their candidates by id up front. Queries are independent, so the parallel
// variant is bit-identical to the serial reference.
std::vector<std::vector<std::uint32_t>> rank_by_cosine(
    const std::vector<std::vector<float>>& queries,
    const std::vector<std::vector<float>>& docs, ExecPolicy policy = ExecPolicy::serial);

struct KMeansResult {
    std::vector<int> assignment;
    double inertia = 0.0;
};

// Lloyd iterations with k-means++ seeding; best inertia over n_restarts is
// kept. Assignment steps run under the given policy; center updates and
// inertia sums stay serial so results match the reference bit for bit.
KMeansResult kmeans(const std::vector<std::vector<float>>& points, int k, int n_restarts,
                    int max_iter, std::uint64_t seed, ExecPolicy policy = ExecPolicy::serial);

// L2-regularized multinomial logistic regression, full-batch gradient
// descent with backtracking line search, intercept unregularized.
class LogisticRegression {
public:
    LogisticRegression(int n_features, int n_classes);

    void fit(const std::vector<std::vector<float>>& x, const std::vector<int>& y, int max_iter,
             double reg_strength);

    int predict(const std::vector<float>& x) const;

private:
    std::vector<double> scores(const std::vector<float>& x) const;

    int n_features_;
    int n_classes_;
    std::vector<double> weights_;  // n_classes x (n_features + 1), bias last
};

// Multilabel k-NN vote: label row set where strictly more than half of the
// k nearest neighbours (cosine, ties by index) carry the label.
std::vector<int> knn_vote(const std::vector<std::vector<float>>& train_vectors,
                          const std::vector<std::vector<int>>& train_label_rows,
                          const std::vector<float>& query, int k, std::size_t n_labels);

}  // namespace embedforge
