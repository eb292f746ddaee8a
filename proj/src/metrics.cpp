#include "embedforge/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "embedforge/core/error.hpp"

namespace embedforge {

double dcg_at_k(const std::vector<int>& gains, std::size_t k) {
    double dcg = 0.0;
    const std::size_t top = std::min(k, gains.size());
    for (std::size_t i = 0; i < top; ++i) {
        dcg += static_cast<double>(gains[i]) / std::log2(static_cast<double>(i) + 2.0);
    }
    return dcg;
}

double ndcg_at_k(const std::vector<int>& gains, const std::vector<int>& all_relevant,
                 std::size_t k) {
    std::vector<int> ideal(all_relevant);
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());
    const double idcg = dcg_at_k(ideal, k);
    if (idcg <= 0.0) return 0.0;
    return dcg_at_k(gains, k) / idcg;
}

double average_precision_ranked(const std::vector<int>& labels) {
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i]) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    if (hits == 0) return 0.0;
    return sum / static_cast<double>(hits);
}

double average_precision_scores(const std::vector<double>& scores,
                                const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty()) {
        throw Error(ErrorKind::EmptyInput, "scores/labels mismatch");
    }
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += l ? 1 : 0;
    if (n_pos == 0) return 0.0;

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0;
    std::size_t seen = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        // One threshold per distinct score value.
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            tp += labels[order[j]] ? 1 : 0;
            ++seen;
            ++j;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return ap;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = shared;
        i = j;
    }
    return ranks;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw Error(ErrorKind::EmptyInput, "need >= 2 paired values");
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0;
    double mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += ra[i];
        mean_b += rb[i];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0;
    double var_a = 0.0;
    double var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = ra[i] - mean_a;
        const double db = rb[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0) return 0.0;
    return cov / std::sqrt(var_a * var_b);
}

namespace {

double entropy(const std::map<int, std::size_t>& counts, std::size_t n) {
    double h = 0.0;
    for (const auto& [label, count] : counts) {
        (void)label;
        if (count == 0) continue;
        const double p = static_cast<double>(count) / static_cast<double>(n);
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace

double v_measure(const std::vector<int>& labels_true, const std::vector<int>& labels_pred) {
    if (labels_true.size() != labels_pred.size() || labels_true.empty()) {
        throw Error(ErrorKind::EmptyInput, "label vectors mismatch");
    }
    const std::size_t n = labels_true.size();
    std::map<int, std::size_t> class_counts;
    std::map<int, std::size_t> cluster_counts;
    std::map<std::pair<int, int>, std::size_t> joint;
    for (std::size_t i = 0; i < n; ++i) {
        class_counts[labels_true[i]]++;
        cluster_counts[labels_pred[i]]++;
        joint[{labels_true[i], labels_pred[i]}]++;
    }
    const double h_c = entropy(class_counts, n);
    const double h_k = entropy(cluster_counts, n);

    double h_c_given_k = 0.0;
    double h_k_given_c = 0.0;
    for (const auto& [pair, count] : joint) {
        const double p = static_cast<double>(count) / static_cast<double>(n);
        const double p_k = static_cast<double>(cluster_counts[pair.second]) / static_cast<double>(n);
        const double p_c = static_cast<double>(class_counts[pair.first]) / static_cast<double>(n);
        h_c_given_k -= p * std::log(p / p_k);
        h_k_given_c -= p * std::log(p / p_c);
    }

    const double homogeneity = h_c <= 0.0 ? 1.0 : 1.0 - h_c_given_k / h_c;
    const double completeness = h_k <= 0.0 ? 1.0 : 1.0 - h_k_given_c / h_k;
    if (homogeneity + completeness <= 0.0) return 0.0;
    return 2.0 * homogeneity * completeness / (homogeneity + completeness);
}

double f1_macro(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty()) {
        throw Error(ErrorKind::EmptyInput, "prediction size mismatch");
    }
    std::set<int> classes(y_true.begin(), y_true.end());
    classes.insert(y_pred.begin(), y_pred.end());
    double sum = 0.0;
    for (int cls : classes) {
        std::size_t tp = 0;
        std::size_t fp = 0;
        std::size_t fn = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            const bool t = y_true[i] == cls;
            const bool p = y_pred[i] == cls;
            if (t && p) ++tp;
            else if (!t && p) ++fp;
            else if (t && !p) ++fn;
        }
        const double denom = static_cast<double>(2 * tp + fp + fn);
        sum += denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
    }
    return sum / static_cast<double>(classes.size());
}

double f1_macro_multilabel(const std::vector<std::vector<int>>& y_true,
                           const std::vector<std::vector<int>>& y_pred, std::size_t n_labels) {
    if (y_true.size() != y_pred.size() || y_true.empty()) {
        throw Error(ErrorKind::EmptyInput, "prediction size mismatch");
    }
    double sum = 0.0;
    std::size_t active = 0;
    for (std::size_t l = 0; l < n_labels; ++l) {
        std::size_t tp = 0;
        std::size_t fp = 0;
        std::size_t fn = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            const bool t = y_true[i][l] != 0;
            const bool p = y_pred[i][l] != 0;
            if (t && p) ++tp;
            else if (!t && p) ++fp;
            else if (t && !p) ++fn;
        }
        if (tp + fp + fn == 0) continue;  // label untouched by gold and predictions
        ++active;
        const double denom = static_cast<double>(2 * tp + fp + fn);
        sum += 2.0 * static_cast<double>(tp) / denom;
    }
    if (active == 0) return 0.0;
    return sum / static_cast<double>(active);
}

}  // namespace embedforge
