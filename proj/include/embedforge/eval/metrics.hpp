#pragma once

#include <string>
#include <vector>

namespace embedforge {

// DCG with linear gain rel/log2(rank+1) over gains already in rank order.
double dcg_at_k(const std::vector<int>& gains_in_rank_order, std::size_t k);

// nDCG@k: ideal ranking is the relevant gains sorted descending. Returns 0
// when there is no relevant gain.
double ndcg_at_k(const std::vector<int>& gains_in_rank_order,
                 const std::vector<int>& all_relevant_gains, std::size_t k);

// Average precision over a ranked list of binary labels: the mean of
// precision@rank at each positive hit.
double average_precision_ranked(const std::vector<int>& labels_in_rank_order);

// Average precision from scores with step interpolation; tied scores form a
// single threshold block. Equals the ranked version when scores are
// distinct.
double average_precision_scores(const std::vector<double>& scores,
                                const std::vector<int>& labels);

// Average ranks (ties share the mean rank).
std::vector<double> average_ranks(const std::vector<double>& values);

// Spearman rank correlation with average-rank tie handling. Returns 0 when
// either side has zero rank variance.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// V-measure (beta = 1) between two labelings given as class ids.
double v_measure(const std::vector<int>& labels_true, const std::vector<int>& labels_pred);

// Macro F1 over the union of classes appearing in y_true or y_pred.
double f1_macro(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// Macro F1 over binary label indicator rows (multilabel); averaged over the
// union of labels with gold or predicted support.
double f1_macro_multilabel(const std::vector<std::vector<int>>& y_true,
                           const std::vector<std::vector<int>>& y_pred, std::size_t n_labels);

}  // namespace embedforge
