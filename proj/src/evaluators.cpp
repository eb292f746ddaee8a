#include "embedforge/eval/evaluators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "embedforge/core/error.hpp"
#include "embedforge/core/rng.hpp"
#include "embedforge/eval/kernels.hpp"
#include "embedforge/eval/metrics.hpp"

namespace embedforge {

namespace {

void check_dims(const EmbeddingStore& a, const EmbeddingStore& b) {
    if (a.dim != b.dim) {
        throw Error(ErrorKind::DimensionMismatch, "store dims " + std::to_string(a.dim) + " vs " +
                                                      std::to_string(b.dim));
    }
}

}  // namespace

RetrievalScores eval_retrieval(const EmbeddingStore& query_emb, const EmbeddingStore& doc_emb,
                               const RetrievalCollection& coll, ExecPolicy policy) {
    check_dims(query_emb, doc_emb);

    // Id-sorted doc matrix: ranking tie-breaks by index equal ascending id.
    std::vector<std::string> doc_ids;
    std::vector<std::vector<float>> doc_vecs;
    for (const auto& [id, text] : coll.corpus) {
        (void)text;
        doc_ids.push_back(id);
        doc_vecs.push_back(doc_emb.at(id));
    }

    std::vector<std::string> query_ids;
    std::vector<std::vector<float>> query_vecs;
    for (const auto& [qid, judgments] : coll.qrels) {
        bool has_relevant = false;
        for (const auto& [did, grade] : judgments) {
            (void)did;
            if (grade > 0) has_relevant = true;
        }
        if (!has_relevant) continue;  // nothing to rank against
        if (!coll.queries.count(qid)) throw Error(ErrorKind::DanglingReference, qid);
        query_ids.push_back(qid);
        query_vecs.push_back(query_emb.at(qid));
    }
    if (query_ids.empty()) throw Error(ErrorKind::EmptyInput, "no judged queries");

    const auto ranked = rank_by_cosine(query_vecs, doc_vecs, policy);

    RetrievalScores total;
    for (std::size_t qi = 0; qi < query_ids.size(); ++qi) {
        const auto& judgments = coll.qrels.at(query_ids[qi]);
        std::vector<int> gains;
        gains.reserve(doc_ids.size());
        for (std::uint32_t idx : ranked[qi]) {
            auto it = judgments.find(doc_ids[idx]);
            gains.push_back(it == judgments.end() ? 0 : it->second);
        }
        std::vector<int> relevant;
        std::size_t n_relevant = 0;
        for (const auto& [did, grade] : judgments) {
            (void)did;
            if (grade > 0) {
                relevant.push_back(grade);
                ++n_relevant;
            }
        }
        auto recall_at = [&](std::size_t k) {
            std::size_t hit = 0;
            for (std::size_t i = 0; i < std::min(k, gains.size()); ++i) {
                if (gains[i] > 0) ++hit;
            }
            return static_cast<double>(hit) / static_cast<double>(n_relevant);
        };
        total.ndcg_at_10 += ndcg_at_k(gains, relevant, 10);
        total.ndcg_at_1 += ndcg_at_k(gains, relevant, 1);
        total.ndcg_at_100 += ndcg_at_k(gains, relevant, 100);
        total.recall_at_10 += recall_at(10);
        total.recall_at_100 += recall_at(100);
    }
    const double n = static_cast<double>(query_ids.size());
    return {100.0 * total.ndcg_at_10 / n, 100.0 * total.ndcg_at_1 / n,
            100.0 * total.ndcg_at_100 / n, 100.0 * total.recall_at_10 / n,
            100.0 * total.recall_at_100 / n};
}

double eval_reranking(const EmbeddingStore& query_emb, const EmbeddingStore& cand_emb,
                      const std::map<std::string, RerankingCandidates>& candidates,
                      ExecPolicy policy) {
    check_dims(query_emb, cand_emb);
    if (candidates.empty()) throw Error(ErrorKind::EmptyInput, "no reranking queries");

    std::vector<double> ap_per_query(candidates.size(), 0.0);
    std::vector<const std::pair<const std::string, RerankingCandidates>*> items;
    for (const auto& entry : candidates) items.push_back(&entry);

    parallel_for(policy, items.size(), [&](std::size_t qi) {
        const auto& [qid, cand] = *items[qi];
        if (cand.positives.empty() || cand.negatives.empty()) {
            ap_per_query[qi] = -1.0;  // flagged below
            return;
        }
        // Id-sorted candidates so ranking ties break ascending by id.
        std::vector<std::pair<std::string, int>> labeled;
        for (const auto& id : cand.positives) labeled.emplace_back(id, 1);
        for (const auto& id : cand.negatives) labeled.emplace_back(id, 0);
        std::sort(labeled.begin(), labeled.end());
        std::vector<std::vector<float>> vecs;
        vecs.reserve(labeled.size());
        for (const auto& [id, label] : labeled) {
            (void)label;
            vecs.push_back(cand_emb.at(id));
        }
        const auto ranked = rank_by_cosine({query_emb.at(qid)}, vecs, ExecPolicy::serial);
        std::vector<int> labels_in_rank;
        labels_in_rank.reserve(labeled.size());
        for (std::uint32_t idx : ranked[0]) labels_in_rank.push_back(labeled[idx].second);
        ap_per_query[qi] = average_precision_ranked(labels_in_rank);
    });

    double sum = 0.0;
    for (std::size_t qi = 0; qi < items.size(); ++qi) {
        if (ap_per_query[qi] < 0.0) {
            throw Error(ErrorKind::EmptyInput,
                        items[qi]->first + ": needs at least one positive and one negative");
        }
        sum += ap_per_query[qi];
    }
    return 100.0 * sum / static_cast<double>(items.size());
}

namespace {

struct IndexedLabels {
    std::vector<std::string> label_names;                 // sorted
    std::map<std::string, int> label_index;
};

IndexedLabels index_labels(const std::vector<LabeledExample>& examples) {
    std::set<std::string> names;
    for (const auto& ex : examples) {
        for (const auto& l : ex.labels) names.insert(l);
    }
    IndexedLabels out;
    for (const auto& name : names) {
        out.label_index[name] = static_cast<int>(out.label_names.size());
        out.label_names.push_back(name);
    }
    return out;
}

}  // namespace

double eval_classification(const std::vector<LabeledExample>& train,
                           const EmbeddingStore& train_emb,
                           const std::vector<LabeledExample>& test,
                           const EmbeddingStore& test_emb,
                           const ClassificationProtocol& protocol) {
    check_dims(train_emb, test_emb);
    if (train.empty() || test.empty()) throw Error(ErrorKind::EmptyInput, "empty split");
    const IndexedLabels labels = index_labels(train);
    const int n_classes = static_cast<int>(labels.label_names.size());

    // Single-label task: the first label is the class.
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < train.size(); ++i) {
        by_class[labels.label_index.at(train[i].labels[0])].push_back(i);
    }

    std::vector<int> y_test;
    std::vector<std::vector<float>> x_test;
    for (const auto& ex : test) {
        auto it = labels.label_index.find(ex.labels[0]);
        if (it == labels.label_index.end()) {
            throw Error(ErrorKind::LabelMissingInTrain, ex.labels[0]);
        }
        y_test.push_back(it->second);
        x_test.push_back(test_emb.at(ex.id));
    }

    double sum_f1 = 0.0;
    for (int e = 0; e < protocol.n_experiments; ++e) {
        const int per_label = protocol.sizes[static_cast<std::size_t>(e) % protocol.sizes.size()];

        std::vector<int> y_train;
        std::vector<std::vector<float>> x_train;
        int retries = 0;
        for (;;) {
            y_train.clear();
            x_train.clear();
            RngStream rng(derive_seed(protocol.seed,
                                      "cls:" + std::to_string(e) + ":" + std::to_string(retries)));
            for (const auto& [cls, members] : by_class) {
                for (std::size_t idx : rng.sample_indices(
                         members.size(),
                         std::min<std::size_t>(static_cast<std::size_t>(per_label), members.size()))) {
                    y_train.push_back(cls);
                    x_train.push_back(train_emb.at(train[members[idx]].id));
                }
            }
            const std::set<int> present(y_train.begin(), y_train.end());
            if (present.size() >= 2) break;
            if (++retries > 8) {
                throw Error(ErrorKind::DegenerateLabels, "under 2 classes after retries");
            }
        }

        LogisticRegression model(static_cast<int>(train_emb.dim), n_classes);
        model.fit(x_train, y_train, protocol.max_iter, protocol.reg_strength);
        std::vector<int> y_pred;
        y_pred.reserve(x_test.size());
        for (const auto& x : x_test) y_pred.push_back(model.predict(x));
        sum_f1 += f1_macro(y_test, y_pred);
    }
    return 100.0 * sum_f1 / static_cast<double>(protocol.n_experiments);
}

double eval_multilabel(const std::vector<LabeledExample>& train, const EmbeddingStore& train_emb,
                       const std::vector<LabeledExample>& test, const EmbeddingStore& test_emb,
                       const MultilabelProtocol& protocol) {
    check_dims(train_emb, test_emb);
    if (train.empty() || test.empty()) throw Error(ErrorKind::EmptyInput, "empty split");
    const IndexedLabels labels = index_labels(train);
    const std::size_t n_labels = labels.label_names.size();

    std::map<int, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < train.size(); ++i) {
        for (const auto& l : train[i].labels) {
            by_label[labels.label_index.at(l)].push_back(i);
        }
    }
    for (const auto& ex : test) {
        for (const auto& l : ex.labels) {
            if (!labels.label_index.count(l)) throw Error(ErrorKind::LabelMissingInTrain, l);
        }
    }

    auto label_row = [&](const LabeledExample& ex) {
        std::vector<int> row(n_labels, 0);
        for (const auto& l : ex.labels) row[static_cast<std::size_t>(labels.label_index.at(l))] = 1;
        return row;
    };

    std::vector<std::vector<int>> y_test;
    std::vector<std::vector<float>> x_test;
    for (const auto& ex : test) {
        y_test.push_back(label_row(ex));
        x_test.push_back(test_emb.at(ex.id));
    }

    double sum_f1 = 0.0;
    for (int e = 0; e < protocol.n_experiments; ++e) {
        const int per_label =
            protocol.per_label_samples[static_cast<std::size_t>(e) % protocol.per_label_samples.size()];
        RngStream rng(derive_seed(protocol.seed, "mlcls:" + std::to_string(e)));

        std::set<std::size_t> chosen;
        for (const auto& [label, members] : by_label) {
            (void)label;
            for (std::size_t idx : rng.sample_indices(
                     members.size(),
                     std::min<std::size_t>(static_cast<std::size_t>(per_label), members.size()))) {
                chosen.insert(members[idx]);
            }
        }
        std::vector<std::vector<float>> x_train;
        std::vector<std::vector<int>> rows_train;
        for (std::size_t idx : chosen) {
            x_train.push_back(train_emb.at(train[idx].id));
            rows_train.push_back(label_row(train[idx]));
        }

        std::vector<std::vector<int>> y_pred;
        y_pred.reserve(x_test.size());
        for (const auto& x : x_test) {
            y_pred.push_back(knn_vote(x_train, rows_train, x, protocol.k, n_labels));
        }
        sum_f1 += f1_macro_multilabel(y_test, y_pred, n_labels);
    }
    return 100.0 * sum_f1 / static_cast<double>(protocol.n_experiments);
}

double eval_pair_classification(const EmbeddingStore& emb, const std::vector<LabeledPair>& pairs) {
    if (pairs.empty()) throw Error(ErrorKind::EmptyInput, "no pairs");
    bool has_pos = false;
    bool has_neg = false;
    std::vector<int> labels;
    std::vector<double> cos_scores;
    std::vector<double> dot_scores;
    std::vector<double> euc_scores;
    std::vector<double> man_scores;
    for (const auto& p : pairs) {
        const auto& a = emb.at(p.id_a);
        const auto& b = emb.at(p.id_b);
        labels.push_back(p.label);
        has_pos |= p.label == 1;
        has_neg |= p.label == 0;
        cos_scores.push_back(cosine_similarity(a, b));
        dot_scores.push_back(dot_product(a, b));
        euc_scores.push_back(-euclidean_distance(a, b));
        man_scores.push_back(-manhattan_distance(a, b));
    }
    if (!has_pos || !has_neg) {
        throw Error(ErrorKind::DegenerateLabels, "both labels must be present");
    }
    const double best = std::max({average_precision_scores(cos_scores, labels),
                                  average_precision_scores(dot_scores, labels),
                                  average_precision_scores(euc_scores, labels),
                                  average_precision_scores(man_scores, labels)});
    return 100.0 * best;
}

double eval_clustering(const EmbeddingStore& emb,
                       const std::vector<std::pair<std::string, std::string>>& gold_labels,
                       const ClusteringProtocol& protocol, ExecPolicy policy) {
    if (gold_labels.empty()) throw Error(ErrorKind::EmptyInput, "no documents");
    std::set<std::string> distinct;
    for (const auto& [id, label] : gold_labels) {
        (void)id;
        distinct.insert(label);
    }
    if (distinct.size() < 2) throw Error(ErrorKind::DegenerateLabels, "need >= 2 gold labels");

    std::map<std::string, int> label_index;
    for (const auto& name : distinct) {
        label_index.emplace(name, static_cast<int>(label_index.size()));
    }
    std::vector<std::vector<float>> points;
    std::vector<int> gold;
    for (const auto& [id, label] : gold_labels) {
        points.push_back(emb.at(id));
        gold.push_back(label_index.at(label));
    }

    double sum = 0.0;
    for (int rep = 0; rep < protocol.n_repetitions; ++rep) {
        const auto result =
            kmeans(points, static_cast<int>(distinct.size()), protocol.n_restarts,
                   protocol.max_iter, derive_seed(protocol.seed, "clust:" + std::to_string(rep)),
                   policy);
        sum += v_measure(gold, result.assignment);
    }
    return 100.0 * sum / static_cast<double>(protocol.n_repetitions);
}

double eval_sts(const EmbeddingStore& emb, const std::vector<LabeledPair>& pairs) {
    if (pairs.size() < 3) throw Error(ErrorKind::EmptyInput, "need >= 3 pairs");
    std::vector<double> gold;
    std::vector<double> predicted;
    for (const auto& p : pairs) {
        gold.push_back(p.gold);
        predicted.push_back(cosine_similarity(emb.at(p.id_a), emb.at(p.id_b)));
    }
    const double first = gold[0];
    bool varied = false;
    for (double g : gold) varied |= g != first;
    if (!varied) throw Error(ErrorKind::DegenerateGold, "gold scores all equal");
    return 100.0 * spearman(predicted, gold);
}

}  // namespace embedforge
