#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "embedforge/core/parallel.hpp"
#include "embedforge/dataset/embedding_store.hpp"
#include "embedforge/dataset/labeled.hpp"
#include "embedforge/dataset/retrieval.hpp"

namespace embedforge {

// All evaluators return main scores scaled to [0, 100]. Ranking ties break
// by ascending id everywhere.

struct RetrievalScores {
    double ndcg_at_10 = 0.0;  // main score
    double ndcg_at_1 = 0.0;
    double ndcg_at_100 = 0.0;
    double recall_at_10 = 0.0;
    double recall_at_100 = 0.0;
};

// Cosine ranking per query; linear-gain nDCG; queries without relevant
// judgments are excluded from the means.
RetrievalScores eval_retrieval(const EmbeddingStore& query_emb, const EmbeddingStore& doc_emb,
                               const RetrievalCollection& coll,
                               ExecPolicy policy = ExecPolicy::serial);

struct RerankingCandidates {
    std::vector<std::string> positives;
    std::vector<std::string> negatives;
};

// MAP over per-query candidate rankings.
double eval_reranking(const EmbeddingStore& query_emb, const EmbeddingStore& cand_emb,
                      const std::map<std::string, RerankingCandidates>& candidates,
                      ExecPolicy policy = ExecPolicy::serial);

struct ClassificationProtocol {
    int n_experiments = 10;
    std::vector<int> sizes = {8, 16, 32, 64, 128};  // per-label, cycled over experiments
    int max_iter = 100;
    double reg_strength = 1.0;
    std::uint64_t seed = 0;
};

// Mean F1-macro of a logistic regression fit on stratified subsamples.
double eval_classification(const std::vector<LabeledExample>& train,
                           const EmbeddingStore& train_emb,
                           const std::vector<LabeledExample>& test,
                           const EmbeddingStore& test_emb, const ClassificationProtocol& protocol);

struct MultilabelProtocol {
    int n_experiments = 10;
    std::vector<int> per_label_samples = {8, 16, 32, 64, 128};
    int k = 5;
    std::uint64_t seed = 0;
};

// Mean F1-macro of a cosine k-NN with per-label majority voting, trained on
// per-label downsamples.
double eval_multilabel(const std::vector<LabeledExample>& train, const EmbeddingStore& train_emb,
                       const std::vector<LabeledExample>& test, const EmbeddingStore& test_emb,
                       const MultilabelProtocol& protocol);

struct LabeledPair {
    std::string id_a;
    std::string id_b;
    int label = 0;  // binary for pair classification
    double gold = 0.0;  // continuous for sts
};

// Max average precision over the cosine, dot, negative-Euclidean and
// negative-Manhattan similarity channels.
double eval_pair_classification(const EmbeddingStore& emb, const std::vector<LabeledPair>& pairs);

struct ClusteringProtocol {
    int n_restarts = 10;
    int max_iter = 300;
    int n_repetitions = 5;
    std::uint64_t seed = 0;
};

// K-means with k = number of gold labels; V-measure against gold, averaged
// over seeded repetitions.
double eval_clustering(const EmbeddingStore& emb,
                       const std::vector<std::pair<std::string, std::string>>& gold_labels,
                       const ClusteringProtocol& protocol, ExecPolicy policy = ExecPolicy::serial);

// Spearman correlation between pairwise cosine similarity and gold scores.
double eval_sts(const EmbeddingStore& emb, const std::vector<LabeledPair>& pairs);

}  // namespace embedforge
