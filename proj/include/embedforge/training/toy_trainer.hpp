#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "embedforge/core/parallel.hpp"
#include "embedforge/dataset/embedding_store.hpp"
#include "embedforge/dataset/retrieval.hpp"
#include "embedforge/dataset/triplet.hpp"
#include "embedforge/training/batch_builder.hpp"

namespace embedforge {

// Hashing bag-of-words linear encoder: tokens hash into hash_dim buckets,
// the count vector is projected by W (hash_dim x embed_dim) and the result
// L2-normalized. Deliberately tiny; it exists to verify the training
// contract end to end, not to be a good model.
class ToyEncoder {
public:
    ToyEncoder(int hash_dim, int embed_dim, std::uint64_t seed);
    ToyEncoder() : ToyEncoder(4096, 64, 0) {}

    int hash_dim() const { return hash_dim_; }
    int embed_dim() const { return embed_dim_; }

    std::vector<double> encode(const std::string& text) const;

    std::vector<std::vector<double>> encode_batch(const std::vector<std::string>& texts,
                                                  ExecPolicy policy = ExecPolicy::serial) const;

    // Sparse bucket counts after tokenization; throws EmptyText.
    std::vector<std::pair<std::uint32_t, double>> featurize(const std::string& text) const;

    double weight(int bucket, int component) const {
        return weights_[static_cast<std::size_t>(bucket) * embed_dim_ + component];
    }
    double& weight(int bucket, int component) {
        return weights_[static_cast<std::size_t>(bucket) * embed_dim_ + component];
    }
    const std::vector<double>& weights() const { return weights_; }
    std::vector<double>& weights() { return weights_; }

    // Encodes ids -> float store, e.g. for the evaluation harness.
    EmbeddingStore embed_texts(const std::map<std::string, std::string>& texts,
                               ExecPolicy policy = ExecPolicy::serial) const;

private:
    int hash_dim_;
    int embed_dim_;
    std::vector<double> weights_;
};

struct BatchGradient {
    double loss = 0.0;
    // Sparse gradient: touched bucket -> dense embed_dim row.
    std::vector<std::pair<std::uint32_t, std::vector<double>>> rows;
};

// Loss and full weight gradient of one batch of triplets at the current
// weights. With in-batch negatives the candidate pool is every positive and
// every hard negative in the batch; without, each query sees only its own
// pair.
BatchGradient batch_loss_and_grad(const ToyEncoder& encoder, const std::vector<Triplet>& batch,
                                  double tau, bool in_batch_negatives,
                                  ExecPolicy policy = ExecPolicy::serial);

struct TrainResult {
    ToyEncoder encoder;
    std::vector<double> losses;  // one entry per processed batch
    bool diverged = false;       // loss went non-finite; encoder is the last good state
};

// Plain gradient descent with linear warm-up over warmup_ratio of the total
// steps, then a constant rate. Deterministic for a fixed config seed.
TrainResult train_toy(const std::vector<Triplet>& data, const TrainingConfig& cfg,
                      int hash_dim = 4096, int embed_dim = 64,
                      ExecPolicy policy = ExecPolicy::serial);

void save_loss_curve(const std::string& path, const std::vector<double>& losses);

// Separable synthetic retrieval task: topics with disjoint vocabularies.
// Training triplets pair same-topic queries and positives against
// other-topic negatives; the held-out collection marks all same-topic
// documents relevant.
struct ToyTask {
    std::vector<Triplet> train;
    RetrievalCollection heldout;
};

ToyTask make_separable_topic_task(int n_topics, int train_per_topic, int heldout_queries_per_topic,
                                  int docs_per_topic, std::uint64_t seed);

}  // namespace embedforge
