#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embedforge/core/parallel.hpp"

namespace embedforge {

struct TrainingConfig {
    int batch_size = 1024;
    double temperature = 0.05;
    double learning_rate = 2e-6;
    double warmup_ratio = 0.25;
    int epochs = 1;
    std::string scheduler = "constant";
    std::uint64_t seed = 0;

    void validate() const;
};

struct SourceSpec {
    std::string name;
    std::size_t count = 0;
    // The classification subset of the synthetic data trains without
    // in-batch negatives: its label space is too small for them.
    bool synthetic_classification = false;
};

// Source-homogeneous batch: item indices into the source's triplet list.
struct Batch {
    std::string source;
    std::vector<std::size_t> items;
    bool in_batch_negatives_enabled = true;
};

// Shuffles each source independently, chunks into floor(n / batch_size)
// full batches (trailing partial dropped), then shuffles the batch order
// across sources. Per-source streams derive from the source name, so the
// plan is independent of manifest ordering.
std::vector<Batch> build_epoch(const std::vector<SourceSpec>& mix, const TrainingConfig& cfg);

struct InfoNceResult {
    double loss = 0.0;
    std::vector<std::vector<double>> grad;  // same shape as sims
};

// Mean over queries of -log softmax(sims / tau) at the positive index,
// computed with max subtraction. Gradient is analytic; each row sums to 0.
InfoNceResult infonce_loss(const std::vector<std::vector<double>>& sims,
                           const std::vector<std::size_t>& labels, double tau,
                           ExecPolicy policy = ExecPolicy::serial);

}  // namespace embedforge
