#include "embedforge/training/batch_builder.hpp"

#include <algorithm>
#include <cmath>

#include "embedforge/core/error.hpp"
#include "embedforge/core/rng.hpp"

namespace embedforge {

void TrainingConfig::validate() const {
    if (batch_size < 2) throw Error(ErrorKind::ConfigError, "batch_size must be >= 2");
    if (!(temperature > 0.0)) throw Error(ErrorKind::ConfigError, "temperature must be positive");
    if (!(learning_rate >= 0.0)) throw Error(ErrorKind::ConfigError, "learning_rate must be >= 0");
    if (warmup_ratio < 0.0 || warmup_ratio > 1.0) {
        throw Error(ErrorKind::ConfigError, "warmup_ratio must lie in [0,1]");
    }
    if (epochs < 1) throw Error(ErrorKind::ConfigError, "epochs must be >= 1");
    if (scheduler != "constant") {
        throw Error(ErrorKind::ConfigError, "unknown scheduler '" + scheduler + "'");
    }
}

std::vector<Batch> build_epoch(const std::vector<SourceSpec>& mix, const TrainingConfig& cfg) {
    cfg.validate();
    const std::size_t batch_size = static_cast<std::size_t>(cfg.batch_size);

    // Stable order regardless of manifest ordering.
    std::vector<const SourceSpec*> sources;
    for (const auto& s : mix) sources.push_back(&s);
    std::sort(sources.begin(), sources.end(),
              [](const SourceSpec* a, const SourceSpec* b) { return a->name < b->name; });

    std::vector<Batch> batches;
    for (const SourceSpec* src : sources) {
        const std::size_t full = src->count / batch_size;
        if (full == 0) continue;  // source too small, contributes nothing this epoch
        std::vector<std::size_t> order(src->count);
        for (std::size_t i = 0; i < src->count; ++i) order[i] = i;
        RngStream stream(derive_seed(cfg.seed, "shuffle:" + src->name));
        stream.shuffle(order);
        for (std::size_t b = 0; b < full; ++b) {
            Batch batch;
            batch.source = src->name;
            batch.in_batch_negatives_enabled = !src->synthetic_classification;
            batch.items.assign(order.begin() + static_cast<std::ptrdiff_t>(b * batch_size),
                               order.begin() + static_cast<std::ptrdiff_t>((b + 1) * batch_size));
            batches.push_back(std::move(batch));
        }
    }

    RngStream order_stream(derive_seed(cfg.seed, "batch-order"));
    order_stream.shuffle(batches);
    return batches;
}

InfoNceResult infonce_loss(const std::vector<std::vector<double>>& sims,
                           const std::vector<std::size_t>& labels, double tau,
                           ExecPolicy policy) {
    if (sims.empty()) throw Error(ErrorKind::EmptyInput, "no similarity rows");
    if (labels.size() != sims.size()) {
        throw Error(ErrorKind::ConfigError, "labels/sims size mismatch");
    }
    if (!(tau > 0.0)) throw Error(ErrorKind::ConfigError, "temperature must be positive");

    const std::size_t n = sims.size();
    std::vector<double> row_loss(n, 0.0);
    std::vector<int> row_bad(n, 0);
    InfoNceResult result;
    result.grad.resize(n);

    parallel_for(policy, n, [&](std::size_t i) {
        const auto& row = sims[i];
        if (row.size() < 2 || labels[i] >= row.size()) {
            row_bad[i] = 2;
            return;
        }
        double max_sim = row[0];
        for (double s : row) {
            if (!std::isfinite(s)) {
                row_bad[i] = 1;
                return;
            }
            max_sim = std::max(max_sim, s);
        }
        double denom = 0.0;
        std::vector<double> expv(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) {
            expv[j] = std::exp((row[j] - max_sim) / tau);
            denom += expv[j];
        }
        row_loss[i] = -((row[labels[i]] - max_sim) / tau - std::log(denom));
        auto& grad = result.grad[i];
        grad.resize(row.size());
        const double scale = 1.0 / (tau * static_cast<double>(n));
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double p = expv[j] / denom;
            grad[j] = scale * (p - (j == labels[i] ? 1.0 : 0.0));
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        if (row_bad[i] == 1) throw Error(ErrorKind::NonFiniteSimilarity, "row " + std::to_string(i));
        if (row_bad[i] == 2) {
            throw Error(ErrorKind::ConfigError,
                        "row " + std::to_string(i) + " needs >= 2 candidates and a valid label");
        }
        result.loss += row_loss[i];
    }
    result.loss /= static_cast<double>(n);
    return result;
}

}  // namespace embedforge
