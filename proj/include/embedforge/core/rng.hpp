#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace embedforge {

// Deterministic seeded stream. std::mt19937_64 output is pinned by the
// standard, and all derived draws below use our own mappings, so sequences
// are reproducible across compilers and platforms. Never use the
// distribution classes from <random> on top of this: their output is
// implementation-defined.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, n). Rejection sampling, unbiased.
    std::uint64_t below(std::uint64_t n);

    // Uniform in [0, 1) with 53-bit resolution.
    double real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return real01() < p; }

    // Standard normal via Box-Muller (the cached second value is dropped so
    // the stream advances a fixed two draws per call).
    double gaussian();

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[static_cast<std::size_t>(below(items.size()))];
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // First k elements of a uniform without-replacement draw from [0, n).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

// Derives an independent child seed, e.g. one stream per parallel worker or
// per named substream of a campaign.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);
std::uint64_t derive_seed(std::uint64_t master, const std::string& tag);

}  // namespace embedforge
