#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace embedforge {

// Token embedding matrix. File layout ("VMAT"): magic, LE u32 V, LE u32 d,
// token table (LE u32 count, then per token LE u32 byte length + UTF-8
// bytes), then V*d LE float32 row-major.
struct EmbeddingMatrix {
    std::uint32_t vocab_size = 0;
    std::uint32_t dim = 0;
    std::vector<std::string> tokens;  // row index -> token, bijective
    std::vector<float> rows;          // vocab_size * dim

    const float* row(std::uint32_t index) const { return rows.data() + std::size_t(index) * dim; }
};

using TokenStats = std::map<std::string, std::uint64_t>;

EmbeddingMatrix read_embedding_matrix(const std::string& path);
void write_embedding_matrix(const std::string& path, const EmbeddingMatrix& mat);

// TSV: token <tab> count.
TokenStats load_token_stats(const std::string& path);

struct TrimResult {
    EmbeddingMatrix matrix;
    std::map<std::uint32_t, std::uint32_t> id_map;  // old row -> new row
};

// Keeps the specials plus the top (target - |specials|) tokens by corpus
// count, ties broken by ascending original index. Kept rows are bit-exact
// copies, ordered specials first (in the order given) then by original
// index. Tokens absent from stats count as zero.
TrimResult trim_vocabulary(const EmbeddingMatrix& mat, const TokenStats& stats,
                           std::uint32_t target, const std::vector<std::string>& specials);

// Fraction of total parameters removed by dropping (old_v - new_v) rows of
// width dim.
double reduction_ratio(std::uint64_t old_v, std::uint64_t new_v, std::uint64_t dim,
                       std::uint64_t total_params);

void save_id_map(const std::string& path, const std::map<std::uint32_t, std::uint32_t>& id_map);

}  // namespace embedforge
