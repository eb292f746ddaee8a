#include "embedforge/surgery/vocab_surgeon.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "embedforge/core/error.hpp"
#include "embedforge/core/jsonl.hpp"
#include "embedforge/core/text.hpp"

namespace embedforge {

namespace {

constexpr char kMagic[4] = {'V', 'M', 'A', 'T'};

void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v & 0xff),
                            static_cast<unsigned char>((v >> 8) & 0xff),
                            static_cast<unsigned char>((v >> 16) & 0xff),
                            static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t read_u32(std::ifstream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw Error(ErrorKind::CorruptHeader, "truncated matrix file");
    return static_cast<std::uint32_t>(buf[0]) | (static_cast<std::uint32_t>(buf[1]) << 8) |
           (static_cast<std::uint32_t>(buf[2]) << 16) | (static_cast<std::uint32_t>(buf[3]) << 24);
}

void validate_matrix(const EmbeddingMatrix& mat) {
    if (mat.tokens.size() != mat.vocab_size) {
        throw Error(ErrorKind::CorruptHeader, "token table size does not match vocab size");
    }
    if (mat.rows.size() != std::size_t(mat.vocab_size) * mat.dim) {
        throw Error(ErrorKind::CorruptHeader, "row data size does not match header");
    }
    std::set<std::string> seen;
    for (const auto& tok : mat.tokens) {
        if (!seen.insert(tok).second) {
            throw Error(ErrorKind::SchemaViolation, "duplicate token '" + tok + "'");
        }
    }
    for (float v : mat.rows) {
        if (!std::isfinite(v)) throw Error(ErrorKind::SchemaViolation, "non-finite matrix entry");
    }
}

}  // namespace

EmbeddingMatrix read_embedding_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::FileMissing, path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw Error(ErrorKind::CorruptHeader, path + ": bad magic");
    }
    EmbeddingMatrix mat;
    mat.vocab_size = read_u32(in);
    mat.dim = read_u32(in);
    const std::uint32_t count = read_u32(in);
    if (count != mat.vocab_size) {
        throw Error(ErrorKind::CorruptHeader, path + ": token table count mismatch");
    }
    mat.tokens.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t len = read_u32(in);
        std::string tok(len, '\0');
        in.read(tok.data(), len);
        if (!in) throw Error(ErrorKind::CorruptHeader, path + ": truncated token table");
        mat.tokens[i] = std::move(tok);
    }
    mat.rows.resize(std::size_t(mat.vocab_size) * mat.dim);
    for (auto& v : mat.rows) {
        const std::uint32_t bits = read_u32(in);
        float f;
        std::memcpy(&f, &bits, 4);
        v = f;
    }
    validate_matrix(mat);
    return mat;
}

void write_embedding_matrix(const std::string& path, const EmbeddingMatrix& mat) {
    validate_matrix(mat);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::FileMissing, "cannot open for write: " + path);
    out.write(kMagic, 4);
    write_u32(out, mat.vocab_size);
    write_u32(out, mat.dim);
    write_u32(out, static_cast<std::uint32_t>(mat.tokens.size()));
    for (const auto& tok : mat.tokens) {
        write_u32(out, static_cast<std::uint32_t>(tok.size()));
        out.write(tok.data(), static_cast<std::streamsize>(tok.size()));
    }
    for (float v : mat.rows) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        write_u32(out, bits);
    }
}

TokenStats load_token_stats(const std::string& path) {
    TokenStats stats;
    for_each_line(path, [&](std::size_t lineno, const std::string& line) {
        std::istringstream row(line);
        std::string token, count_str;
        if (!std::getline(row, token, '\t') || !std::getline(row, count_str, '\t')) {
            throw Error(ErrorKind::SchemaViolation,
                        path + " line " + std::to_string(lineno) + ": expected token<TAB>count");
        }
        try {
            const long long count = std::stoll(trim(count_str));
            if (count < 0) throw std::invalid_argument("negative");
            stats[token] = static_cast<std::uint64_t>(count);
        } catch (const std::exception&) {
            throw Error(ErrorKind::SchemaViolation,
                        path + " line " + std::to_string(lineno) + ": bad count");
        }
    });
    return stats;
}

TrimResult trim_vocabulary(const EmbeddingMatrix& mat, const TokenStats& stats,
                           std::uint32_t target, const std::vector<std::string>& specials) {
    validate_matrix(mat);
    if (target < specials.size()) {
        throw Error(ErrorKind::TargetTooSmall,
                    "target " + std::to_string(target) + " below " +
                        std::to_string(specials.size()) + " specials");
    }
    if (target > mat.vocab_size) {
        throw Error(ErrorKind::TargetTooSmall, "target exceeds vocabulary size");
    }

    std::map<std::string, std::uint32_t> index_of;
    for (std::uint32_t i = 0; i < mat.vocab_size; ++i) index_of[mat.tokens[i]] = i;

    std::vector<std::uint32_t> special_rows;
    std::set<std::uint32_t> special_set;
    for (const auto& s : specials) {
        auto it = index_of.find(s);
        if (it == index_of.end()) throw Error(ErrorKind::UnknownSpecial, s);
        if (special_set.insert(it->second).second) special_rows.push_back(it->second);
    }

    // Rank non-special rows by count desc, original index asc.
    std::vector<std::uint32_t> candidates;
    for (std::uint32_t i = 0; i < mat.vocab_size; ++i) {
        if (!special_set.count(i)) candidates.push_back(i);
    }
    auto count_of = [&](std::uint32_t row) -> std::uint64_t {
        auto it = stats.find(mat.tokens[row]);
        return it == stats.end() ? 0 : it->second;
    };
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                         const auto ca = count_of(a);
                         const auto cb = count_of(b);
                         if (ca != cb) return ca > cb;
                         return a < b;
                     });
    const std::size_t n_top = target - special_rows.size();
    std::vector<std::uint32_t> top(candidates.begin(),
                                   candidates.begin() + static_cast<std::ptrdiff_t>(n_top));
    std::sort(top.begin(), top.end());  // kept non-specials stay in original order

    std::vector<std::uint32_t> kept = special_rows;
    kept.insert(kept.end(), top.begin(), top.end());

    TrimResult result;
    result.matrix.vocab_size = static_cast<std::uint32_t>(kept.size());
    result.matrix.dim = mat.dim;
    result.matrix.tokens.reserve(kept.size());
    result.matrix.rows.reserve(kept.size() * mat.dim);
    for (std::uint32_t new_idx = 0; new_idx < kept.size(); ++new_idx) {
        const std::uint32_t old_idx = kept[new_idx];
        result.matrix.tokens.push_back(mat.tokens[old_idx]);
        const float* src = mat.row(old_idx);
        result.matrix.rows.insert(result.matrix.rows.end(), src, src + mat.dim);
        result.id_map[old_idx] = new_idx;
    }
    return result;
}

double reduction_ratio(std::uint64_t old_v, std::uint64_t new_v, std::uint64_t dim,
                       std::uint64_t total_params) {
    if (new_v > old_v || dim == 0 || total_params == 0) {
        throw Error(ErrorKind::InvalidCounts, "need new_v <= old_v, dim > 0, total > 0");
    }
    const std::uint64_t removed = (old_v - new_v) * dim;
    if (total_params <= removed) {
        throw Error(ErrorKind::InvalidCounts, "total parameters must exceed removed parameters");
    }
    return static_cast<double>(removed) / static_cast<double>(total_params);
}

void save_id_map(const std::string& path, const std::map<std::uint32_t, std::uint32_t>& id_map) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::FileMissing, "cannot open for write: " + path);
    json obj = json::object();
    for (const auto& [old_idx, new_idx] : id_map) {
        obj[std::to_string(old_idx)] = new_idx;
    }
    out << obj.dump(2) << "\n";
}

}  // namespace embedforge
