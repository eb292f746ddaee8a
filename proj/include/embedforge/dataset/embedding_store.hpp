#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace embedforge {

// Immutable after load. Packed file layout: magic "EMB1", LE u32 dim,
// LE u64 count, then per entry LE u32 id-byte-length, id bytes, dim f32.
// Canonical JSONL alternative: one {"id": str, "v": [floats]} per line.
struct EmbeddingStore {
    std::uint32_t dim = 0;
    std::map<std::string, std::vector<float>> entries;

    const std::vector<float>& at(const std::string& id) const;
    bool contains(const std::string& id) const { return entries.count(id) > 0; }
    std::size_t size() const { return entries.size(); }
};

// Validates dimension and finiteness invariants; throws on violation.
void validate_store(const EmbeddingStore& store);

// Auto-detects packed vs canonical JSONL by the magic bytes.
EmbeddingStore read_embedding_store(const std::string& path);

void write_embedding_store_packed(const std::string& path, const EmbeddingStore& store);
void write_embedding_store_jsonl(const std::string& path, const EmbeddingStore& store);

}  // namespace embedforge
