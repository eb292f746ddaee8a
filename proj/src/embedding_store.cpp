#include "embedforge/dataset/embedding_store.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "embedforge/core/error.hpp"
#include "embedforge/core/jsonl.hpp"

namespace embedforge {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

template <typename T>
void write_le(std::ofstream& out, T value) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!in) throw Error(ErrorKind::CorruptHeader, "truncated file");
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        value |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    return static_cast<T>(value);
}

}  // namespace

const std::vector<float>& EmbeddingStore::at(const std::string& id) const {
    auto it = entries.find(id);
    if (it == entries.end()) throw Error(ErrorKind::MissingEmbedding, id);
    return it->second;
}

void validate_store(const EmbeddingStore& store) {
    if (store.dim == 0) throw Error(ErrorKind::DimensionMismatch, "dim must be positive");
    for (const auto& [id, vec] : store.entries) {
        if (vec.size() != store.dim) {
            throw Error(ErrorKind::DimensionMismatch,
                        id + ": " + std::to_string(vec.size()) + " components, expected " +
                            std::to_string(store.dim));
        }
        for (float v : vec) {
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::SchemaViolation, id + ": non-finite component");
            }
        }
    }
}

void write_embedding_store_packed(const std::string& path, const EmbeddingStore& store) {
    validate_store(store);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::FileMissing, "cannot open for write: " + path);
    out.write(kMagic, 4);
    write_le<std::uint32_t>(out, store.dim);
    write_le<std::uint64_t>(out, store.entries.size());
    for (const auto& [id, vec] : store.entries) {
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
        for (float v : vec) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            write_le<std::uint32_t>(out, bits);
        }
    }
}

void write_embedding_store_jsonl(const std::string& path, const EmbeddingStore& store) {
    validate_store(store);
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::FileMissing, "cannot open for write: " + path);
    for (const auto& [id, vec] : store.entries) {
        json obj;
        obj["id"] = id;
        obj["v"] = vec;
        out << obj.dump() << "\n";
    }
}

namespace {

EmbeddingStore read_packed(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::FileMissing, path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw Error(ErrorKind::CorruptHeader, path + ": bad magic");
    }
    EmbeddingStore store;
    store.dim = read_le<std::uint32_t>(in);
    if (store.dim == 0) throw Error(ErrorKind::CorruptHeader, path + ": zero dimension");
    const std::uint64_t count = read_le<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint32_t id_len = read_le<std::uint32_t>(in);
        std::string id(id_len, '\0');
        in.read(id.data(), id_len);
        if (!in) throw Error(ErrorKind::CorruptHeader, path + ": truncated id");
        std::vector<float> vec(store.dim);
        for (std::uint32_t d = 0; d < store.dim; ++d) {
            const std::uint32_t bits = read_le<std::uint32_t>(in);
            float v;
            std::memcpy(&v, &bits, 4);
            vec[d] = v;
        }
        store.entries[id] = std::move(vec);
    }
    validate_store(store);
    return store;
}

EmbeddingStore read_jsonl(const std::string& path) {
    EmbeddingStore store;
    for_each_line(path, [&](std::size_t lineno, const std::string& line) {
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error&) {
            throw Error(ErrorKind::SchemaViolation,
                        path + " line " + std::to_string(lineno) + ": invalid JSON");
        }
        if (!obj.contains("id") || !obj["id"].is_string() || !obj.contains("v") ||
            !obj["v"].is_array()) {
            throw Error(ErrorKind::SchemaViolation,
                        path + " line " + std::to_string(lineno) + ": expected {id, v}");
        }
        std::vector<float> vec;
        vec.reserve(obj["v"].size());
        for (const auto& x : obj["v"]) {
            if (!x.is_number()) {
                throw Error(ErrorKind::SchemaViolation,
                            path + " line " + std::to_string(lineno) + ": non-numeric component");
            }
            vec.push_back(x.get<float>());
        }
        if (store.dim == 0) {
            store.dim = static_cast<std::uint32_t>(vec.size());
        }
        if (vec.size() != store.dim) {
            throw Error(ErrorKind::DimensionMismatch,
                        path + " line " + std::to_string(lineno) + ": " +
                            std::to_string(vec.size()) + " components, expected " +
                            std::to_string(store.dim));
        }
        store.entries[obj["id"].get<std::string>()] = std::move(vec);
    });
    validate_store(store);
    return store;
}

}  // namespace

EmbeddingStore read_embedding_store(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw Error(ErrorKind::FileMissing, path);
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, 4);
    probe.close();
    if (std::memcmp(magic, kMagic, 4) == 0) return read_packed(path);
    return read_jsonl(path);
}

}  // namespace embedforge
