#pragma once

#include <map>
#include <string>

namespace embedforge {

// BEIR-style trio: corpus.jsonl, queries.jsonl, qrels.tsv.
struct RetrievalCollection {
    std::map<std::string, std::string> corpus;   // doc id -> text (title folded in)
    std::map<std::string, std::string> queries;  // query id -> text
    // query id -> (doc id -> grade >= 0); every referenced id must exist.
    std::map<std::string, std::map<std::string, int>> qrels;
};

RetrievalCollection load_retrieval_collection(const std::string& dir);

void save_retrieval_collection(const std::string& dir, const RetrievalCollection& coll);

// Standalone qrels reader for tooling that has no corpus at hand (e.g. the
// negative miner); no dangling-reference check.
std::map<std::string, std::map<std::string, int>> load_qrels_tsv(const std::string& path);

}  // namespace embedforge
