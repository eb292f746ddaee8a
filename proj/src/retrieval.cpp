#include "embedforge/dataset/retrieval.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "embedforge/core/error.hpp"
#include "embedforge/core/jsonl.hpp"
#include "embedforge/core/text.hpp"

namespace embedforge {

namespace {

std::string require_string(const json& obj, const char* key, std::size_t lineno,
                           const std::string& file) {
    if (!obj.contains(key) || !obj[key].is_string()) {
        throw Error(ErrorKind::SchemaViolation,
                    file + " line " + std::to_string(lineno) + ": missing key " + key);
    }
    return nfc_normalize(obj[key].get<std::string>());
}

}  // namespace

RetrievalCollection load_retrieval_collection(const std::string& dir) {
    namespace fs = std::filesystem;
    const std::string corpus_path = (fs::path(dir) / "corpus.jsonl").string();
    const std::string queries_path = (fs::path(dir) / "queries.jsonl").string();
    const std::string qrels_path = (fs::path(dir) / "qrels.tsv").string();

    RetrievalCollection coll;

    for_each_line(corpus_path, [&](std::size_t lineno, const std::string& line) {
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error&) {
            throw Error(ErrorKind::SchemaViolation,
                        "corpus.jsonl line " + std::to_string(lineno) + ": invalid JSON");
        }
        std::string id = require_string(obj, "_id", lineno, "corpus.jsonl");
        std::string text = require_string(obj, "text", lineno, "corpus.jsonl");
        if (obj.contains("title") && obj["title"].is_string()) {
            std::string title = nfc_normalize(obj["title"].get<std::string>());
            if (!title.empty()) text = title + "\n" + text;
        }
        coll.corpus[id] = std::move(text);
    });

    for_each_line(queries_path, [&](std::size_t lineno, const std::string& line) {
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error&) {
            throw Error(ErrorKind::SchemaViolation,
                        "queries.jsonl line " + std::to_string(lineno) + ": invalid JSON");
        }
        std::string id = require_string(obj, "_id", lineno, "queries.jsonl");
        coll.queries[id] = require_string(obj, "text", lineno, "queries.jsonl");
    });

    for_each_line(qrels_path, [&](std::size_t lineno, const std::string& line) {
        std::istringstream row(line);
        std::string qid, did, grade_str;
        if (!std::getline(row, qid, '\t') || !std::getline(row, did, '\t') ||
            !std::getline(row, grade_str, '\t')) {
            throw Error(ErrorKind::SchemaViolation,
                        "qrels.tsv line " + std::to_string(lineno) + ": expected 3 tab-separated fields");
        }
        int grade = 0;
        try {
            std::size_t used = 0;
            grade = std::stoi(trim(grade_str), &used);
            if (used != trim(grade_str).size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw Error(ErrorKind::SchemaViolation,
                        "qrels.tsv line " + std::to_string(lineno) + ": non-integer grade");
        }
        if (grade < 0) {
            throw Error(ErrorKind::SchemaViolation,
                        "qrels.tsv line " + std::to_string(lineno) + ": negative grade");
        }
        if (!coll.queries.count(qid)) throw Error(ErrorKind::DanglingReference, qid);
        if (!coll.corpus.count(did)) throw Error(ErrorKind::DanglingReference, did);
        coll.qrels[qid][did] = grade;
    });

    return coll;
}

std::map<std::string, std::map<std::string, int>> load_qrels_tsv(const std::string& path) {
    std::map<std::string, std::map<std::string, int>> qrels;
    for_each_line(path, [&](std::size_t lineno, const std::string& line) {
        std::istringstream row(line);
        std::string qid, did, grade_str;
        if (!std::getline(row, qid, '\t') || !std::getline(row, did, '\t') ||
            !std::getline(row, grade_str, '\t')) {
            throw Error(ErrorKind::SchemaViolation,
                        path + " line " + std::to_string(lineno) + ": expected 3 tab-separated fields");
        }
        try {
            const int grade = std::stoi(trim(grade_str));
            if (grade < 0) throw std::invalid_argument("negative");
            qrels[qid][did] = grade;
        } catch (const std::exception&) {
            throw Error(ErrorKind::SchemaViolation,
                        path + " line " + std::to_string(lineno) + ": bad grade");
        }
    });
    return qrels;
}

void save_retrieval_collection(const std::string& dir, const RetrievalCollection& coll) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "corpus.jsonl");
        for (const auto& [id, text] : coll.corpus) {
            out << json{{"_id", id}, {"text", text}}.dump() << "\n";
        }
    }
    {
        std::ofstream out(fs::path(dir) / "queries.jsonl");
        for (const auto& [id, text] : coll.queries) {
            out << json{{"_id", id}, {"text", text}}.dump() << "\n";
        }
    }
    {
        std::ofstream out(fs::path(dir) / "qrels.tsv");
        for (const auto& [qid, docs] : coll.qrels) {
            for (const auto& [did, grade] : docs) {
                out << qid << "\t" << did << "\t" << grade << "\n";
            }
        }
    }
}

}  // namespace embedforge
