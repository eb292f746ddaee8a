#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "embedforge/cli/cli_app.hpp"
#include "embedforge/core/jsonl.hpp"
#include "embedforge/dataset/embedding_store.hpp"
#include "embedforge/dataset/retrieval.hpp"
#include "embedforge/eval/aggregate.hpp"
#include "embedforge/surgery/vocab_surgeon.hpp"
#include "embedforge/training/toy_trainer.hpp"
#include "test_support.hpp"

using namespace embedforge;
using testsupport::TempDir;
using testsupport::fixture;
using testsupport::write_file;

namespace {

std::size_t line_count(const std::string& path) {
    std::size_t n = 0;
    for_each_line(path, [&](std::size_t, const std::string&) { ++n; });
    return n;
}

}  // namespace

TEST_CASE("unknown subcommand exits 2 with usage text") {
    CHECK(run_cli({"frobnicate"}) == 2);
    CHECK(run_cli({}) == 2);
}

TEST_CASE("fit-topics then gen-prompts produces renderable prompt records") {
    TempDir tmp("cli_topics");
    write_file(tmp.path("queries.jsonl"),
               R"({"query":"a","labels":[["Sport",0.9],["Voetbal",0.5]]})" "\n"
               R"({"query":"b","labels":[["Sport",0.8]]})" "\n"
               R"({"query":"c","labels":[["Nieuws",0.7],["Politiek",0.6]]})" "\n");
    CHECK(run_cli({"fit-topics", "--in", tmp.path("queries.jsonl"), "--out",
                   tmp.path("dist.json")}) == 0);
    CHECK(std::filesystem::exists(tmp.path("dist.json")));
    CHECK(std::filesystem::exists(tmp.path("dist.json") + ".manifest.json"));

    CHECK(run_cli({"gen-prompts", "--dist", tmp.path("dist.json"), "--category", "sts", "--count",
                   "5", "--seed", "3", "--out", tmp.path("prompts.jsonl")}) == 0);
    CHECK(line_count(tmp.path("prompts.jsonl")) == 5);
    for_each_line(tmp.path("prompts.jsonl"), [](std::size_t, const std::string& line) {
        const json obj = json::parse(line);
        CHECK(obj.at("prompt").get<std::string>().find("{") == std::string::npos);
        CHECK(obj.contains("tier"));
    });
}

TEST_CASE("filter subcommand writes the kept file with the in-margin lines") {
    TempDir tmp("cli_filter");
    // 10 scored triplets, 7 inside the margin.
    std::string triplets;
    std::string scores;
    for (int i = 0; i < 10; ++i) {
        triplets += json{{"id", "t" + std::to_string(i)},
                         {"user-query", "vraag " + std::to_string(i)},
                         {"positive-document", "document"},
                         {"hard-negative-document", "afleiding"}}
                        .dump() +
                    "\n";
        double s_pos = 0.8;
        double s_neg = 0.4;          // margin 0.4: kept
        if (i == 0) s_neg = 0.9;     // non-positive margin
        if (i == 1) s_pos = 0.995, s_neg = 0.0;  // margin >= C
        if (i == 2) s_neg = 0.8;     // margin exactly 0
        scores += json{{"id", "t" + std::to_string(i)}, {"s_pos", s_pos}, {"s_neg", s_neg}}.dump() +
                  "\n";
    }
    write_file(tmp.path("trips.jsonl"), triplets);
    write_file(tmp.path("scores.jsonl"), scores);
    CHECK(run_cli({"filter", "--in", tmp.path("trips.jsonl"), "--scores", tmp.path("scores.jsonl"),
                   "--c", "0.96", "--kept", tmp.path("kept.jsonl"), "--rejected",
                   tmp.path("rejected.jsonl")}) == 0);
    CHECK(line_count(tmp.path("kept.jsonl")) == 7);
    CHECK(line_count(tmp.path("rejected.jsonl")) == 3);
}

TEST_CASE("mine-negatives runs end to end on files") {
    TempDir tmp("cli_mine");
    write_file(tmp.path("run.tsv"),
               "q1\tdpos\t0.9\nq1\ta\t0.85\nq1\tb\t0.7\nq1\tc\t0.5\n");
    write_file(tmp.path("qrels.tsv"), "q1\tdpos\t1\n");
    CHECK(run_cli({"mine-negatives", "--run", tmp.path("run.tsv"), "--qrels", tmp.path("qrels.tsv"),
                   "--out", tmp.path("mined.jsonl"), "--seed", "5"}) == 0);
    CHECK(line_count(tmp.path("mined.jsonl")) == 1);
}

TEST_CASE("build-batches plans from an inline-count TOML mix") {
    TempDir tmp("cli_mix");
    write_file(tmp.path("mix.toml"), R"(
[[source]]
name = "mmarco"
category = "short-long"
count = 300

[[source]]
name = "syn-cls"
category = "long-short"
synthetic = true
count = 200
)");
    CHECK(run_cli({"build-batches", "--mix", tmp.path("mix.toml"), "--batch-size", "100", "--seed",
                   "2", "--out", tmp.path("plan.jsonl")}) == 0);
    CHECK(line_count(tmp.path("plan.jsonl")) == 5);
    std::size_t cls_batches = 0;
    for_each_line(tmp.path("plan.jsonl"), [&](std::size_t, const std::string& line) {
        const json obj = json::parse(line);
        if (obj.at("source") == "syn-cls") {
            ++cls_batches;
            CHECK(obj.at("in_batch_negatives").get<bool>() == false);
        } else {
            CHECK(obj.at("in_batch_negatives").get<bool>() == true);
        }
    });
    CHECK(cls_batches == 2);
}

TEST_CASE("offline subcommands are byte-reproducible for a fixed seed") {
    TempDir tmp("cli_repro");
    write_file(tmp.path("mix.toml"), "[[source]]\nname = \"a\"\ncount = 64\n");
    auto run_once = [&](const std::string& out) {
        CHECK(run_cli({"build-batches", "--mix", tmp.path("mix.toml"), "--batch-size", "16",
                       "--seed", "9", "--out", tmp.path(out)}) == 0);
        std::ifstream in(tmp.path(out));
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    CHECK(run_once("p1.jsonl") == run_once("p2.jsonl"));
}

TEST_CASE("train-toy writes weights and a loss curve") {
    TempDir tmp("cli_toy");
    CHECK(run_cli({"train-toy", "--synthetic", "--batch-size", "16", "--epochs", "1", "--lr",
                   "0.5", "--hash-dim", "512", "--embed-dim", "16", "--seed", "4",
                   "--out-weights", tmp.path("w.vmat"), "--out-curve", tmp.path("c.csv")}) == 0);
    const auto mat = read_embedding_matrix(tmp.path("w.vmat"));
    CHECK(mat.vocab_size == 512);
    CHECK(mat.dim == 16);
    CHECK(line_count(tmp.path("c.csv")) >= 2);
}

TEST_CASE("trim-vocab trims a matrix from files") {
    TempDir tmp("cli_trim");
    EmbeddingMatrix mat;
    mat.vocab_size = 4;
    mat.dim = 2;
    mat.tokens = {"<pad>", "de", "het", "zeldzaam"};
    mat.rows = {0, 0, 1, 1, 2, 2, 3, 3};
    write_embedding_matrix(tmp.path("m.vmat"), mat);
    write_file(tmp.path("stats.tsv"), "de\t100\nhet\t60\nzeldzaam\t1\n");
    CHECK(run_cli({"trim-vocab", "--matrix", tmp.path("m.vmat"), "--stats", tmp.path("stats.tsv"),
                   "--target", "3", "--specials", "<pad>", "--out", tmp.path("out.vmat"),
                   "--id-map", tmp.path("map.json")}) == 0);
    const auto trimmed = read_embedding_matrix(tmp.path("out.vmat"));
    CHECK(trimmed.tokens == std::vector<std::string>{"<pad>", "de", "het"});
}

TEST_CASE("evaluate with a tasks.toml manifest emits a report with the averages") {
    TempDir tmp("cli_eval");
    // Retrieval dataset where the trained embedding ranks perfectly.
    std::filesystem::create_directories(tmp.path("data/toyret"));
    std::filesystem::create_directories(tmp.path("emb/toyret"));
    RetrievalCollection coll;
    coll.corpus = {{"d1", "een"}, {"d2", "twee"}};
    coll.queries = {{"q1", "vraag"}};
    coll.qrels = {{"q1", {{"d1", 1}}}};
    save_retrieval_collection(tmp.path("data/toyret"), coll);
    EmbeddingStore docs;
    docs.dim = 2;
    docs.entries = {{"d1", {1.0f, 0.0f}}, {"d2", {0.0f, 1.0f}}};
    write_embedding_store_packed(tmp.path("emb/toyret/corpus.emb"), docs);
    EmbeddingStore queries;
    queries.dim = 2;
    queries.entries = {{"q1", {0.9f, 0.1f}}};
    write_embedding_store_packed(tmp.path("emb/toyret/queries.emb"), queries);

    // STS dataset over three id pairs.
    std::filesystem::create_directories(tmp.path("data/toysts"));
    std::filesystem::create_directories(tmp.path("emb/toysts"));
    EmbeddingStore sts;
    sts.dim = 2;
    sts.entries = {{"a", {1.0f, 0.0f}},
                   {"b", {0.95f, 0.3f}},
                   {"c", {0.5f, 0.8f}},
                   {"d", {0.0f, 1.0f}}};
    write_embedding_store_packed(tmp.path("emb/toysts/pairs.emb"), sts);
    write_file(tmp.path("data/toysts/pairs.jsonl"),
               R"({"id_a":"a","id_b":"b","score":5.0})" "\n"
               R"({"id_a":"a","id_b":"c","score":3.0})" "\n"
               R"({"id_a":"a","id_b":"d","score":1.0})" "\n");

    write_file(tmp.path("tasks.toml"),
               "[[task]]\ndataset = \"toyret\"\ntype = \"retrieval\"\ndir = \"" +
                   tmp.path("data/toyret") + "\"\n\n[[task]]\ndataset = \"toysts\"\ntype = "
                   "\"sts\"\ndir = \"" + tmp.path("data/toysts") + "\"\n");

    CHECK(run_cli({"evaluate", "--manifest", tmp.path("tasks.toml"), "--emb", tmp.path("emb"),
                   "--out", tmp.path("report.json")}) == 0);
    const auto report = load_report(tmp.path("report.json"));
    CHECK(report.datasets.size() == 2);
    CHECK(report.avg_d == doctest::Approx(100.0));
    CHECK(report.avg_t == doctest::Approx(100.0));

    CHECK(run_cli({"report", "--in", tmp.path("report.json"), "--model", "toy", "--out",
                   tmp.path("table.md")}) == 0);
    std::ifstream md(tmp.path("table.md"));
    std::string text((std::istreambuf_iterator<char>(md)), std::istreambuf_iterator<char>());
    CHECK(text.find("| toy |") != std::string::npos);
    CHECK(text.find("AvgD") != std::string::npos);
}

TEST_CASE("domain errors exit 1") {
    CHECK(run_cli({"fit-topics", "--in", "/nonexistent.jsonl", "--out", "/tmp/x.json"}) == 1);
}

TEST_CASE("run manifests record input and output hashes") {
    TempDir tmp("cli_manifest");
    write_file(tmp.path("mix.toml"), "[[source]]\nname = \"a\"\ncount = 32\n");
    CHECK(run_cli({"build-batches", "--mix", tmp.path("mix.toml"), "--batch-size", "16", "--out",
                   tmp.path("plan.jsonl")}) == 0);
    std::ifstream in(tmp.path("plan.jsonl") + ".manifest.json");
    REQUIRE(in.good());
    const json manifest = json::parse(in);
    CHECK(manifest.at("subcommand") == "build-batches");
    CHECK(manifest.at("inputs").size() == 1);
    CHECK(manifest.at("outputs").size() == 1);
    for (const auto& [path, hash] : manifest.at("outputs").items()) {
        (void)path;
        CHECK(hash.get<std::string>().size() == 64);
    }
}
