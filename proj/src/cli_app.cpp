#include "embedforge/cli/cli_app.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "embedforge/core/error.hpp"
#include "embedforge/core/hash.hpp"
#include "embedforge/core/jsonl.hpp"
#include "embedforge/core/toml.hpp"
#include "embedforge/dataset/embedding_store.hpp"
#include "embedforge/dataset/labeled.hpp"
#include "embedforge/dataset/retrieval.hpp"
#include "embedforge/dataset/triplet.hpp"
#include "embedforge/eval/aggregate.hpp"
#include "embedforge/eval/evaluators.hpp"
#include "embedforge/filter/triplet_filter.hpp"
#include "embedforge/generation/generation_client.hpp"
#include "embedforge/mining/negative_miner.hpp"
#include "embedforge/prompts/prompt_factory.hpp"
#include "embedforge/surgery/vocab_surgeon.hpp"
#include "embedforge/topics/topic_model.hpp"
#include "embedforge/training/toy_trainer.hpp"

namespace embedforge {

namespace {

namespace fs = std::filesystem;

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

// One manifest per run: what ran, with which seed and config, over which
// exact input and output bytes.
class RunManifest {
public:
    RunManifest(std::string subcommand, std::string config_path, std::uint64_t seed)
        : subcommand_(std::move(subcommand)),
          config_path_(std::move(config_path)),
          seed_(seed),
          started_(iso_now()) {}

    void add_input(const std::string& path) { inputs_.push_back(path); }
    void add_output(const std::string& path) { outputs_.push_back(path); }
    void set_path(const std::string& path) { manifest_path_ = path; }

    void write() const {
        json obj;
        obj["subcommand"] = subcommand_;
        obj["config"] = config_path_;
        obj["seed"] = seed_;
        obj["started"] = started_;
        obj["finished"] = iso_now();
        obj["inputs"] = json::object();
        for (const auto& p : inputs_) {
            if (fs::exists(p) && fs::is_regular_file(p)) obj["inputs"][p] = sha256_file_hex(p);
        }
        obj["outputs"] = json::object();
        for (const auto& p : outputs_) {
            if (fs::exists(p) && fs::is_regular_file(p)) obj["outputs"][p] = sha256_file_hex(p);
        }
        std::string path = manifest_path_;
        if (path.empty()) {
            path = outputs_.empty() ? subcommand_ + ".manifest.json"
                                    : outputs_.front() + ".manifest.json";
        }
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::FileMissing, "cannot write manifest " + path);
        out << obj.dump(2) << "\n";
    }

private:
    std::string subcommand_;
    std::string config_path_;
    std::uint64_t seed_;
    std::string started_;
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
    std::string manifest_path_;
};

ExecPolicy policy_from_jobs(int jobs) {
    return jobs == 1 ? ExecPolicy::serial : ExecPolicy::parallel;
}

void apply_jobs(int jobs) {
#if defined(_OPENMP)
    if (jobs > 1) omp_set_num_threads(jobs);
#else
    (void)jobs;
#endif
}

struct EvalTaskSpec {
    std::string dataset;
    TaskType type = TaskType::retrieval;
    std::string dir;
    json extra;
};

std::vector<EvalTaskSpec> load_task_manifest(const std::string& path) {
    const json cfg = load_config_file(path);
    if (!cfg.contains("task") || !cfg["task"].is_array()) {
        throw Error(ErrorKind::ConfigError, path + ": expected [[task]] entries");
    }
    std::vector<EvalTaskSpec> tasks;
    for (const auto& entry : cfg["task"]) {
        EvalTaskSpec spec;
        spec.dataset = entry.at("dataset").get<std::string>();
        spec.type = task_type_from_name(entry.at("type").get<std::string>());
        spec.dir = entry.at("dir").get<std::string>();
        spec.extra = entry;
        tasks.push_back(std::move(spec));
    }
    if (tasks.empty()) throw Error(ErrorKind::ConfigError, path + ": no tasks listed");
    return tasks;
}

std::vector<LabeledPair> load_pairs(const std::string& path, bool continuous) {
    std::vector<LabeledPair> pairs;
    for_each_line(path, [&](std::size_t lineno, const std::string& line) {
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error&) {
            throw Error(ErrorKind::SchemaViolation,
                        path + " line " + std::to_string(lineno) + ": invalid JSON");
        }
        LabeledPair p;
        p.id_a = obj.at("id_a").get<std::string>();
        p.id_b = obj.at("id_b").get<std::string>();
        if (continuous) p.gold = obj.at("score").get<double>();
        else p.label = obj.at("label").get<int>();
        pairs.push_back(std::move(p));
    });
    return pairs;
}

double run_eval_task(const EvalTaskSpec& spec, const std::string& emb_dir, std::uint64_t seed,
                     ExecPolicy policy) {
    const fs::path data(spec.dir);
    const fs::path emb = fs::path(emb_dir) / spec.dataset;
    switch (spec.type) {
        case TaskType::retrieval: {
            const auto coll = load_retrieval_collection(data.string());
            const auto queries = read_embedding_store((emb / "queries.emb").string());
            const auto docs = read_embedding_store((emb / "corpus.emb").string());
            return eval_retrieval(queries, docs, coll, policy).ndcg_at_10;
        }
        case TaskType::reranking: {
            std::map<std::string, RerankingCandidates> candidates;
            for_each_line((data / "candidates.jsonl").string(),
                          [&](std::size_t, const std::string& line) {
                              const json obj = json::parse(line);
                              RerankingCandidates c;
                              c.positives = obj.at("positives").get<std::vector<std::string>>();
                              c.negatives = obj.at("negatives").get<std::vector<std::string>>();
                              candidates[obj.at("qid").get<std::string>()] = std::move(c);
                          });
            const auto queries = read_embedding_store((emb / "queries.emb").string());
            const auto cands = read_embedding_store((emb / "candidates.emb").string());
            return eval_reranking(queries, cands, candidates, policy);
        }
        case TaskType::classification: {
            const auto train = load_labeled_examples((data / "train.jsonl").string());
            const auto test = load_labeled_examples((data / "test.jsonl").string());
            const auto train_emb = read_embedding_store((emb / "train.emb").string());
            const auto test_emb = read_embedding_store((emb / "test.emb").string());
            ClassificationProtocol protocol;
            protocol.seed = seed;
            protocol.n_experiments = spec.extra.value("n_experiments", protocol.n_experiments);
            return eval_classification(train, train_emb, test, test_emb, protocol);
        }
        case TaskType::multilabel: {
            const auto train = load_labeled_examples((data / "train.jsonl").string());
            const auto test = load_labeled_examples((data / "test.jsonl").string());
            const auto train_emb = read_embedding_store((emb / "train.emb").string());
            const auto test_emb = read_embedding_store((emb / "test.emb").string());
            MultilabelProtocol protocol;
            protocol.seed = seed;
            protocol.n_experiments = spec.extra.value("n_experiments", protocol.n_experiments);
            protocol.k = spec.extra.value("knn_k", protocol.k);
            return eval_multilabel(train, train_emb, test, test_emb, protocol);
        }
        case TaskType::pair_classification: {
            const auto pairs = load_pairs((data / "pairs.jsonl").string(), false);
            const auto store = read_embedding_store((emb / "pairs.emb").string());
            return eval_pair_classification(store, pairs);
        }
        case TaskType::clustering: {
            std::vector<std::pair<std::string, std::string>> labels;
            for_each_line((data / "labels.jsonl").string(),
                          [&](std::size_t, const std::string& line) {
                              const json obj = json::parse(line);
                              labels.emplace_back(obj.at("id").get<std::string>(),
                                                  obj.at("label").get<std::string>());
                          });
            const auto store = read_embedding_store((emb / "docs.emb").string());
            ClusteringProtocol protocol;
            protocol.seed = seed;
            protocol.n_repetitions = spec.extra.value("n_repetitions", protocol.n_repetitions);
            return eval_clustering(store, labels, protocol, policy);
        }
        case TaskType::sts: {
            const auto pairs = load_pairs((data / "pairs.jsonl").string(), true);
            const auto store = read_embedding_store((emb / "pairs.emb").string());
            return eval_sts(store, pairs);
        }
    }
    throw Error(ErrorKind::ConfigError, "unreachable task type");
}

int cmd_fit_topics(const std::string& in, const std::string& out, std::uint64_t seed) {
    RunManifest manifest("fit-topics", in, seed);
    manifest.add_input(in);
    const auto samples = load_labeled_queries(in);
    const auto dist = fit_topic_distribution(samples);
    save_topic_distribution(out, dist);
    manifest.add_output(out);
    manifest.write();
    std::cout << "fitted " << dist.p_t1.size() << " first-label topics from " << samples.size()
              << " queries\n";
    return 0;
}

int cmd_gen_prompts(const std::string& dist_path, const std::string& category_name_str, long count,
                    std::uint64_t seed, const std::string& out, const std::string& resources) {
    RunManifest manifest("gen-prompts", dist_path, seed);
    manifest.add_input(dist_path);
    const auto dist = load_topic_distribution(dist_path);
    const PromptLibrary library(resources.empty() ? PromptLibrary::default_resource_dir()
                                                  : resources);
    const Category category = category_from_name(category_name_str);
    std::ofstream os(out);
    if (!os) throw Error(ErrorKind::FileMissing, "cannot open for write: " + out);
    for (long i = 0; i < count; ++i) {
        RngStream stream(derive_seed(seed, std::string(category_name(category)) + ":" +
                                               std::to_string(i)));
        const TopicPair topics = sample_topic_pair(dist, stream);
        const PromptParams params = library.sample_params(category, topics, stream);
        const std::string prompt = library.render(params);
        const HardnessTier tier = hardness_tier(params);
        json record{{"index", i},
                    {"prompt", prompt},
                    {"prompt_hash", sha256_hex(prompt)},
                    {"tier", tier_name(tier.tier)},
                    {"score", tier.score},
                    {"params", params_to_json(params)}};
        os << record.dump() << "\n";
    }
    manifest.add_output(out);
    manifest.write();
    std::cout << "wrote " << count << " prompts to " << out << "\n";
    return 0;
}

int cmd_generate(const std::string& plan_path, const std::string& dist_path, std::uint64_t seed,
                 long stop_after, const std::string& resources) {
    RunManifest manifest("generate", plan_path, seed);
    manifest.add_input(plan_path);
    manifest.add_input(dist_path);
    const json cfg = load_config_file(plan_path);

    CampaignPlan plan;
    plan.seed = cfg.value("seed", seed);
    plan.journal_path = cfg.value("journal", "campaign_journal.jsonl");
    plan.output_dir = cfg.value("output_dir", "campaign_out");
    plan.budget_eur = cfg.value("budget_eur", 0.0);
    plan.max_workers = cfg.value("max_workers", 4);
    plan.stop_after_successes = stop_after;
    if (!cfg.contains("targets") || !cfg["targets"].is_object()) {
        throw Error(ErrorKind::ConfigError, "plan needs a [targets] table");
    }
    for (auto it = cfg["targets"].begin(); it != cfg["targets"].end(); ++it) {
        plan.targets[category_from_name(it.key())] = it->get<long>();
    }
    if (!cfg.contains("route")) throw Error(ErrorKind::ConfigError, "plan needs [route.*] tables");
    plan.route = route_from_config(cfg["route"]);

    const auto dist = load_topic_distribution(dist_path);
    const PromptLibrary library(resources.empty() ? PromptLibrary::default_resource_dir()
                                                  : resources);
    auto client = make_http_chat_client();
    const CampaignStats stats = run_campaign(plan, dist, library, *client);

    manifest.add_output(plan.journal_path);
    manifest.write();
    std::cout << "campaign" << (stats.resumed ? " (resumed)" : "") << ": ";
    for (const auto& [cat, n] : stats.successes) {
        std::cout << category_name(cat) << "=" << n << " ";
    }
    std::cout << "cost=" << stats.estimated_cost_eur << " EUR\n";
    return 0;
}

int cmd_filter(const std::string& in, const std::string& category_str,
               const std::string& scores_path, const std::string& rerank_url, double c,
               const std::string& kept_path, const std::string& rejected_path,
               const std::string& cache_path, std::uint64_t seed) {
    RunManifest manifest("filter", in, seed);
    manifest.add_input(in);
    const Category category = category_from_name(category_str);
    const TripletSet set = load_triplets(in, category);

    std::vector<RerankScore> scores;
    if (!scores_path.empty()) {
        manifest.add_input(scores_path);
        scores = load_rerank_scores(scores_path);
    } else if (!rerank_url.empty()) {
        auto scorer = make_http_scorer(rerank_url);
        ScoreCache cache(cache_path.empty() ? "rerank_cache.jsonl" : cache_path);
        scores = score_triplets(set.items, *scorer, &cache);
    } else {
        throw Error(ErrorKind::UsageError, "filter needs --scores or --rerank-url");
    }

    FilterConfig cfg;
    cfg.threshold_c = c;
    const FilterOutcome outcome = filter_triplets(scores, cfg);

    std::map<std::string, const Triplet*> by_id;
    for (const auto& t : set.items) by_id[t.id] = &t;
    std::vector<Triplet> kept;
    for (const auto& id : outcome.kept) {
        auto it = by_id.find(id);
        if (it != by_id.end()) kept.push_back(*it->second);
    }
    save_triplets(kept_path, kept);
    {
        std::ofstream out(rejected_path);
        if (!out) throw Error(ErrorKind::FileMissing, "cannot open for write: " + rejected_path);
        for (const auto& [id, reason] : outcome.rejected) {
            out << json{{"id", id}, {"reason", reason}}.dump() << "\n";
        }
    }
    manifest.add_output(kept_path);
    manifest.add_output(rejected_path);
    manifest.write();
    std::cout << "kept " << outcome.kept.size() << " rejected " << outcome.rejected.size() << "\n";
    return 0;
}

int cmd_mine(const std::string& run_path, const std::string& qrels_path, const std::string& out,
             int top_n, int window, int per_query, std::uint64_t seed, int jobs) {
    RunManifest manifest("mine-negatives", run_path, seed);
    manifest.add_input(run_path);
    manifest.add_input(qrels_path);
    const ScoreRun run = load_score_run(run_path);
    const auto qrels = load_qrels_tsv(qrels_path);
    MiningParams params;
    params.top_n_for_sigma = top_n;
    params.candidate_window_k = window;
    params.negatives_per_query = per_query;
    params.seed = seed;
    const MiningOutcome outcome = mine_run(run, qrels, params, policy_from_jobs(jobs));
    save_mined_negatives(out, outcome.mined);
    manifest.add_output(out);
    manifest.write();
    std::cout << "mined " << outcome.mined.size() << " pairs (" << outcome.empty_eligible
              << " without eligible negatives, " << outcome.positive_missing
              << " with missing positives)\n";
    return 0;
}

int cmd_build_batches(const std::string& mix_path, int batch_size, std::uint64_t seed,
                      const std::string& out) {
    RunManifest manifest("build-batches", mix_path, seed);
    manifest.add_input(mix_path);
    const json cfg = load_config_file(mix_path);
    if (!cfg.contains("source") || !cfg["source"].is_array()) {
        throw Error(ErrorKind::ConfigError, mix_path + ": expected [[source]] entries");
    }

    std::vector<SourceSpec> mix;
    std::map<std::string, std::vector<std::string>> ids;  // source -> triplet ids
    for (const auto& entry : cfg["source"]) {
        SourceSpec spec;
        spec.name = entry.at("name").get<std::string>();
        const std::string category_str = entry.value("category", "short-long");
        const bool synthetic = entry.value("synthetic", false);
        spec.synthetic_classification = synthetic && category_str == "long-short";
        if (entry.contains("path")) {
            const std::string path = entry["path"].get<std::string>();
            manifest.add_input(path);
            const TripletSet set = load_triplets(path, category_from_name(category_str));
            for (const auto& t : set.items) ids[spec.name].push_back(t.id);
            spec.count = set.items.size();
        } else {
            spec.count = entry.at("count").get<std::size_t>();
        }
        mix.push_back(std::move(spec));
    }

    TrainingConfig cfg_train;
    cfg_train.batch_size = batch_size;
    cfg_train.seed = seed;
    const auto batches = build_epoch(mix, cfg_train);

    std::ofstream os(out);
    if (!os) throw Error(ErrorKind::FileMissing, "cannot open for write: " + out);
    for (const auto& batch : batches) {
        json record{{"source", batch.source},
                    {"in_batch_negatives", batch.in_batch_negatives_enabled}};
        auto it = ids.find(batch.source);
        if (it != ids.end()) {
            std::vector<std::string> item_ids;
            for (std::size_t idx : batch.items) item_ids.push_back(it->second[idx]);
            record["items"] = item_ids;
        } else {
            record["items"] = batch.items;
        }
        os << record.dump() << "\n";
    }
    manifest.add_output(out);
    manifest.write();
    std::cout << "planned " << batches.size() << " batches\n";
    return 0;
}

int cmd_train_toy(bool synthetic, const std::string& data_path, const std::string& category_str,
                  int batch_size, int epochs, double lr, double tau, double warmup,
                  std::uint64_t seed, int hash_dim, int embed_dim, const std::string& out_weights,
                  const std::string& out_curve, int jobs) {
    RunManifest manifest("train-toy", data_path, seed);
    std::vector<Triplet> data;
    if (synthetic) {
        data = make_separable_topic_task(8, 64, 8, 8, seed).train;
    } else {
        manifest.add_input(data_path);
        data = load_triplets(data_path, category_from_name(category_str)).items;
    }

    TrainingConfig cfg;
    cfg.batch_size = batch_size;
    cfg.epochs = epochs;
    cfg.learning_rate = lr;
    cfg.temperature = tau;
    cfg.warmup_ratio = warmup;
    cfg.seed = seed;
    const TrainResult result = train_toy(data, cfg, hash_dim, embed_dim, policy_from_jobs(jobs));

    save_loss_curve(out_curve, result.losses);
    EmbeddingMatrix weights;
    weights.vocab_size = static_cast<std::uint32_t>(hash_dim);
    weights.dim = static_cast<std::uint32_t>(embed_dim);
    for (int b = 0; b < hash_dim; ++b) {
        weights.tokens.push_back("h" + std::to_string(b));
        for (int e = 0; e < embed_dim; ++e) {
            weights.rows.push_back(static_cast<float>(result.encoder.weight(b, e)));
        }
    }
    write_embedding_matrix(out_weights, weights);
    manifest.add_output(out_weights);
    manifest.add_output(out_curve);
    manifest.write();

    if (result.diverged) {
        std::cerr << "DivergenceDetected: loss went non-finite; wrote last good state\n";
        return 1;
    }
    std::cout << "trained " << result.losses.size() << " batches, first loss "
              << (result.losses.empty() ? 0.0 : result.losses.front()) << ", last loss "
              << (result.losses.empty() ? 0.0 : result.losses.back()) << "\n";
    return 0;
}

int cmd_trim_vocab(const std::string& matrix_path, const std::string& stats_path,
                   std::uint32_t target, const std::string& specials_csv, const std::string& out,
                   const std::string& id_map_path, std::uint64_t total_params,
                   std::uint64_t seed) {
    RunManifest manifest("trim-vocab", matrix_path, seed);
    manifest.add_input(matrix_path);
    manifest.add_input(stats_path);
    const EmbeddingMatrix matrix = read_embedding_matrix(matrix_path);
    const TokenStats stats = load_token_stats(stats_path);
    std::vector<std::string> specials;
    std::string current;
    for (char ch : specials_csv) {
        if (ch == ',') {
            if (!current.empty()) specials.push_back(current);
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    if (!current.empty()) specials.push_back(current);

    const TrimResult result = trim_vocabulary(matrix, stats, target, specials);
    write_embedding_matrix(out, result.matrix);
    save_id_map(id_map_path, result.id_map);
    manifest.add_output(out);
    manifest.add_output(id_map_path);
    manifest.write();
    std::cout << "trimmed " << matrix.vocab_size << " -> " << result.matrix.vocab_size << " rows";
    if (total_params > 0) {
        const double ratio =
            reduction_ratio(matrix.vocab_size, result.matrix.vocab_size, matrix.dim, total_params);
        std::cout << ", parameter reduction " << ratio * 100.0 << "%";
    }
    std::cout << "\n";
    return 0;
}

int cmd_evaluate(const std::string& manifest_path, const std::string& emb_dir,
                 const std::string& out, std::uint64_t seed, int jobs) {
    RunManifest manifest("evaluate", manifest_path, seed);
    manifest.add_input(manifest_path);
    const auto tasks = load_task_manifest(manifest_path);
    std::vector<DatasetScore> scores;
    for (const auto& task : tasks) {
        DatasetScore score;
        score.dataset = task.dataset;
        score.task = task.type;
        score.score = run_eval_task(task, emb_dir, seed, policy_from_jobs(jobs));
        scores.push_back(score);
        std::cout << task.dataset << " (" << task_type_name(task.type) << "): " << score.score
                  << "\n";
    }
    const EvalReport report = aggregate(scores);
    save_report(out, report);
    manifest.add_output(out);
    manifest.write();
    std::cout << "AvgD " << report.avg_d << " AvgT " << report.avg_t << "\n";
    return 0;
}

int cmd_report(const std::string& in, const std::string& model, const std::string& out,
               std::uint64_t seed) {
    RunManifest manifest("report", in, seed);
    manifest.add_input(in);
    const EvalReport report = load_report(in);
    const std::string table = report_markdown(report, model);
    if (!out.empty()) {
        std::ofstream os(out);
        if (!os) throw Error(ErrorKind::FileMissing, "cannot open for write: " + out);
        os << table;
        manifest.add_output(out);
    }
    manifest.write();
    std::cout << table;
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"embedforge: synthetic contrastive-data factory and embedding evaluation"};
    app.require_subcommand(1);
    app.fallthrough();  // --seed/--jobs may follow the subcommand name

    std::uint64_t seed = 0;
    int jobs = 0;  // 0 = auto (parallel)
    app.add_option("--seed", seed, "master seed for all randomness")->capture_default_str();
    app.add_option("--jobs", jobs, "worker count; 1 forces the serial kernels");

    // fit-topics
    std::string ft_in, ft_out = "topics.json";
    auto* fit = app.add_subcommand("fit-topics", "fit the topic distribution from labeled queries");
    fit->add_option("--in", ft_in, "labeled queries JSONL")->required();
    fit->add_option("--out", ft_out, "distribution JSON")->capture_default_str();

    // gen-prompts
    std::string gp_dist, gp_category = "short-long", gp_out = "prompts.jsonl", gp_resources;
    long gp_count = 10;
    auto* gen_prompts = app.add_subcommand("gen-prompts", "sample and render prompts");
    gen_prompts->add_option("--dist", gp_dist, "topic distribution JSON")->required();
    gen_prompts->add_option("--category", gp_category, "triplet category")->capture_default_str();
    gen_prompts->add_option("--count", gp_count, "prompts to render")->capture_default_str();
    gen_prompts->add_option("--out", gp_out, "output JSONL")->capture_default_str();
    gen_prompts->add_option("--resources", gp_resources, "prompt resource directory");

    // generate
    std::string g_plan, g_dist, g_resources;
    long g_stop_after = 0;
    auto* generate = app.add_subcommand("generate", "run the generation campaign");
    generate->add_option("--plan", g_plan, "campaign plan (TOML or JSON)")->required();
    generate->add_option("--dist", g_dist, "topic distribution JSON")->required();
    generate->add_option("--stop-after", g_stop_after, "graceful stop after N successes");
    generate->add_option("--resources", g_resources, "prompt resource directory");

    // filter
    std::string f_in, f_category = "short-long", f_scores, f_rerank_url, f_kept, f_rejected,
                f_cache;
    double f_c = 0.96;
    auto* filter = app.add_subcommand("filter", "margin-filter scored triplets");
    filter->add_option("--in", f_in, "triplets JSONL")->required();
    filter->add_option("--category", f_category, "triplet category")->capture_default_str();
    filter->add_option("--scores", f_scores, "precomputed scores JSONL");
    filter->add_option("--rerank-url", f_rerank_url, "reranker endpoint");
    filter->add_option("--c", f_c, "margin threshold C")->capture_default_str();
    filter->add_option("--kept", f_kept, "kept triplets output");
    filter->add_option("--rejected", f_rejected, "rejections output");
    filter->add_option("--cache", f_cache, "reranker score cache file");

    // mine-negatives
    std::string m_run, m_qrels, m_out = "mined.jsonl";
    int m_top_n = 1000, m_window = 100, m_per_query = 1;
    auto* mine = app.add_subcommand("mine-negatives", "TopK-STDMarginPos hard-negative mining");
    mine->add_option("--run", m_run, "teacher score run TSV")->required();
    mine->add_option("--qrels", m_qrels, "qrels TSV")->required();
    mine->add_option("--out", m_out, "mined negatives JSONL")->capture_default_str();
    mine->add_option("--top-n", m_top_n, "scores entering the sigma estimate")
        ->capture_default_str();
    mine->add_option("--window", m_window, "candidate window K")->capture_default_str();
    mine->add_option("--per-query", m_per_query, "negatives sampled per query")
        ->capture_default_str();

    // build-batches
    std::string b_mix, b_out = "batch_plan.jsonl";
    int b_batch_size = 1024;
    auto* build = app.add_subcommand("build-batches", "plan source-homogeneous batches");
    build->add_option("--mix", b_mix, "data mix manifest (TOML or JSON)")->required();
    build->add_option("--batch-size", b_batch_size, "batch size")->capture_default_str();
    build->add_option("--out", b_out, "batch plan JSONL")->capture_default_str();

    // train-toy
    bool t_synthetic = false;
    std::string t_data, t_category = "short-long", t_weights = "toy_weights.vmat",
                t_curve = "toy_losses.csv";
    int t_batch = 32, t_epochs = 3, t_hash_dim = 4096, t_embed_dim = 64;
    double t_lr = 2.0, t_tau = 0.05, t_warmup = 0.25;
    auto* train = app.add_subcommand("train-toy", "desk-scale training-contract check");
    train->add_flag("--synthetic", t_synthetic, "use the built-in separable topic task");
    train->add_option("--data", t_data, "triplets JSONL");
    train->add_option("--category", t_category, "triplet category")->capture_default_str();
    train->add_option("--batch-size", t_batch, "batch size")->capture_default_str();
    train->add_option("--epochs", t_epochs, "epochs")->capture_default_str();
    train->add_option("--lr", t_lr, "learning rate")->capture_default_str();
    train->add_option("--tau", t_tau, "InfoNCE temperature")->capture_default_str();
    train->add_option("--warmup", t_warmup, "warm-up ratio")->capture_default_str();
    train->add_option("--hash-dim", t_hash_dim, "hashing buckets")->capture_default_str();
    train->add_option("--embed-dim", t_embed_dim, "embedding width")->capture_default_str();
    train->add_option("--out-weights", t_weights, "weight matrix output")->capture_default_str();
    train->add_option("--out-curve", t_curve, "loss curve CSV")->capture_default_str();

    // trim-vocab
    std::string v_matrix, v_stats, v_specials, v_out = "trimmed.vmat", v_map = "id_map.json";
    std::uint32_t v_target = 0;
    std::uint64_t v_total = 0;
    auto* trim = app.add_subcommand("trim-vocab", "vocabulary-trim an embedding matrix");
    trim->add_option("--matrix", v_matrix, "input matrix (VMAT)")->required();
    trim->add_option("--stats", v_stats, "token stats TSV")->required();
    trim->add_option("--target", v_target, "kept vocabulary size")->required();
    trim->add_option("--specials", v_specials, "comma-separated special tokens");
    trim->add_option("--out", v_out, "trimmed matrix output")->capture_default_str();
    trim->add_option("--id-map", v_map, "id map JSON output")->capture_default_str();
    trim->add_option("--total-params", v_total, "model parameter total for reduction accounting");

    // evaluate
    std::string e_manifest, e_emb, e_out = "report.json";
    auto* evaluate = app.add_subcommand("evaluate", "run the task evaluators over embeddings");
    evaluate->add_option("--manifest", e_manifest, "task manifest (TOML or JSON)")->required();
    evaluate->add_option("--emb", e_emb, "embeddings directory")->required();
    evaluate->add_option("--out", e_out, "report JSON")->capture_default_str();

    // report
    std::string r_in, r_model = "model", r_out;
    auto* report = app.add_subcommand("report", "render a report as a markdown table");
    report->add_option("--in", r_in, "report JSON")->required();
    report->add_option("--model", r_model, "row label")->capture_default_str();
    report->add_option("--out", r_out, "markdown output path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            app.exit(e);
            return 0;
        }
        std::cerr << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        apply_jobs(jobs);
        if (fit->parsed()) return cmd_fit_topics(ft_in, ft_out, seed);
        if (gen_prompts->parsed()) {
            return cmd_gen_prompts(gp_dist, gp_category, gp_count, seed, gp_out, gp_resources);
        }
        if (generate->parsed()) return cmd_generate(g_plan, g_dist, seed, g_stop_after, g_resources);
        if (filter->parsed()) {
            if (f_kept.empty()) f_kept = f_in + ".kept.jsonl";
            if (f_rejected.empty()) f_rejected = f_in + ".rejected.jsonl";
            return cmd_filter(f_in, f_category, f_scores, f_rerank_url, f_c, f_kept, f_rejected,
                              f_cache, seed);
        }
        if (mine->parsed()) {
            return cmd_mine(m_run, m_qrels, m_out, m_top_n, m_window, m_per_query, seed, jobs);
        }
        if (build->parsed()) return cmd_build_batches(b_mix, b_batch_size, seed, b_out);
        if (train->parsed()) {
            if (!t_synthetic && t_data.empty()) {
                throw Error(ErrorKind::UsageError, "train-toy needs --synthetic or --data");
            }
            return cmd_train_toy(t_synthetic, t_data, t_category, t_batch, t_epochs, t_lr, t_tau,
                                 t_warmup, seed, t_hash_dim, t_embed_dim, t_weights, t_curve, jobs);
        }
        if (trim->parsed()) {
            return cmd_trim_vocab(v_matrix, v_stats, v_target, v_specials, v_out, v_map, v_total,
                                  seed);
        }
        if (evaluate->parsed()) return cmd_evaluate(e_manifest, e_emb, e_out, seed, jobs);
        if (report->parsed()) return cmd_report(r_in, r_model, r_out, seed);
        std::cerr << app.help();
        return 2;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::UsageError) {
            std::cerr << "usage error: " << e.what() << "\n";
            return 2;
        }
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace embedforge
