#include "embedforge/generation/generation_client.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <httplib.h>

#include "embedforge/core/error.hpp"
#include "embedforge/core/hash.hpp"
#include "embedforge/core/jsonl.hpp"
#include "embedforge/core/text.hpp"

namespace embedforge {

void ModelRoute::validate() const {
    for (const auto& e : tiers) {
        if (e.model.empty() || e.endpoint.empty()) {
            throw Error(ErrorKind::ConfigError, "every tier needs a model and endpoint");
        }
        if (e.max_in_flight < 1) throw Error(ErrorKind::ConfigError, "max_in_flight must be >= 1");
        if (e.max_retries < 1) throw Error(ErrorKind::ConfigError, "max_retries must be >= 1");
    }
}

std::string strip_code_fences(const std::string& content) {
    std::string text = trim(content);
    if (text.size() >= 3 && text.substr(0, 3) == "```") {
        const auto newline = text.find('\n');
        if (newline != std::string::npos) text = text.substr(newline + 1);
        else text.clear();
        if (text.size() >= 3) {
            const auto closing = text.rfind("```");
            if (closing != std::string::npos) text = text.substr(0, closing);
        }
        text = trim(text);
    }
    return text;
}

namespace {

class HttpChatClient final : public ChatClient {
public:
    ChatReply complete(const RouteEntry& route, const std::string& prompt) override {
        const char* key = std::getenv("EMBEDFORGE_API_KEY");
        if (!key || !*key) {
            throw Error(ErrorKind::ConfigError, "EMBEDFORGE_API_KEY is not set");
        }
        const auto scheme_end = route.endpoint.find("://");
        const auto slash = route.endpoint.find(
            '/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        const std::string host =
            slash == std::string::npos ? route.endpoint : route.endpoint.substr(0, slash);
        const std::string path = slash == std::string::npos ? "/" : route.endpoint.substr(slash);

        httplib::Client client(host);
        client.set_read_timeout(route.timeout_seconds, 0);
        client.set_connection_timeout(route.timeout_seconds, 0);
        httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
        json body{{"model", route.model},
                  {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                  {"temperature", 1.0}};
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res || res->status != 200) {
            throw Error(ErrorKind::TransportError,
                        "chat POST failed" +
                            (res ? " with status " + std::to_string(res->status) : ""));
        }
        json obj = json::parse(res->body, nullptr, false);
        if (obj.is_discarded() || !obj.contains("choices") || obj["choices"].empty()) {
            throw Error(ErrorKind::TransportError, "malformed chat response");
        }
        ChatReply reply;
        try {
            reply.content = obj["choices"][0]["message"]["content"].get<std::string>();
        } catch (const json::exception&) {
            throw Error(ErrorKind::TransportError, "chat response missing content");
        }
        if (obj.contains("usage")) {
            reply.prompt_tokens = obj["usage"].value("prompt_tokens", 0L);
            reply.completion_tokens = obj["usage"].value("completion_tokens", 0L);
        }
        return reply;
    }
};

// Rough fallback when the endpoint reports no usage.
long estimate_tokens(const std::string& text) {
    return static_cast<long>(text.size() / 4 + 1);
}

}  // namespace

std::unique_ptr<ChatClient> make_http_chat_client() {
    return std::make_unique<HttpChatClient>();
}

GenerationResult generate_triplet(const std::string& prompt, const PromptParams& params,
                                  ChatClient& client, const RouteEntry& route, Tier tier) {
    std::string last_error;
    ErrorKind last_kind = ErrorKind::SchemaError;
    for (int attempt = 1; attempt <= route.max_retries; ++attempt) {
        ChatReply reply;
        try {
            reply = client.complete(route, prompt);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::TransportError) throw;
            last_error = e.what();
            last_kind = ErrorKind::TransportError;
            continue;
        }
        const std::string content = strip_code_fences(reply.content);
        try {
            json obj = json::parse(content, nullptr, false);
            if (obj.is_discarded() || !obj.is_object()) {
                throw Error(ErrorKind::SchemaViolation, "not a JSON object");
            }
            const auto& keys = required_keys(params.category);
            if (obj.size() != keys.size()) {
                throw Error(ErrorKind::SchemaViolation, "unexpected extra keys");
            }
            GenerationResult result;
            result.triplet = parse_triplet_line(content, params.category);
            result.attempts = attempt;
            result.prompt_tokens =
                reply.prompt_tokens ? reply.prompt_tokens : estimate_tokens(prompt);
            result.completion_tokens =
                reply.completion_tokens ? reply.completion_tokens : estimate_tokens(reply.content);
            if (params.category == Category::sts) {
                result.triplet.sts_high = params.high_score;
                result.triplet.sts_low = params.low_score;
            }
            result.triplet.source = TripletSource::synthetic;
            result.triplet.meta["model"] = route.model;
            result.triplet.meta["tier"] = tier_name(tier);
            result.triplet.meta["t1"] = params.topics.t1;
            if (params.topics.t2) result.triplet.meta["t2"] = *params.topics.t2;
            return result;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SchemaViolation) throw;
            last_error = e.what();
            last_kind = ErrorKind::SchemaError;
        }
    }
    throw Error(last_kind, "after " + std::to_string(route.max_retries) +
                               " attempts: " + last_error);
}

namespace {

struct PromptJob {
    Category category = Category::short_long;
    long index = 0;
    std::string prompt;
    std::string prompt_hash;
    PromptParams params;
    Tier tier = Tier::nano;
};

PromptJob make_job(const CampaignPlan& plan, const TopicDistribution& dist,
                   const PromptLibrary& library, Category category, long index) {
    PromptJob job;
    job.category = category;
    job.index = index;
    RngStream stream(derive_seed(plan.seed, std::string(category_name(category)) + ":" +
                                                std::to_string(index)));
    const TopicPair topics = sample_topic_pair(dist, stream);
    job.params = library.sample_params(category, topics, stream);
    job.prompt = library.render(job.params);
    job.prompt_hash = sha256_hex(job.prompt);
    job.tier = hardness_tier(job.params).tier;
    return job;
}

const Category kCategoryOrder[5] = {Category::short_long, Category::long_short,
                                    Category::short_short, Category::long_long, Category::sts};

}  // namespace

CampaignStats run_campaign(const CampaignPlan& plan, const TopicDistribution& dist,
                           const PromptLibrary& library, ChatClient& client) {
    plan.route.validate();
    if (plan.journal_path.empty()) {
        throw Error(ErrorKind::ConfigError, "campaign needs a journal path");
    }

    CampaignStats stats;
    std::map<Category, long> done;        // journaled successes per category
    std::map<Category, long> next_index;  // next fresh prompt index per category

    // Replay the journal: successes count toward the targets, and fresh
    // prompt indices continue past anything already issued.
    if (std::filesystem::exists(plan.journal_path)) {
        for_each_line(plan.journal_path, [&](std::size_t, const std::string& line) {
            json obj = json::parse(line, nullptr, false);
            if (obj.is_discarded()) return;
            const Category cat = category_from_name(obj.value("category", "short-long"));
            next_index[cat] = std::max(next_index[cat], obj.value("index", 0L) + 1);
            if (obj.value("status", "") == "ok") done[cat] += 1;
            stats.resumed = true;
        });
    }

    std::ofstream journal(plan.journal_path, std::ios::app);
    if (!journal) throw Error(ErrorKind::FileMissing, "cannot open journal " + plan.journal_path);
    std::mutex journal_mu;

    std::atomic<long> run_successes{0};
    std::atomic<bool> stop{false};
    std::atomic<int> consecutive_transport{0};
    std::atomic<bool> transport_abort{false};
    std::mutex stats_mu;
    double cost = 0.0;

    // Per-tier in-flight gates.
    std::mutex gate_mu;
    std::condition_variable gate_cv;
    int in_flight[3] = {0, 0, 0};

    auto acquire = [&](Tier t) {
        std::unique_lock lock(gate_mu);
        gate_cv.wait(lock, [&] {
            return in_flight[static_cast<int>(t)] < plan.route.entry(t).max_in_flight;
        });
        in_flight[static_cast<int>(t)]++;
    };
    auto release = [&](Tier t) {
        {
            std::lock_guard lock(gate_mu);
            in_flight[static_cast<int>(t)]--;
        }
        gate_cv.notify_all();
    };

    auto process = [&](const PromptJob& job) {
        const RouteEntry& route = plan.route.entry(job.tier);
        json record{{"prompt_hash", job.prompt_hash},
                    {"category", category_name(job.category)},
                    {"index", job.index},
                    {"tier", tier_name(job.tier)}};
        bool ok = false;
        try {
            acquire(job.tier);
            GenerationResult result;
            try {
                result = generate_triplet(job.prompt, job.params, client, route, job.tier);
            } catch (...) {
                release(job.tier);
                throw;
            }
            release(job.tier);
            consecutive_transport = 0;
            // Unique per job: duplicate prompt texts are legitimate (the
            // parameter grids are finite), so the id keys on the slot.
            result.triplet.id =
                sha256_hex(std::string(category_name(job.category)) + "#" +
                           std::to_string(job.index) + "#" + job.prompt_hash)
                    .substr(0, 16);
            record["status"] = "ok";
            record["attempt"] = result.attempts;
            json triplet_line;
            {
                // Reuse the canonical triplet writer via a scratch line.
                const auto& keys = required_keys(job.category);
                triplet_line[keys[0]] = result.triplet.query;
                triplet_line[keys[1]] = result.triplet.positive;
                triplet_line[keys[2]] = result.triplet.negative;
                triplet_line["id"] = result.triplet.id;
                triplet_line["source"] = "synthetic";
                if (result.triplet.sts_high) triplet_line["similarity-high"] = *result.triplet.sts_high;
                if (result.triplet.sts_low) triplet_line["similarity-low"] = *result.triplet.sts_low;
                triplet_line["meta"] = result.triplet.meta;
            }
            record["triplet"] = triplet_line;
            ok = true;
            {
                std::lock_guard lock(stats_mu);
                stats.per_tier[tier_name(job.tier)].requests += result.attempts;
                cost += static_cast<double>(result.prompt_tokens) / 1000.0 *
                            route.prompt_price_per_1k +
                        static_cast<double>(result.completion_tokens) / 1000.0 *
                            route.completion_price_per_1k;
            }
        } catch (const Error& e) {
            record["status"] =
                e.kind() == ErrorKind::TransportError ? "transport_error" : "schema_error";
            record["attempt"] = route.max_retries;
            record["error"] = e.what();
            std::lock_guard lock(stats_mu);
            stats.per_tier[tier_name(job.tier)].requests += route.max_retries;
            stats.per_tier[tier_name(job.tier)].failures += 1;
            if (e.kind() == ErrorKind::TransportError) {
                if (++consecutive_transport >= 3) {
                    transport_abort = true;
                    stop = true;
                }
            }
        }
        {
            std::lock_guard lock(journal_mu);
            journal << record.dump() << "\n";
            journal.flush();
        }
        if (ok) {
            const long total = ++run_successes;
            if (plan.stop_after_successes > 0 && total >= plan.stop_after_successes) {
                stats.stopped_early = true;
                stop = true;
            }
        }
        {
            std::lock_guard lock(stats_mu);
            if (plan.budget_eur > 0.0 && cost > plan.budget_eur) stop = true;
        }
        return ok;
    };

    for (Category category : kCategoryOrder) {
        auto target_it = plan.targets.find(category);
        if (target_it == plan.targets.end() || target_it->second <= 0) continue;
        const long target = target_it->second;

        std::atomic<long> successes{done[category]};
        std::atomic<long> issue_cursor{next_index[category]};

        const int n_workers = std::max(1, plan.max_workers);
        std::vector<std::thread> workers;
        std::mutex fatal_mu;
        std::string fatal;
        workers.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) {
            workers.emplace_back([&] {
                try {
                    while (!stop && successes.load() < target) {
                        const long index = issue_cursor.fetch_add(1);
                        PromptJob job = make_job(plan, dist, library, category, index);
                        if (process(job)) successes.fetch_add(1);
                    }
                } catch (const std::exception& e) {
                    std::lock_guard lock(fatal_mu);
                    if (fatal.empty()) fatal = e.what();
                    stop = true;
                }
            });
        }
        for (auto& w : workers) w.join();
        done[category] = successes.load();
        if (!fatal.empty()) throw Error(ErrorKind::SchemaError, fatal);
        if (stop) break;
    }

    stats.estimated_cost_eur = cost;
    for (const auto& [cat, n] : done) stats.successes[cat] = n;

    if (transport_abort) {
        throw Error(ErrorKind::TransportError, "persistent transport failures; journal intact");
    }
    if (plan.budget_eur > 0.0 && cost > plan.budget_eur) {
        throw Error(ErrorKind::BudgetExceeded,
                    "estimated cost " + std::to_string(cost) + " EUR over budget");
    }

    if (!plan.output_dir.empty() && !stats.stopped_early) {
        std::filesystem::create_directories(plan.output_dir);
        const auto output = collect_campaign_output(plan.journal_path, plan);
        for (const auto& [category, triplets] : output) {
            save_triplets((std::filesystem::path(plan.output_dir) /
                           (std::string(category_name(category)) + ".jsonl"))
                              .string(),
                          triplets);
        }
    }
    return stats;
}

std::map<Category, std::vector<Triplet>> collect_campaign_output(const std::string& journal_path,
                                                                 const CampaignPlan& plan) {
    std::map<Category, std::vector<Triplet>> out;
    std::set<std::string> seen_slots;
    for_each_line(journal_path, [&](std::size_t, const std::string& line) {
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || obj.value("status", "") != "ok" || !obj.contains("triplet")) {
            return;
        }
        const std::string slot =
            obj.value("category", "") + "#" + std::to_string(obj.value("index", 0L));
        if (!seen_slots.insert(slot).second) return;
        const Category cat = category_from_name(obj.value("category", "short-long"));
        auto target_it = plan.targets.find(cat);
        const long target = target_it == plan.targets.end() ? 0 : target_it->second;
        if (static_cast<long>(out[cat].size()) >= target) return;
        out[cat].push_back(parse_triplet_line(obj["triplet"].dump(), cat));
    });
    return out;
}

ModelRoute route_from_config(const nlohmann::json& cfg) {
    ModelRoute route;
    const char* names[3] = {"nano", "mini", "full"};
    for (int i = 0; i < 3; ++i) {
        if (!cfg.contains(names[i])) {
            throw Error(ErrorKind::ConfigError, std::string("route missing tier ") + names[i]);
        }
        const auto& t = cfg[names[i]];
        RouteEntry e;
        e.model = t.value("model", "");
        e.endpoint = t.value("endpoint", "");
        e.max_in_flight = t.value("max_in_flight", 4);
        e.timeout_seconds = t.value("timeout_seconds", 60);
        e.max_retries = t.value("max_retries", 3);
        e.prompt_price_per_1k = t.value("prompt_price_per_1k", 0.0);
        e.completion_price_per_1k = t.value("completion_price_per_1k", 0.0);
        route.tiers[i] = e;
    }
    route.validate();
    return route;
}

}  // namespace embedforge
