#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "embedforge/dataset/triplet.hpp"
#include "embedforge/prompts/prompt_factory.hpp"
#include "embedforge/topics/topic_model.hpp"

namespace embedforge {

struct RouteEntry {
    std::string model;
    std::string endpoint;  // chat-completions URL
    int max_in_flight = 4;
    int timeout_seconds = 60;
    int max_retries = 3;
    double prompt_price_per_1k = 0.0;      // cost accounting, EUR per 1K tokens
    double completion_price_per_1k = 0.0;
};

// One entry per hardness tier.
struct ModelRoute {
    RouteEntry tiers[3];

    const RouteEntry& entry(Tier t) const { return tiers[static_cast<int>(t)]; }
    RouteEntry& entry(Tier t) { return tiers[static_cast<int>(t)]; }
    void validate() const;
};

struct ChatReply {
    std::string content;
    long prompt_tokens = 0;      // 0 when the endpoint reports no usage
    long completion_tokens = 0;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    // Throws Error(TransportError) on connection/status failures.
    virtual ChatReply complete(const RouteEntry& route, const std::string& prompt) = 0;
};

// POST {model, messages: [{role: "user", content: prompt}]} with the
// credential from EMBEDFORGE_API_KEY as a bearer token.
std::unique_ptr<ChatClient> make_http_chat_client();

// Strips a leading/trailing markdown code fence (``` or ```json).
std::string strip_code_fences(const std::string& content);

struct GenerationResult {
    Triplet triplet;
    int attempts = 1;
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

// Requests a completion and validates it as a single JSON object carrying
// exactly the category's required keys; schema failures retry the same
// prompt up to route.max_retries attempts in total. The sts target scores
// and provenance (model, tier, topics) come from params.
GenerationResult generate_triplet(const std::string& prompt, const PromptParams& params,
                                  ChatClient& client, const RouteEntry& route, Tier tier);

struct CampaignPlan {
    std::map<Category, long> targets;
    std::uint64_t seed = 0;
    ModelRoute route;
    std::string journal_path;
    std::string output_dir;
    double budget_eur = 0.0;          // 0 disables the soft budget gate
    long stop_after_successes = 0;    // 0 disables; graceful-stop hook for ops and tests
    int max_workers = 4;
};

struct TierStats {
    long requests = 0;
    long failures = 0;
};

struct CampaignStats {
    std::map<std::string, TierStats> per_tier;
    std::map<Category, long> successes;
    double estimated_cost_eur = 0.0;
    bool resumed = false;
    bool stopped_early = false;  // stop_after_successes hook fired
};

// Journaled, idempotent campaign: every finished request appends one JSONL
// record {prompt_hash, category, index, status, attempt, tier, triplet?};
// resuming replays the journal and continues with fresh prompt indices.
// Prompt index k of a category deterministically derives its topic pair and
// parameters from the plan seed.
CampaignStats run_campaign(const CampaignPlan& plan, const TopicDistribution& dist,
                           const PromptLibrary& library, ChatClient& client);

// Successful triplets in journal order, deduplicated by prompt hash,
// clipped to the plan targets per category.
std::map<Category, std::vector<Triplet>> collect_campaign_output(const std::string& journal_path,
                                                                 const CampaignPlan& plan);

ModelRoute route_from_config(const nlohmann::json& cfg);

}  // namespace embedforge
