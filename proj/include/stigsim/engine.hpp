#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stigsim/agents.hpp"
#include "stigsim/baselines.hpp"
#include "stigsim/ledger.hpp"
#include "stigsim/metrics.hpp"
#include "stigsim/rng.hpp"
#include "stigsim/scenario.hpp"

namespace stigsim {

// Schedules derived once per scenario from the seed's named streams, shared
// verbatim by every style run so the comparison is paired.
struct SchedulePlan {
    struct TaskArrival {
        Tick tick = 0;
        TaskTemplate task;
        std::uint32_t board = 0;
    };
    struct PriceUpdate {
        Tick tick = 0;
        std::size_t feed = 0;
        std::int64_t price_micro = 0;
    };
    std::vector<TaskArrival> tasks;
    std::vector<PriceUpdate> prices;
};

SchedulePlan plan_schedule(const ScenarioConfig& cfg);

// Engine-side record of one event delivery to one agent (for reorg-safety
// audits). The tick disambiguates chain instances: a reorg replay can land a
// transaction back at its old coordinates.
struct DeliveryRecord {
    int agent_id = 0;
    Height confirmations_required = 0;
    Height block_height = 0;
    std::uint32_t log_index = 0;
    std::string tx_id;
    std::string event_name;
    Tick tick = 0;
};

// Record of an event orphaned by a reorg, with its depth at orphaning time.
struct OrphanRecord {
    Height block_height = 0;
    std::uint32_t log_index = 0;
    std::string tx_id;
    Height confirmations_at_orphan = 0;
    Tick tick = 0;
};

struct StyleRunResult {
    CoordinationStyle style = CoordinationStyle::STIG;
    MetricsReport metrics;
    std::vector<std::string> trace_lines;
    std::string trace_digest;
    std::vector<std::pair<Height, std::string>> block_digests;
    std::string final_state_digest;
    Amount genesis_total = 0;

    struct Audit {
        std::uint64_t conservation_violations = 0;
        std::uint64_t skipped_reorgs = 0;
        std::vector<DeliveryRecord> deliveries;
        std::vector<OrphanRecord> orphans;
        std::vector<Transaction> dropped_txs;
        std::map<Address, Amount> gas_spend;  // gasUsed * gasPrice per sender
    } audit;
};

struct RunHooks {
    // called after every sealed block (and after reorg rollbacks), with the
    // chain in its current canonical form
    std::function<void(CoordinationStyle, const Chain&, Tick)> on_block;
};

struct RunResult {
    std::vector<StyleRunResult> styles;
    std::string config_digest;
};

RunResult run_scenario(const ScenarioConfig& cfg, const RunHooks* hooks = nullptr);

// (seed, streamName) -> named deterministic stream; see RngStream.
inline RngStream rng_stream(std::uint64_t seed, std::string_view name) { return RngStream(seed, name); }

}  // namespace stigsim
