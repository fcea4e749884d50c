#include "stigsim/scenario.hpp"

#include <algorithm>

#include "stigsim/canonical.hpp"

namespace stigsim {

namespace {

// Typed field access with path-carrying errors.
template <typename T>
T field(const json& j, const std::string& path, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path.empty() ? key : path + "." + key, "wrong type");
    }
}

template <typename T>
T require_field(const json& j, const std::string& path, const std::string& key) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!j.contains(key)) throw ConfigError(full, "missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(full, "wrong type");
    }
}

std::string address_for_agent(int id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "agent-%03d", id);
    return buf;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
    ScenarioConfig cfg;
    cfg.seed = require_field<std::uint64_t>(j, "", "seed");
    cfg.ticks = require_field<Tick>(j, "", "ticks");
    if (cfg.ticks == 0) throw ConfigError("ticks", "must be >= 1");

    const auto styles = require_field<std::vector<std::string>>(j, "", "styles");
    if (styles.empty()) throw ConfigError("styles", "must list at least one style");
    for (const auto& s : styles) {
        try {
            cfg.styles.push_back(style_from_string(s));
        } catch (const std::invalid_argument&) {
            throw ConfigError("styles", "unknown style " + s);
        }
    }

    const auto pattern = field<std::string>(j, "", "pattern", "STATE_FLAG");
    if (pattern == "STATE_FLAG") cfg.pattern = PredicateKind::STATE_FLAG;
    else if (pattern == "EVENT_SIGNAL") cfg.pattern = PredicateKind::EVENT_SIGNAL;
    else if (pattern == "THRESHOLD") cfg.pattern = PredicateKind::THRESHOLD;
    else if (pattern == "COMMIT_REVEAL") cfg.pattern = PredicateKind::COMMIT_REVEAL;
    else throw ConfigError("pattern", "unknown pattern " + pattern);

    cfg.block_gas_limit = field<Gas>(j, "", "blockGasLimit", 100000);
    if (cfg.block_gas_limit <= 0) throw ConfigError("blockGasLimit", "must be > 0");
    const auto ordering = field<std::string>(j, "", "orderingPolicy", "GAS_PRICE_DESC");
    if (ordering == "GAS_PRICE_DESC") cfg.ordering = OrderingPolicy::GAS_PRICE_DESC;
    else if (ordering == "FIFO") cfg.ordering = OrderingPolicy::FIFO;
    else throw ConfigError("orderingPolicy", "unknown policy " + ordering);
    cfg.partitions = field<std::uint32_t>(j, "", "partitions", 1);
    if (cfg.partitions == 0) throw ConfigError("partitions", "must be >= 1");

    if (j.contains("contract")) {
        const auto& c = j.at("contract");
        cfg.contract.stake_rate_micro = field<std::uint64_t>(c, "contract", "stakeRateMicro", 100000);
        cfg.contract.claim_timeout = field<Height>(c, "contract", "claimTimeoutBlocks", 10);
        cfg.contract.decay_rate_micro = field<std::uint64_t>(c, "contract", "decayRateMicro", 0);
        cfg.contract.decay_grace = field<Height>(c, "contract", "decayGraceBlocks", 0);
        cfg.contract.liquidation_bonus_micro =
            field<std::uint64_t>(c, "contract", "liquidationBonusMicro", 50000);
        cfg.contract.oracle_mode = field<std::string>(c, "contract", "oracleMode", "SINGLE");
        if (cfg.contract.oracle_mode != "SINGLE" && cfg.contract.oracle_mode != "MEDIAN")
            throw ConfigError("contract.oracleMode", "must be SINGLE or MEDIAN");
        cfg.contract.oracle_feeds = field<std::uint32_t>(c, "contract", "oracleFeeds", 1);
        if (cfg.contract.oracle_feeds == 0) throw ConfigError("contract.oracleFeeds", "must be >= 1");
        if (cfg.contract.oracle_mode == "MEDIAN" && cfg.contract.oracle_feeds % 2 == 0)
            throw ConfigError("contract.oracleFeeds", "MEDIAN mode needs an odd feed count");
        cfg.contract.pool_liquidity = field<Amount>(c, "contract", "poolLiquidity", 10000);
        cfg.contract.commit_window = field<Height>(c, "contract", "commitWindowBlocks", 2);
        cfg.contract.reveal_window = field<Height>(c, "contract", "revealWindowBlocks", 3);
        if (cfg.contract.commit_window == 0) throw ConfigError("contract.commitWindowBlocks", "must be >= 1");
        if (cfg.contract.reveal_window == 0) throw ConfigError("contract.revealWindowBlocks", "must be >= 1");
        cfg.contract.commit_stake = field<Amount>(c, "contract", "commitStake", 10);
    }

    if (j.contains("baseline")) {
        const auto& b = j.at("baseline");
        cfg.baseline.msg_latency = field<Tick>(b, "baseline", "msgLatencyTicks", 1);
        cfg.baseline.negotiation_window = field<Tick>(b, "baseline", "negotiationWindowTicks", 1);
        if (cfg.baseline.negotiation_window == 0)
            throw ConfigError("baseline.negotiationWindowTicks", "must be >= 1");
        cfg.baseline.orch_latency = field<Tick>(b, "baseline", "orchLatencyTicks", 1);
        cfg.baseline.orch_capacity = field<std::uint32_t>(b, "baseline", "orchCapacity", 2);
        if (cfg.baseline.orch_capacity == 0) throw ConfigError("baseline.orchCapacity", "must be >= 1");
        cfg.baseline.orch_silent_from = field<Tick>(b, "baseline", "orchSilentFromTick", 0);
        cfg.baseline.orch_silent_to = field<Tick>(b, "baseline", "orchSilentToTick", 0);
        cfg.baseline.msg_latency_boost_from = field<Tick>(b, "baseline", "msgLatencyBoostFromTick", 0);
        cfg.baseline.msg_latency_boost_to = field<Tick>(b, "baseline", "msgLatencyBoostToTick", 0);
        cfg.baseline.msg_latency_boost = field<Tick>(b, "baseline", "msgLatencyBoostTicks", 0);
    }

    const auto agents = require_field<json>(j, "", "agents");
    if (!agents.is_array()) throw ConfigError("agents", "must be an array of groups");
    std::size_t idx = 0;
    for (const auto& g : agents) {
        const std::string path = "agents[" + std::to_string(idx++) + "]";
        AgentGroup group;
        group.count = field<std::uint32_t>(g, path, "count", 1);
        const auto strategy = field<std::string>(g, path, "strategy", "HONEST");
        try {
            group.strategy = strategy_from_string(strategy);
        } catch (const std::invalid_argument&) {
            throw ConfigError(path + ".strategy", "unknown strategy " + strategy);
        }
        if (g.contains("observation")) {
            const auto& o = g.at("observation");
            const auto mode = field<std::string>(o, path + ".observation", "mode", "STORAGE_POLL");
            if (mode == "STORAGE_POLL") group.observation.mode = ObsMode::STORAGE_POLL;
            else if (mode == "EVENT_SUBSCRIBE") group.observation.mode = ObsMode::EVENT_SUBSCRIBE;
            else throw ConfigError(path + ".observation.mode", "unknown mode " + mode);
            group.observation.lag = field<Height>(o, path + ".observation", "lagBlocks", 0);
            group.observation.confirmations =
                field<Height>(o, path + ".observation", "confirmationBlocks", 0);
            group.observation.mempool_visible =
                field<bool>(o, path + ".observation", "mempoolVisible", false);
        }
        if (group.strategy == Strategy::FRONTRUNNER) group.observation.mempool_visible = true;
        group.min_reward = field<Amount>(g, path, "minReward", 0);
        group.capability = field<std::string>(g, path, "capability", "");
        group.gas_price = field<Amount>(g, path, "gasPrice", 10);
        if (group.gas_price < 0) throw ConfigError(path + ".gasPrice", "must be >= 0");
        group.gas_bump = field<Amount>(g, path, "gasBump", 1);
        group.gas_budget = field<Amount>(g, path, "gasBudget", 0);
        group.balance = field<Amount>(g, path, "balance", 5000);
        group.decoy_reward = field<Amount>(g, path, "decoyReward", 1);
        group.decoy_deadline_offset = field<Height>(g, path, "decoyDeadlineOffset", 10);
        cfg.agent_groups.push_back(std::move(group));
    }

    if (j.contains("tasks")) {
        const auto& t = j.at("tasks");
        if (t.contains("initial")) {
            std::size_t ti = 0;
            for (const auto& task : t.at("initial")) {
                const std::string path = "tasks.initial[" + std::to_string(ti++) + "]";
                TaskTemplate tmpl;
                tmpl.reward = field<Amount>(task, path, "reward", 100);
                if (tmpl.reward <= 0) throw ConfigError(path + ".reward", "must be > 0");
                tmpl.deadline_offset = field<Height>(task, path, "deadlineOffsetBlocks", 30);
                tmpl.difficulty = field<Height>(task, path, "difficultyBlocks", 2);
                tmpl.capability = field<std::string>(task, path, "capability", "");
                cfg.initial_tasks.push_back(tmpl);
            }
        }
        if (t.contains("arrivals")) {
            const auto& a = t.at("arrivals");
            cfg.arrivals.count = field<std::uint64_t>(a, "tasks.arrivals", "count", 0);
            cfg.arrivals.start_tick = field<Tick>(a, "tasks.arrivals", "startTick", 2);
            cfg.arrivals.rate_micro = field<std::uint64_t>(a, "tasks.arrivals", "rateMicro", 500000);
            cfg.arrivals.task.reward = field<Amount>(a, "tasks.arrivals", "reward", 100);
            cfg.arrivals.task.deadline_offset =
                field<Height>(a, "tasks.arrivals", "deadlineOffsetBlocks", 30);
            cfg.arrivals.task.difficulty = field<Height>(a, "tasks.arrivals", "difficultyBlocks", 2);
            cfg.arrivals.task.capability = field<std::string>(a, "tasks.arrivals", "capability", "");
        }
    }

    if (j.contains("positions")) {
        const auto& p = j.at("positions");
        if (p.contains("initial")) {
            std::size_t pi = 0;
            for (const auto& pos : p.at("initial")) {
                const std::string path = "positions.initial[" + std::to_string(pi++) + "]";
                PositionTemplate tmpl;
                tmpl.collateral = field<Amount>(pos, path, "collateral", 150);
                tmpl.debt = field<Amount>(pos, path, "debt", 100);
                if (tmpl.collateral < 0) throw ConfigError(path + ".collateral", "must be >= 0");
                if (tmpl.debt < 0) throw ConfigError(path + ".debt", "must be >= 0");
                cfg.initial_positions.push_back(tmpl);
            }
        }
        cfg.borrower_balance = field<Amount>(p, "positions", "borrowerBalance", 200);
    }

    if (j.contains("priceWalk")) {
        const auto& w = j.at("priceWalk");
        cfg.price_walk.enabled = field<bool>(w, "priceWalk", "enabled", false);
        cfg.price_walk.start_micro = field<std::int64_t>(w, "priceWalk", "startMicro", kMicro);
        cfg.price_walk.step_micro = field<std::int64_t>(w, "priceWalk", "stepMicro", 100000);
        cfg.price_walk.every_ticks = field<Tick>(w, "priceWalk", "everyTicks", 2);
        if (cfg.price_walk.every_ticks == 0) throw ConfigError("priceWalk.everyTicks", "must be >= 1");
        cfg.price_walk.down_bias_micro = field<std::uint64_t>(w, "priceWalk", "downBiasMicro", 500000);
        cfg.price_walk.floor_micro = field<std::int64_t>(w, "priceWalk", "floorMicro", 100000);
        cfg.price_walk.cap_micro = field<std::int64_t>(w, "priceWalk", "capMicro", 2 * kMicro);
        cfg.price_walk.freeze_tail_ticks = field<Tick>(w, "priceWalk", "freezeTailTicks", 3);
        if (cfg.price_walk.start_micro <= 0) throw ConfigError("priceWalk.startMicro", "must be > 0");
    }

    if (j.contains("reorgSchedule")) {
        std::size_t ri = 0;
        for (const auto& r : j.at("reorgSchedule")) {
            const std::string path = "reorgSchedule[" + std::to_string(ri++) + "]";
            ReorgEvent ev;
            ev.tick = require_field<Tick>(r, path, "tick");
            ev.depth = require_field<std::size_t>(r, path, "depth");
            if (ev.depth == 0) throw ConfigError(path + ".depth", "must be >= 1");
            cfg.reorg_schedule.push_back(ev);
        }
    }

    cfg.poster_balance = field<Amount>(j, "", "posterBalance", 10000);
    cfg.poster_gas_price = field<Amount>(j, "", "posterGasPrice", 20);
    cfg.oracle_balance = field<Amount>(j, "", "oracleBalance", 5000);
    cfg.oracle_gas_price = field<Amount>(j, "", "oracleGasPrice", 5);
    return cfg;
}

json ScenarioConfig::to_json() const {
    json styles_json = json::array();
    for (auto s : styles) styles_json.push_back(to_string(s));

    const char* pattern_name = pattern == PredicateKind::STATE_FLAG    ? "STATE_FLAG"
                               : pattern == PredicateKind::EVENT_SIGNAL ? "EVENT_SIGNAL"
                               : pattern == PredicateKind::THRESHOLD    ? "THRESHOLD"
                                                                        : "COMMIT_REVEAL";

    json agents_json = json::array();
    for (const auto& g : agent_groups) {
        agents_json.push_back(json{
            {"count", g.count},
            {"strategy", to_string(g.strategy)},
            {"observation",
             json{{"mode", g.observation.mode == ObsMode::STORAGE_POLL ? "STORAGE_POLL"
                                                                        : "EVENT_SUBSCRIBE"},
                  {"lagBlocks", g.observation.lag},
                  {"confirmationBlocks", g.observation.confirmations},
                  {"mempoolVisible", g.observation.mempool_visible}}},
            {"minReward", g.min_reward},
            {"capability", g.capability},
            {"gasPrice", g.gas_price},
            {"gasBump", g.gas_bump},
            {"gasBudget", g.gas_budget},
            {"balance", g.balance},
            {"decoyReward", g.decoy_reward},
            {"decoyDeadlineOffset", g.decoy_deadline_offset}});
    }

    json initial_tasks_json = json::array();
    for (const auto& t : initial_tasks)
        initial_tasks_json.push_back(json{{"reward", t.reward},
                                          {"deadlineOffsetBlocks", t.deadline_offset},
                                          {"difficultyBlocks", t.difficulty},
                                          {"capability", t.capability}});

    json positions_json = json::array();
    for (const auto& p : initial_positions)
        positions_json.push_back(json{{"collateral", p.collateral}, {"debt", p.debt}});

    json reorgs_json = json::array();
    for (const auto& r : reorg_schedule)
        reorgs_json.push_back(json{{"tick", r.tick}, {"depth", r.depth}});

    return json{
        {"seed", seed},
        {"styles", styles_json},
        {"pattern", pattern_name},
        {"ticks", ticks},
        {"blockGasLimit", block_gas_limit},
        {"orderingPolicy", ordering == OrderingPolicy::GAS_PRICE_DESC ? "GAS_PRICE_DESC" : "FIFO"},
        {"partitions", partitions},
        {"contract",
         json{{"stakeRateMicro", contract.stake_rate_micro},
              {"claimTimeoutBlocks", contract.claim_timeout},
              {"decayRateMicro", contract.decay_rate_micro},
              {"decayGraceBlocks", contract.decay_grace},
              {"liquidationBonusMicro", contract.liquidation_bonus_micro},
              {"oracleMode", contract.oracle_mode},
              {"oracleFeeds", contract.oracle_feeds},
              {"poolLiquidity", contract.pool_liquidity},
              {"commitWindowBlocks", contract.commit_window},
              {"revealWindowBlocks", contract.reveal_window},
              {"commitStake", contract.commit_stake}}},
        {"baseline",
         json{{"msgLatencyTicks", baseline.msg_latency},
              {"negotiationWindowTicks", baseline.negotiation_window},
              {"orchLatencyTicks", baseline.orch_latency},
              {"orchCapacity", baseline.orch_capacity},
              {"orchSilentFromTick", baseline.orch_silent_from},
              {"orchSilentToTick", baseline.orch_silent_to},
              {"msgLatencyBoostFromTick", baseline.msg_latency_boost_from},
              {"msgLatencyBoostToTick", baseline.msg_latency_boost_to},
              {"msgLatencyBoostTicks", baseline.msg_latency_boost}}},
        {"agents", agents_json},
        {"tasks",
         json{{"initial", initial_tasks_json},
              {"arrivals", json{{"count", arrivals.count},
                                {"startTick", arrivals.start_tick},
                                {"rateMicro", arrivals.rate_micro},
                                {"reward", arrivals.task.reward},
                                {"deadlineOffsetBlocks", arrivals.task.deadline_offset},
                                {"difficultyBlocks", arrivals.task.difficulty},
                                {"capability", arrivals.task.capability}}}}},
        {"positions", json{{"initial", positions_json}, {"borrowerBalance", borrower_balance}}},
        {"priceWalk",
         json{{"enabled", price_walk.enabled},
              {"startMicro", price_walk.start_micro},
              {"stepMicro", price_walk.step_micro},
              {"everyTicks", price_walk.every_ticks},
              {"downBiasMicro", price_walk.down_bias_micro},
              {"floorMicro", price_walk.floor_micro},
              {"capMicro", price_walk.cap_micro},
              {"freezeTailTicks", price_walk.freeze_tail_ticks}}},
        {"reorgSchedule", reorgs_json},
        {"posterBalance", poster_balance},
        {"posterGasPrice", poster_gas_price},
        {"oracleBalance", oracle_balance},
        {"oracleGasPrice", oracle_gas_price}};
}

std::string ScenarioConfig::digest() const { return canonical_digest(to_json()); }

std::vector<AgentSpec> ScenarioConfig::roster() const {
    std::vector<AgentSpec> out;
    int id = 0;
    for (const auto& g : agent_groups) {
        for (std::uint32_t i = 0; i < g.count; ++i) {
            AgentSpec spec;
            spec.id = id;
            spec.address = address_for_agent(id);
            spec.strategy = g.strategy;
            spec.observation = g.observation;
            spec.predicate.kind = pattern;
            spec.predicate.min_reward = g.min_reward;
            spec.predicate.capability = g.capability;
            spec.gas_price = g.gas_price;
            spec.gas_bump = g.gas_bump;
            spec.gas_budget = g.gas_budget;
            spec.starting_balance = g.balance;
            spec.decoy_reward = g.decoy_reward;
            spec.decoy_deadline_offset = g.decoy_deadline_offset;
            // Event-Signal agents are event subscribers by definition;
            // frontrunners keep the storage view they rank copy targets with.
            if (pattern == PredicateKind::EVENT_SIGNAL && g.strategy != Strategy::FRONTRUNNER)
                spec.observation.mode = ObsMode::EVENT_SUBSCRIBE;
            const std::uint32_t partition = std::uint32_t(id) % partitions;
            spec.board = (pattern == PredicateKind::THRESHOLD ? "pool-" : "board-") +
                         std::to_string(partition);
            out.push_back(std::move(spec));
            ++id;
        }
    }
    return out;
}

}  // namespace stigsim
