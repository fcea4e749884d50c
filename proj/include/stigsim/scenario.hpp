#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stigsim/agents.hpp"
#include "stigsim/types.hpp"

namespace stigsim {

// Raised on invalid scenario input; `field` is the JSON path of the offender.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

struct TaskTemplate {
    Amount reward = 100;
    Height deadline_offset = 30;  // deadline = post height + offset
    Height difficulty = 2;
    std::string capability;
};

struct ArrivalSchedule {
    std::uint64_t count = 0;       // tasks arriving after the initial batch
    Tick start_tick = 2;
    std::uint64_t rate_micro = 0;  // per-tick Bernoulli arrival probability
    TaskTemplate task;
};

struct PositionTemplate {
    Amount collateral = 150;
    Amount debt = 100;
};

struct PriceWalk {
    bool enabled = false;
    std::int64_t start_micro = kMicro;
    std::int64_t step_micro = 100000;
    Tick every_ticks = 2;
    std::uint64_t down_bias_micro = 500000;  // probability of a downward step
    std::int64_t floor_micro = 100000;
    std::int64_t cap_micro = 2 * kMicro;
    Tick freeze_tail_ticks = 3;
};

struct ContractParams {
    std::uint64_t stake_rate_micro = 100000;
    Height claim_timeout = 10;
    std::uint64_t decay_rate_micro = 0;
    Height decay_grace = 0;
    std::uint64_t liquidation_bonus_micro = 50000;
    std::string oracle_mode = "SINGLE";
    std::uint32_t oracle_feeds = 1;
    Amount pool_liquidity = 10000;
    Height commit_window = 2;
    Height reveal_window = 3;
    Amount commit_stake = 10;
};

struct BaselineParams {
    Tick msg_latency = 1;
    Tick negotiation_window = 1;
    Tick orch_latency = 1;
    std::uint32_t orch_capacity = 2;
    Tick orch_silent_from = 0;
    Tick orch_silent_to = 0;  // 0 disables the silence window
    Tick msg_latency_boost_from = 0;
    Tick msg_latency_boost_to = 0;
    Tick msg_latency_boost = 0;
};

struct AgentGroup {
    std::uint32_t count = 1;
    Strategy strategy = Strategy::HONEST;
    ObservationConfig observation;
    PredicateKind predicate_kind = PredicateKind::STATE_FLAG;
    Amount min_reward = 0;
    std::string capability;
    Amount gas_price = 10;
    Amount gas_bump = 1;
    Amount gas_budget = 0;
    Amount balance = 5000;
    Amount decoy_reward = 1;
    Height decoy_deadline_offset = 10;
};

struct ReorgEvent {
    Tick tick = 0;
    std::size_t depth = 0;
};

struct ScenarioConfig {
    std::uint64_t seed = 0;
    std::vector<CoordinationStyle> styles;
    PredicateKind pattern = PredicateKind::STATE_FLAG;
    Tick ticks = 0;
    Gas block_gas_limit = 100000;
    OrderingPolicy ordering = OrderingPolicy::GAS_PRICE_DESC;
    std::uint32_t partitions = 1;
    ContractParams contract;
    BaselineParams baseline;
    std::vector<AgentGroup> agent_groups;
    std::vector<TaskTemplate> initial_tasks;
    ArrivalSchedule arrivals;
    std::vector<PositionTemplate> initial_positions;
    Amount borrower_balance = 200;
    PriceWalk price_walk;
    std::vector<ReorgEvent> reorg_schedule;
    Amount poster_balance = 10000;
    Amount poster_gas_price = 50;
    Amount oracle_balance = 5000;
    Amount oracle_gas_price = 5;

    static ScenarioConfig from_json(const json& j);
    json to_json() const;
    std::string digest() const;

    // Expanded per-agent specs in ascending id order, with addresses and
    // partition boards assigned.
    std::vector<AgentSpec> roster() const;
};

// Built-in scenario templates for gen-config.
json template_config(const std::string& name);
std::vector<std::string> template_names();

}  // namespace stigsim
