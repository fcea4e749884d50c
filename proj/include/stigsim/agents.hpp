#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stigsim/ledger.hpp"
#include "stigsim/types.hpp"

namespace stigsim {

enum class Strategy { HONEST, GRIEFER, NON_REVEALER, SPAMMER, FRONTRUNNER };
enum class ObsMode { STORAGE_POLL, EVENT_SUBSCRIBE };
enum class PredicateKind { STATE_FLAG, EVENT_SIGNAL, THRESHOLD, COMMIT_REVEAL };
enum class CoordinationStyle { STIG, MSG, ORCH };

const char* to_string(Strategy s);
const char* to_string(CoordinationStyle s);
Strategy strategy_from_string(const std::string& s);
CoordinationStyle style_from_string(const std::string& s);

struct ObservationConfig {
    ObsMode mode = ObsMode::STORAGE_POLL;
    Height lag = 0;
    Height confirmations = 0;
    bool mempool_visible = false;
};

struct PredicateSpec {
    PredicateKind kind = PredicateKind::STATE_FLAG;
    Amount min_reward = 0;
    std::string capability;
};

struct AgentSpec {
    int id = 0;
    Address address;
    Strategy strategy = Strategy::HONEST;
    ObservationConfig observation;
    PredicateSpec predicate;
    Amount gas_price = 10;
    Amount gas_bump = 1;    // frontrunner priority increment over the victim
    Amount gas_budget = 0;  // max total gas spend; 0 = unlimited
    Amount starting_balance = 0;
    ContractId board;  // contract watched by this agent (its partition)
    // spammer decoys
    Amount decoy_reward = 1;
    Height decoy_deadline_offset = 10;
    Height decoy_difficulty = 1;
};

// Pure projection of the ledger visible to one agent at one tick.
struct AgentView {
    Height as_of = 0;        // storage snapshot height (tip - lag)
    Height exec_height = 0;  // height a transaction submitted now executes at
    json storage = json::object();
    std::vector<LogEntry> events;      // delivered, confirmation-filtered
    std::vector<Transaction> mempool;  // populated only when mempoolVisible
};

struct Intent {
    ContractId target;
    std::string call;
    json args = json::array();
    std::optional<Amount> gas_price_override;  // frontrunner bump

    std::string key() const;
};

// Agent memory + decision rules. Decisions are a deterministic function of
// (spec, view, memory); the engine owns nonce/gas finalization, budget
// enforcement, and the submission itself.
class AgentRuntime {
  public:
    AgentRuntime(AgentSpec spec, CoordinationStyle style);

    const AgentSpec& spec() const { return spec_; }

    // Builds the view and (for event subscribers) consumes newly delivered
    // log entries.
    AgentView observe(const Chain& chain, const Mempool& mempool, Tick tick);

    std::optional<Intent> decide(const AgentView& view);
    std::optional<Intent> frontrun(const AgentView& view);

    // Self-knowledge: agents learn the outcome of their own transactions.
    void on_receipt(const Transaction& tx, const Receipt& receipt);
    void on_dropped(const Transaction& tx);

    // Baseline channel inputs.
    void on_announcement(const json& task);          // MSG
    bool interested_in(const json& task) const;      // MSG negotiation predicate
    void on_win(std::uint64_t task_id);              // MSG negotiation outcome
    void on_assignment(const json& task);            // ORCH

    void note_submitted(const Intent& intent);

  private:
    std::optional<Intent> decide_stig(const AgentView& view);
    std::optional<Intent> decide_channel(const AgentView& view);  // MSG / ORCH
    std::optional<Intent> completion_intent(const AgentView& view);
    std::optional<Intent> claim_intent_from_storage(const AgentView& view);
    std::optional<Intent> claim_intent_from_events(const AgentView& view);
    std::optional<Intent> commit_reveal_intent(const AgentView& view);
    std::optional<Intent> poke_intent(const AgentView& view);
    std::optional<Intent> cleanup_intent(const AgentView& view);
    std::optional<Intent> threshold_intent(const AgentView& view);
    std::optional<Intent> spam_intent(const AgentView& view);

    bool inflight(const Intent& intent) const;
    Amount self_balance(const AgentView& view) const;

    AgentSpec spec_;
    CoordinationStyle style_;

    std::set<std::string> inflight_;
    // consumed log entries: (height, logIndex, txId)
    std::set<std::tuple<Height, std::uint32_t, std::string>> consumed_;

    struct TaskFacts {
        Amount reward = 0;
        Height deadline = 0;
        Height difficulty = 0;
        std::string capability;
        Amount stake_required = 0;
    };
    std::map<std::uint64_t, TaskFacts> known_tasks_;   // event/channel modes
    std::set<std::uint64_t> candidates_;               // event mode: claimable ids
    struct ClaimFacts {
        Height claim_block = 0;
        Height difficulty = 0;
        Height deadline = 0;
    };
    std::map<std::uint64_t, ClaimFacts> my_claims_;    // event/channel modes
    std::vector<std::uint64_t> won_queue_;             // MSG wins / ORCH assignments

    struct CommitMemory {
        std::uint64_t task_id = 0;
        json action_args;
        std::string salt_hex;
        bool confirmed = false;  // commit receipt seen
        bool revealed = false;
    };
    std::map<std::uint64_t, CommitMemory> commit_memory_;  // by round
};

// Deterministic per-agent salt for the commit-reveal overlay. Real deployments
// draw this at random; the simulator derives it so runs are replayable.
std::string derive_salt_hex(const Address& agent, std::uint64_t round, std::uint64_t task_id);

}  // namespace stigsim
