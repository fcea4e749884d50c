#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "stigsim/contracts.hpp"
#include "stigsim/types.hpp"

namespace stigsim {

// The stigmergic medium: accounts, contract storage, height, accumulated
// fees. Deterministic and value-copyable (contracts are cloned).
struct WorldState {
    std::map<Address, AccountState> accounts;
    std::map<ContractId, std::unique_ptr<Contract>> contracts;
    Height height = 0;
    Amount fee_sink = 0;

    WorldState() = default;
    WorldState(const WorldState& other);
    WorldState& operator=(const WorldState& other);
    WorldState(WorldState&&) = default;
    WorldState& operator=(WorldState&&) = default;

    json to_json() const;
    std::string digest() const;
    // Total token supply visible to conservation checks: account balances
    // (contract escrow lives in contract accounts) plus the fee sink.
    Amount total_funds() const;
};

enum class SubmitResult { ACCEPTED, REPLACED, REJECTED_DUPLICATE, REJECTED_MALFORMED };
const char* to_string(SubmitResult r);

class Mempool {
  public:
    explicit Mempool(OrderingPolicy policy = OrderingPolicy::GAS_PRICE_DESC) : policy_(policy) {}

    SubmitResult submit(const Transaction& tx);

    // Priority order under the active policy. GAS_PRICE_DESC: gasPrice
    // descending, ties by arrivalTick, sender, nonce; FIFO: arrivalTick
    // ascending with the same remaining tie chain. Per-sender nonce order is
    // always respected regardless of per-transaction priorities.
    std::vector<Transaction> ordered() const;

    const std::vector<Transaction>& pending() const { return pending_; }
    std::size_t size() const { return pending_.size(); }
    bool empty() const { return pending_.empty(); }
    void erase(const std::string& tx_id);
    std::size_t pending_count(const Address& sender) const;
    OrderingPolicy policy() const { return policy_; }

  private:
    OrderingPolicy policy_;
    std::vector<Transaction> pending_;
};

// Total deterministic transition: every transaction yields a receipt, and
// DROPPED_INVALID leaves the state untouched.
Receipt apply_transaction(WorldState& state, const Transaction& tx);

// Free view read against a state snapshot; no gas, no mutation.
json read_view(const WorldState& state, const ContractId& contract, const std::string& view_name,
               const json& args);

struct ReorgResult {
    std::vector<Transaction> orphaned_txs;   // in original chain order
    std::vector<LogEntry> orphaned_events;   // with their pre-reorg heights
    Height new_tip = 0;
};

class ReorgError : public std::runtime_error {
  public:
    explicit ReorgError(const std::string& code) : std::runtime_error(code) {}
};

// Canonical chain with per-height state snapshots (needed for lagged
// observation and reorg rollback). Height 0 is genesis; block h is the h-th
// sealed block.
class Chain {
  public:
    explicit Chain(WorldState genesis);

    Height tip() const { return states_.back().height; }
    const WorldState& state() const { return states_.back(); }
    const WorldState& state_at(Height h) const;
    const std::vector<Block>& blocks() const { return blocks_; }

    // Seals one block: takes mempool transactions in priority order, skips
    // (leaves pending) any whose gasLimit exceeds remaining block gas,
    // removes invalid ones, applies the rest.
    const Block& seal_block(Mempool& mempool, Gas block_gas_limit, Tick tick,
                            std::vector<Transaction>* dropped = nullptr);

    // Orphans the last `depth` blocks, rolls state back, and returns the
    // orphaned transactions (for mempool re-entry) and their events.
    ReorgResult inject_reorg(std::size_t depth, Tick tick);

    // Canonical event record L over the current chain.
    std::vector<LogEntry> canonical_logs() const;

  private:
    std::vector<WorldState> states_;  // states_[h] = post-state of height h
    std::vector<Block> blocks_;       // blocks_[i] has height i + 1
    std::string genesis_digest_;
};

}  // namespace stigsim
