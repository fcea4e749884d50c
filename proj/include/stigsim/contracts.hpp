#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stigsim/types.hpp"

namespace stigsim {

struct WorldState;

// Thrown by contract code when a guard fails; the ledger converts it into a
// REVERT receipt and rolls back every effect of the call.
struct RevertError {
    std::string reason;
};

// Thrown by the call context when the accumulated gas would exceed the
// transaction gas limit.
struct OutOfGasError {};

// Raised by read_view for unknown views/contracts and malformed view args.
class ViewError : public std::runtime_error {
  public:
    explicit ViewError(const std::string& code) : std::runtime_error(code) {}
};

// Execution environment handed to contract code for one call. Balance moves
// are journaled and undone on failure; storage rollback is handled by the
// ledger via contract cloning. Gas is charged as storage is touched and
// events are emitted.
class CallContext {
  public:
    CallContext(WorldState& state, const Address& sender, Height height, Gas gas_limit);

    const Address& sender() const { return sender_; }
    Height height() const { return height_; }

    void charge_read(int n = 1) { charge(kGasStorageRead * n); }
    void charge_write(int n = 1) { charge(kGasStorageWrite * n); }

    // Effective balance: committed state minus journaled debits plus credits.
    Amount balance(const Address& account) const;

    // Moves funds immediately and records an undo entry. Throws RevertError
    // with `reason` when the source balance is insufficient.
    void transfer(const Address& from, const Address& to, Amount amount, const std::string& reason);

    void emit(const std::string& event_name, json fields);

    void require(bool cond, const std::string& reason) {
        if (!cond) throw RevertError{reason};
    }

    Gas gas_used() const { return gas_used_; }
    std::vector<LogEntry>& events() { return events_; }
    void rollback_transfers();
    void check_limit();

  private:
    void charge(Gas amount);

    WorldState& state_;
    Address sender_;
    Height height_;
    Gas gas_limit_;
    Gas gas_used_ = kGasBase;
    std::vector<LogEntry> events_;
    struct TransferRecord {
        Address from;
        Address to;
        Amount amount;
    };
    std::vector<TransferRecord> journal_;
};

class Contract {
  public:
    explicit Contract(ContractId id) : id_(std::move(id)) {}
    virtual ~Contract() = default;

    const ContractId& id() const { return id_; }

    // Dispatch a state-changing call. Guard failures throw RevertError; the
    // ledger owns receipt construction and rollback.
    virtual void call(CallContext& ctx, const std::string& name, const json& args) = 0;

    // Pure read, no gas. `height` is the height of the state snapshot the
    // view runs against. Throws ViewError("UNKNOWN_VIEW") for unknown names.
    virtual json view(const std::string& name, const json& args, Height height) const = 0;

    virtual json storage_json() const = 0;
    virtual std::unique_ptr<Contract> clone() const = 0;

  private:
    ContractId id_;
};

// --- TaskBoard -------------------------------------------------------------

enum class TaskStatus { OPEN, CLAIMED, DONE, EXPIRED };
const char* to_string(TaskStatus s);

struct Task {
    std::uint64_t id = 0;
    Amount reward = 0;
    Height deadline = 0;
    Height difficulty = 0;  // work-blocks between claim and valid completion
    std::string required_capability;
    TaskStatus status = TaskStatus::OPEN;
    Address poster;
    Address claimant;
    Height post_block = 0;
    Height claim_block = 0;
    Amount stake = 0;       // held while CLAIMED
    Amount bonus_pool = 0;  // timeout-slash halves routed back into the task

    json to_json() const;
};

struct TaskBoardParams {
    std::uint64_t stake_rate_micro = 100000;  // claim stake as fraction of reward
    Height claim_timeout = 10;                // 0 disables timeout reversion
    std::uint64_t decay_rate_micro = 0;       // 0 disables reward decay
    Height decay_grace = 0;
    // commit-reveal overlay; claims must go through commit/reveal when enabled
    bool commit_reveal = false;
    Height commit_window = 2;
    Height reveal_window = 3;
    Amount commit_stake = 10;
    Height phase_start = 1;  // height at which round 0's commit window opens
};

struct CommitRecord {
    Address committer;
    std::string commit_hash_hex;
    Amount stake = 0;
    bool revealed = false;
};

// Bit-exact commitment hash: SHA-256 over taskId (8-byte BE) || round
// (8-byte BE) || action name UTF-8 || 0x00 || canonical-JSON args UTF-8 ||
// salt (exactly 32 bytes).
std::string commit_hash_hex(std::uint64_t task_id, std::uint64_t round, const std::string& action,
                            const json& args, const std::vector<std::uint8_t>& salt);

class TaskBoard : public Contract {
  public:
    TaskBoard(ContractId id, TaskBoardParams params);

    void call(CallContext& ctx, const std::string& name, const json& args) override;
    json view(const std::string& name, const json& args, Height height) const override;
    json storage_json() const override;
    std::unique_ptr<Contract> clone() const override;

    const TaskBoardParams& params() const { return params_; }
    const std::map<std::uint64_t, Task>& tasks() const { return tasks_; }

    Amount stake_amount(Amount reward) const;
    Amount current_reward(const Task& task, Height height) const;

    // Round arithmetic for the commit-reveal overlay.
    std::uint64_t round_at(Height h) const;
    enum class Phase { COMMIT, REVEAL, CLOSED };
    Phase phase_at(Height h) const;
    Height reveal_end(std::uint64_t round) const;

  private:
    void post_task(CallContext& ctx, const json& args);
    void claim_task(CallContext& ctx, const json& args);
    void do_claim(CallContext& ctx, std::uint64_t task_id, Amount stake);
    void submit_completion(CallContext& ctx, const json& args);
    void poke_task(CallContext& ctx, const json& args);
    void commit(CallContext& ctx, const json& args);
    void reveal(CallContext& ctx, const json& args);
    void cleanup_round(CallContext& ctx, const json& args);

    Task& require_task(CallContext& ctx, std::uint64_t id);

    TaskBoardParams params_;
    std::map<std::uint64_t, Task> tasks_;
    std::uint64_t next_task_id_ = 1;
    // round -> committer -> record
    std::map<std::uint64_t, std::map<Address, CommitRecord>> commits_;
};

// --- LendingPool -----------------------------------------------------------

enum class OracleMode { SINGLE, MEDIAN };

struct Position {
    std::uint64_t id = 0;
    Address owner;
    Amount collateral = 0;
    Amount debt = 0;
    bool closed = false;

    json to_json() const;
};

struct LendingPoolParams {
    std::uint64_t liquidation_bonus_micro = 50000;
    OracleMode oracle_mode = OracleMode::SINGLE;
    std::vector<Address> oracle_accounts;          // feed index -> authorized sender
    std::vector<std::int64_t> initial_feeds_micro; // per-feed starting price
};

class LendingPool : public Contract {
  public:
    LendingPool(ContractId id, LendingPoolParams params);

    void call(CallContext& ctx, const std::string& name, const json& args) override;
    json view(const std::string& name, const json& args, Height height) const override;
    json storage_json() const override;
    std::unique_ptr<Contract> clone() const override;

    std::int64_t effective_price_micro() const;
    // +infinity (debt == 0) is reported as INT64_MAX micro.
    std::int64_t health_micro(const Position& p) const;
    const std::map<std::uint64_t, Position>& positions() const { return positions_; }

  private:
    void open_position(CallContext& ctx, const json& args);
    void set_price(CallContext& ctx, const json& args);
    void liquidate(CallContext& ctx, const json& args);

    LendingPoolParams params_;
    std::vector<std::int64_t> feeds_micro_;
    std::map<std::uint64_t, Position> positions_;
    std::uint64_t next_position_id_ = 1;
};

}  // namespace stigsim
