#include "stigsim/ledger.hpp"

#include <algorithm>
#include <cassert>

#include "stigsim/canonical.hpp"

namespace stigsim {

const char* to_string(TxStatus s) {
    switch (s) {
        case TxStatus::SUCCESS: return "SUCCESS";
        case TxStatus::REVERT: return "REVERT";
        case TxStatus::OUT_OF_GAS: return "OUT_OF_GAS";
        case TxStatus::DROPPED_INVALID: return "DROPPED_INVALID";
    }
    return "?";
}

TxStatus tx_status_from_string(const std::string& s) {
    if (s == "SUCCESS") return TxStatus::SUCCESS;
    if (s == "REVERT") return TxStatus::REVERT;
    if (s == "OUT_OF_GAS") return TxStatus::OUT_OF_GAS;
    if (s == "DROPPED_INVALID") return TxStatus::DROPPED_INVALID;
    throw std::invalid_argument("unknown tx status: " + s);
}

const char* to_string(SubmitResult r) {
    switch (r) {
        case SubmitResult::ACCEPTED: return "ACCEPTED";
        case SubmitResult::REPLACED: return "REPLACED";
        case SubmitResult::REJECTED_DUPLICATE: return "REJECTED_DUPLICATE";
        case SubmitResult::REJECTED_MALFORMED: return "REJECTED_MALFORMED";
    }
    return "?";
}

json Transaction::to_json() const {
    return json{{"txId", tx_id},       {"sender", sender},     {"target", target},
                {"call", call_name},   {"args", args},         {"gasLimit", gas_limit},
                {"gasPrice", gas_price}, {"nonce", nonce},     {"arrivalTick", arrival_tick}};
}

json LogEntry::to_json() const {
    return json{{"contract", contract}, {"name", event_name},   {"fields", fields},
                {"height", block_height}, {"txId", tx_id},      {"logIndex", log_index}};
}

// --- WorldState -------------------------------------------------------------

WorldState::WorldState(const WorldState& other)
    : accounts(other.accounts), height(other.height), fee_sink(other.fee_sink) {
    for (const auto& [id, c] : other.contracts) contracts.emplace(id, c->clone());
}

WorldState& WorldState::operator=(const WorldState& other) {
    if (this == &other) return *this;
    accounts = other.accounts;
    height = other.height;
    fee_sink = other.fee_sink;
    contracts.clear();
    for (const auto& [id, c] : other.contracts) contracts.emplace(id, c->clone());
    return *this;
}

json WorldState::to_json() const {
    json accounts_json = json::object();
    for (const auto& [addr, acct] : accounts)
        accounts_json[addr] = json{{"balance", acct.balance}, {"nonce", acct.nonce}};
    json contracts_json = json::object();
    for (const auto& [id, c] : contracts) contracts_json[id] = c->storage_json();
    return json{{"accounts", accounts_json},
                {"contracts", contracts_json},
                {"feeSink", fee_sink},
                {"height", height}};
}

std::string WorldState::digest() const { return canonical_digest(to_json()); }

Amount WorldState::total_funds() const {
    Amount total = fee_sink;
    for (const auto& [addr, acct] : accounts) total += acct.balance;
    return total;
}

// --- Mempool ----------------------------------------------------------------

SubmitResult Mempool::submit(const Transaction& tx) {
    if (tx.gas_limit <= 0 || tx.gas_price < 0) return SubmitResult::REJECTED_MALFORMED;
    for (auto it = pending_.begin(); it != pending_.end(); ++it) {
        if (it->sender == tx.sender && it->nonce == tx.nonce) {
            if (tx.gas_price > it->gas_price) {
                *it = tx;
                return SubmitResult::REPLACED;
            }
            return SubmitResult::REJECTED_DUPLICATE;
        }
    }
    pending_.push_back(tx);
    return SubmitResult::ACCEPTED;
}

void Mempool::erase(const std::string& tx_id) {
    pending_.erase(std::remove_if(pending_.begin(), pending_.end(),
                                  [&](const Transaction& t) { return t.tx_id == tx_id; }),
                   pending_.end());
}

std::size_t Mempool::pending_count(const Address& sender) const {
    return std::size_t(std::count_if(pending_.begin(), pending_.end(),
                                     [&](const Transaction& t) { return t.sender == sender; }));
}

namespace {

// Priority of a single transaction, ignoring nonce dependencies.
bool priority_less(OrderingPolicy policy, const Transaction& a, const Transaction& b) {
    if (policy == OrderingPolicy::GAS_PRICE_DESC) {
        if (a.gas_price != b.gas_price) return a.gas_price > b.gas_price;
        if (a.arrival_tick != b.arrival_tick) return a.arrival_tick < b.arrival_tick;
    } else {
        if (a.arrival_tick != b.arrival_tick) return a.arrival_tick < b.arrival_tick;
        if (a.gas_price != b.gas_price) return a.gas_price > b.gas_price;
    }
    if (a.sender != b.sender) return a.sender < b.sender;
    return a.nonce < b.nonce;
}

}  // namespace

std::vector<Transaction> Mempool::ordered() const {
    // Per-sender queues in nonce order; repeatedly emit the highest-priority
    // head so nonce order is respected within a sender no matter how the
    // individual priorities interleave.
    std::map<Address, std::vector<const Transaction*>> by_sender;
    for (const auto& tx : pending_) by_sender[tx.sender].push_back(&tx);
    for (auto& [sender, queue] : by_sender)
        std::sort(queue.begin(), queue.end(),
                  [](const Transaction* a, const Transaction* b) { return a->nonce < b->nonce; });

    std::map<Address, std::size_t> cursor;
    std::vector<Transaction> out;
    out.reserve(pending_.size());
    while (out.size() < pending_.size()) {
        const Transaction* best = nullptr;
        for (const auto& [sender, queue] : by_sender) {
            const std::size_t i = cursor[sender];
            if (i >= queue.size()) continue;
            if (best == nullptr || priority_less(policy_, *queue[i], *best)) best = queue[i];
        }
        assert(best != nullptr);
        out.push_back(*best);
        ++cursor[best->sender];
    }
    return out;
}

// --- CallContext ------------------------------------------------------------

CallContext::CallContext(WorldState& state, const Address& sender, Height height, Gas gas_limit)
    : state_(state), sender_(sender), height_(height), gas_limit_(gas_limit) {}

void CallContext::check_limit() {
    if (gas_used_ > gas_limit_) throw OutOfGasError{};
}

void CallContext::charge(Gas amount) {
    gas_used_ += amount;
    if (gas_used_ > gas_limit_) throw OutOfGasError{};
}

Amount CallContext::balance(const Address& account) const {
    auto it = state_.accounts.find(account);
    return it == state_.accounts.end() ? 0 : it->second.balance;
}

void CallContext::transfer(const Address& from, const Address& to, Amount amount, const std::string& reason) {
    if (amount == 0) return;
    require(amount > 0, reason);
    auto& src = state_.accounts[from];
    require(src.balance >= amount, reason);
    src.balance -= amount;
    state_.accounts[to].balance += amount;
    journal_.push_back({from, to, amount});
}

void CallContext::rollback_transfers() {
    for (auto it = journal_.rbegin(); it != journal_.rend(); ++it) {
        state_.accounts[it->to].balance -= it->amount;
        state_.accounts[it->from].balance += it->amount;
    }
    journal_.clear();
}

void CallContext::emit(const std::string& event_name, json fields) {
    charge(kGasEvent);
    LogEntry entry;
    entry.event_name = event_name;
    entry.fields = std::move(fields);
    entry.block_height = height_;
    events_.push_back(std::move(entry));
}

// --- apply_transaction --------------------------------------------------------

Receipt apply_transaction(WorldState& state, const Transaction& tx) {
    Receipt receipt;
    receipt.tx_id = tx.tx_id;

    const auto account_it = state.accounts.find(tx.sender);
    const AccountState current =
        account_it == state.accounts.end() ? AccountState{} : account_it->second;
    const Amount reservation = tx.gas_limit * tx.gas_price;
    if (tx.gas_limit <= 0 || tx.nonce != current.nonce || current.balance < reservation) {
        receipt.status = TxStatus::DROPPED_INVALID;
        receipt.reason = "INVALID";
        receipt.gas_used = 0;
        return receipt;
    }

    // Reserve the worst-case fee up front; contract code sees the reduced
    // balance, so calls cannot overdraw into the fee reservation.
    auto& account = state.accounts[tx.sender];
    account.balance -= reservation;

    CallContext ctx(state, tx.sender, state.height, tx.gas_limit);
    auto contract_it = state.contracts.find(tx.target);
    // Rollback granularity is the whole target contract: a failed call must
    // leave no storage effect, and gas exhaustion can interrupt a call after
    // it mutated storage.
    std::unique_ptr<Contract> snapshot;
    if (contract_it != state.contracts.end()) snapshot = contract_it->second->clone();
    try {
        ctx.check_limit();
        if (contract_it == state.contracts.end()) throw RevertError{"UNKNOWN_CONTRACT"};
        if (tx.call_name == "noop") {
            // no-op call: base gas only, no effects
        } else {
            contract_it->second->call(ctx, tx.call_name, tx.args);
        }
        receipt.status = TxStatus::SUCCESS;
        receipt.gas_used = ctx.gas_used();
        for (auto& ev : ctx.events()) {
            ev.contract = tx.target;
            ev.tx_id = tx.tx_id;
            receipt.events.push_back(std::move(ev));
        }
    } catch (const RevertError& err) {
        ctx.rollback_transfers();
        if (snapshot) contract_it->second = std::move(snapshot);
        receipt.status = TxStatus::REVERT;
        receipt.reason = err.reason;
        receipt.gas_used = std::min(ctx.gas_used(), tx.gas_limit);
    } catch (const OutOfGasError&) {
        ctx.rollback_transfers();
        if (snapshot) contract_it->second = std::move(snapshot);
        receipt.status = TxStatus::OUT_OF_GAS;
        receipt.reason = "OUT_OF_GAS";
        receipt.gas_used = tx.gas_limit;
    }

    // Refund the unused reservation, route the fee, bump the nonce. This
    // happens for every executed transaction, including failures: failed
    // attempts are what make wasted gas measurable.
    const Amount fee = receipt.gas_used * tx.gas_price;
    account.balance += reservation - fee;
    state.fee_sink += fee;
    account.nonce += 1;
    return receipt;
}

json read_view(const WorldState& state, const ContractId& contract, const std::string& view_name,
               const json& args) {
    auto it = state.contracts.find(contract);
    if (it == state.contracts.end()) throw ViewError("UNKNOWN_CONTRACT");
    return it->second->view(view_name, args, state.height);
}

// --- Chain --------------------------------------------------------------------

Chain::Chain(WorldState genesis) {
    genesis.height = 0;
    genesis_digest_ = genesis.digest();
    states_.push_back(std::move(genesis));
}

const WorldState& Chain::state_at(Height h) const {
    if (h >= states_.size()) throw std::out_of_range("no state at height " + std::to_string(h));
    return states_[h];
}

const Block& Chain::seal_block(Mempool& mempool, Gas block_gas_limit, Tick tick,
                               std::vector<Transaction>* dropped) {
    // Storage rollback granularity is the whole state: execute against a copy
    // and keep it as the new tip. Failed calls inside apply_transaction roll
    // back their own effects; DROPPED_INVALID leaves no trace at all.
    WorldState next = states_.back();
    next.height = states_.back().height + 1;

    Block block;
    block.height = next.height;
    block.parent_digest = blocks_.empty() ? genesis_digest_ : blocks_.back().state_digest;

    Gas remaining = block_gas_limit;
    for (const auto& tx : mempool.ordered()) {
        if (tx.gas_limit > remaining) continue;  // stays pending, smaller txs may still fit
        Receipt receipt = apply_transaction(next, tx);
        if (receipt.status == TxStatus::DROPPED_INVALID) {
            mempool.erase(tx.tx_id);
            if (dropped != nullptr) dropped->push_back(tx);
            continue;
        }
        remaining -= receipt.gas_used;
        mempool.erase(tx.tx_id);
        block.txs.push_back(tx);
        block.receipts.push_back(std::move(receipt));
    }

    std::uint32_t log_index = 0;
    for (auto& receipt : block.receipts)
        for (auto& ev : receipt.events) {
            ev.block_height = block.height;
            ev.log_index = log_index++;
        }

    (void)tick;
    block.state_digest = next.digest();
    states_.push_back(std::move(next));
    blocks_.push_back(std::move(block));
    return blocks_.back();
}

ReorgResult Chain::inject_reorg(std::size_t depth, Tick tick) {
    if (depth == 0 || depth >= blocks_.size()) throw ReorgError("DEPTH_TOO_LARGE");

    ReorgResult result;
    for (std::size_t i = blocks_.size() - depth; i < blocks_.size(); ++i) {
        for (auto& tx : blocks_[i].txs) {
            Transaction replay = tx;
            replay.arrival_tick = tick;  // fresh arrival for re-entry ordering
            result.orphaned_txs.push_back(std::move(replay));
        }
        for (const auto& receipt : blocks_[i].receipts)
            for (const auto& ev : receipt.events) result.orphaned_events.push_back(ev);
    }
    blocks_.resize(blocks_.size() - depth);
    states_.resize(states_.size() - depth);
    result.new_tip = tip();
    return result;
}

std::vector<LogEntry> Chain::canonical_logs() const {
    std::vector<LogEntry> out;
    for (const auto& block : blocks_)
        for (const auto& receipt : block.receipts)
            for (const auto& ev : receipt.events) out.push_back(ev);
    return out;
}

}  // namespace stigsim
