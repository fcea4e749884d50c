#pragma once

#include <string>

#include "stigsim/ledger.hpp"

namespace stigsim::test {

inline Transaction make_tx(const std::string& id, const Address& sender, std::uint64_t nonce,
                           Amount gas_price, Tick arrival, const ContractId& target = "board-0",
                           const std::string& call = "noop", json args = json::array()) {
    Transaction tx;
    tx.tx_id = id;
    tx.sender = sender;
    tx.target = target;
    tx.call_name = call;
    tx.args = std::move(args);
    tx.gas_limit = 200;
    tx.gas_price = gas_price;
    tx.nonce = nonce;
    tx.arrival_tick = arrival;
    return tx;
}

// Minimal world: one task board, a few funded accounts.
inline WorldState make_world(TaskBoardParams params = {}) {
    WorldState state;
    state.contracts.emplace("board-0", std::make_unique<TaskBoard>("board-0", params));
    state.accounts["board-0"].balance = 0;
    for (const char* who : {"alice", "bob", "carol", "dave"}) state.accounts[who].balance = 100000;
    return state;
}

inline WorldState make_pool_world(LendingPoolParams params, Amount liquidity = 10000) {
    WorldState state;
    state.contracts.emplace("pool-0", std::make_unique<LendingPool>("pool-0", params));
    state.accounts["pool-0"].balance = liquidity;
    for (const char* who : {"alice", "bob", "carol", "oracle-0", "oracle-1", "oracle-2"})
        state.accounts[who].balance = 100000;
    return state;
}

// Applies a call as a transaction from `sender` and returns the receipt.
inline Receipt call(WorldState& state, const Address& sender, const ContractId& target,
                    const std::string& name, json args, Gas gas_limit = 200) {
    static std::uint64_t seq = 0;
    Transaction tx;
    tx.tx_id = "t-" + std::to_string(seq++);
    tx.sender = sender;
    tx.target = target;
    tx.call_name = name;
    tx.args = std::move(args);
    tx.gas_limit = gas_limit;
    tx.gas_price = 0;  // keep balances easy to reason about in unit tests
    tx.nonce = state.accounts[sender].nonce;
    tx.arrival_tick = 0;
    return apply_transaction(state, tx);
}

inline TaskBoard& board_of(WorldState& state, const ContractId& id = "board-0") {
    return dynamic_cast<TaskBoard&>(*state.contracts.at(id));
}

inline LendingPool& pool_of(WorldState& state, const ContractId& id = "pool-0") {
    return dynamic_cast<LendingPool&>(*state.contracts.at(id));
}

}  // namespace stigsim::test
