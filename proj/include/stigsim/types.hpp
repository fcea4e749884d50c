#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace stigsim {

using json = nlohmann::json;

using Address = std::string;
using ContractId = std::string;
using Amount = std::int64_t;  // token units
using Gas = std::int64_t;     // gas units
using Height = std::uint64_t;
using Tick = std::uint64_t;

// Fixed-point quantities (prices, ratios, rates) carry 6 fractional decimal
// digits and round toward zero everywhere.
inline constexpr std::int64_t kMicro = 1'000'000;

// Gas schedule, simulator-scale units.
inline constexpr Gas kGasBase = 21;
inline constexpr Gas kGasStorageRead = 1;
inline constexpr Gas kGasStorageWrite = 5;
inline constexpr Gas kGasEvent = 3;

enum class TxStatus { SUCCESS, REVERT, OUT_OF_GAS, DROPPED_INVALID };

const char* to_string(TxStatus s);
TxStatus tx_status_from_string(const std::string& s);

enum class OrderingPolicy { GAS_PRICE_DESC, FIFO };

struct AccountState {
    Amount balance = 0;
    std::uint64_t nonce = 0;
};

struct Transaction {
    std::string tx_id;
    Address sender;
    ContractId target;
    std::string call_name;
    json args = json::array();
    Gas gas_limit = 0;
    Amount gas_price = 0;
    std::uint64_t nonce = 0;
    Tick arrival_tick = 0;

    json to_json() const;
};

struct LogEntry {
    ContractId contract;
    std::string event_name;
    json fields = json::object();
    Height block_height = 0;
    std::string tx_id;
    std::uint32_t log_index = 0;

    json to_json() const;
};

struct Receipt {
    std::string tx_id;
    TxStatus status = TxStatus::SUCCESS;
    std::string reason;  // empty on success; stable code otherwise
    Gas gas_used = 0;
    std::vector<LogEntry> events;
};

struct Block {
    Height height = 0;
    std::string parent_digest;
    std::string state_digest;
    std::vector<Transaction> txs;
    std::vector<Receipt> receipts;
};

}  // namespace stigsim
