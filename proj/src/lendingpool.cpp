#include <algorithm>
#include <limits>

#include "stigsim/contracts.hpp"

namespace stigsim {

json Position::to_json() const {
    return json{{"id", id},
                {"owner", owner},
                {"collateral", collateral},
                {"debt", debt},
                {"closed", closed}};
}

LendingPool::LendingPool(ContractId id, LendingPoolParams params)
    : Contract(std::move(id)), params_(params), feeds_micro_(params.initial_feeds_micro) {
    if (feeds_micro_.empty()) feeds_micro_.push_back(kMicro);
}

std::unique_ptr<Contract> LendingPool::clone() const { return std::make_unique<LendingPool>(*this); }

std::int64_t LendingPool::effective_price_micro() const {
    if (params_.oracle_mode == OracleMode::SINGLE) return feeds_micro_.front();
    std::vector<std::int64_t> sorted = feeds_micro_;
    std::sort(sorted.begin(), sorted.end());
    return sorted[sorted.size() / 2];  // odd feed count enforced at configuration
}

std::int64_t LendingPool::health_micro(const Position& p) const {
    if (p.debt == 0) return std::numeric_limits<std::int64_t>::max();
    return std::int64_t(__int128(p.collateral) * effective_price_micro() / p.debt);
}

void LendingPool::call(CallContext& ctx, const std::string& name, const json& args) {
    if (name == "open_position") return open_position(ctx, args);
    if (name == "set_price") return set_price(ctx, args);
    if (name == "liquidate") return liquidate(ctx, args);
    throw RevertError{"UNKNOWN_CALL"};
}

// args: [collateral, debt]
void LendingPool::open_position(CallContext& ctx, const json& args) {
    ctx.require(args.is_array() && args.size() == 2, "BAD_ARGS");
    const Amount collateral = args[0].get<Amount>();
    const Amount debt = args[1].get<Amount>();
    ctx.require(collateral >= 0 && debt >= 0, "BAD_ARGS");

    ctx.charge_read();
    Position pos;
    pos.id = next_position_id_;
    pos.owner = ctx.sender();
    pos.collateral = collateral;
    pos.debt = debt;
    ctx.require(health_micro(pos) >= kMicro, "UNHEALTHY_OPEN");

    if (collateral > 0) ctx.transfer(ctx.sender(), id(), collateral, "INSUFFICIENT_BALANCE");
    if (debt > 0) ctx.transfer(id(), ctx.sender(), debt, "POOL_LIQUIDITY");
    next_position_id_ += 1;
    ctx.charge_write(2);
    ctx.emit("PositionOpened", json{{"positionId", pos.id},
                                    {"owner", pos.owner},
                                    {"collateral", collateral},
                                    {"debt", debt}});
    positions_.emplace(pos.id, std::move(pos));
}

// args: [feedIndex, priceMicro]
void LendingPool::set_price(CallContext& ctx, const json& args) {
    ctx.require(args.is_array() && args.size() == 2, "BAD_ARGS");
    const auto feed = args[0].get<std::size_t>();
    const auto price = args[1].get<std::int64_t>();
    ctx.require(feed < feeds_micro_.size(), "UNKNOWN_FEED");
    ctx.require(price > 0, "BAD_ARGS");
    ctx.require(feed < params_.oracle_accounts.size() && params_.oracle_accounts[feed] == ctx.sender(),
                "UNAUTHORIZED");
    ctx.charge_read();
    feeds_micro_[feed] = price;
    ctx.charge_write();
    ctx.emit("PriceSet", json{{"feedIndex", feed},
                              {"priceMicro", price},
                              {"effectiveMicro", effective_price_micro()}});
}

// args: [positionId]
void LendingPool::liquidate(CallContext& ctx, const json& args) {
    ctx.require(args.is_array() && args.size() == 1, "BAD_ARGS");
    ctx.charge_read();
    auto it = positions_.find(args[0].get<std::uint64_t>());
    ctx.require(it != positions_.end(), "UNKNOWN_POSITION");
    // a closed position has zero debt, so it reads as healthy; losers of a
    // same-block liquidation race fail on the health guard
    Position& pos = it->second;

    ctx.charge_read();
    const std::int64_t price = effective_price_micro();
    ctx.require(health_micro(pos) < kMicro, "HEALTHY");  // strict threshold

    // Caller repays the debt and seizes collateral worth debt * (1 + bonus).
    ctx.transfer(ctx.sender(), id(), pos.debt, "INSUFFICIENT_BALANCE");
    const Amount seizable =
        Amount(__int128(pos.debt) * (kMicro + std::int64_t(params_.liquidation_bonus_micro)) / price);
    const Amount seized = std::min(pos.collateral, seizable);
    const Amount leftover = pos.collateral - seized;
    ctx.transfer(id(), ctx.sender(), seized, "ESCROW_UNDERFLOW");
    if (leftover > 0) ctx.transfer(id(), pos.owner, leftover, "ESCROW_UNDERFLOW");

    const Amount debt_paid = pos.debt;
    pos.closed = true;
    pos.collateral = 0;
    pos.debt = 0;
    ctx.charge_write();
    ctx.emit("Liquidated", json{{"positionId", pos.id},
                                {"caller", ctx.sender()},
                                {"seizedCollateral", seized},
                                {"debtPaid", debt_paid},
                                {"leftoverToOwner", leftover}});
}

json LendingPool::view(const std::string& name, const json& args, Height height) const {
    (void)height;
    if (name == "health") {
        if (!args.is_array() || args.size() != 1) throw ViewError("BAD_ARGS");
        auto it = positions_.find(args[0].get<std::uint64_t>());
        if (it == positions_.end()) throw ViewError("UNKNOWN_POSITION");
        return health_micro(it->second);
    }
    if (name == "getPrice") return effective_price_micro();
    if (name == "getPosition") {
        if (!args.is_array() || args.size() != 1) throw ViewError("BAD_ARGS");
        auto it = positions_.find(args[0].get<std::uint64_t>());
        if (it == positions_.end()) throw ViewError("UNKNOWN_POSITION");
        json out = it->second.to_json();
        out["healthMicro"] = health_micro(it->second);
        return out;
    }
    if (name == "getPositionsSummary") {
        json out = json::array();
        for (const auto& [pid, pos] : positions_) {
            if (pos.closed) continue;
            json p = pos.to_json();
            p["healthMicro"] = health_micro(pos);
            out.push_back(std::move(p));
        }
        return out;
    }
    throw ViewError("UNKNOWN_VIEW");
}

json LendingPool::storage_json() const {
    json positions_json = json::object();
    for (const auto& [pid, pos] : positions_) positions_json[std::to_string(pid)] = pos.to_json();
    json feeds = json::array();
    for (auto f : feeds_micro_) feeds.push_back(f);
    return json{{"kind", "lendingpool"},
                {"positions", positions_json},
                {"feeds", feeds},
                {"mode", params_.oracle_mode == OracleMode::SINGLE ? "SINGLE" : "MEDIAN"},
                {"nextPositionId", next_position_id_}};
}

}  // namespace stigsim
