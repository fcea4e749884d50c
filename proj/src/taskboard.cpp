#include <algorithm>

#include "stigsim/canonical.hpp"
#include "stigsim/contracts.hpp"

namespace stigsim {

const char* to_string(TaskStatus s) {
    switch (s) {
        case TaskStatus::OPEN: return "OPEN";
        case TaskStatus::CLAIMED: return "CLAIMED";
        case TaskStatus::DONE: return "DONE";
        case TaskStatus::EXPIRED: return "EXPIRED";
    }
    return "?";
}

json Task::to_json() const {
    return json{{"id", id},
                {"reward", reward},
                {"deadline", deadline},
                {"difficulty", difficulty},
                {"capability", required_capability},
                {"status", to_string(status)},
                {"poster", poster},
                {"claimant", claimant},
                {"postBlock", post_block},
                {"claimBlock", claim_block},
                {"stake", stake},
                {"bonusPool", bonus_pool}};
}

std::string commit_hash_hex(std::uint64_t task_id, std::uint64_t round, const std::string& action,
                            const json& args, const std::vector<std::uint8_t>& salt) {
    Sha256 h;
    std::uint8_t be[8];
    for (int i = 0; i < 8; ++i) be[i] = std::uint8_t(task_id >> (56 - 8 * i));
    h.update(be, 8);
    for (int i = 0; i < 8; ++i) be[i] = std::uint8_t(round >> (56 - 8 * i));
    h.update(be, 8);
    h.update(action);
    const std::uint8_t sep = 0x00;
    h.update(&sep, 1);
    h.update(canonical_dump(args));
    h.update(salt.data(), salt.size());
    return to_hex(h.finish());
}

TaskBoard::TaskBoard(ContractId id, TaskBoardParams params)
    : Contract(std::move(id)), params_(params) {}

std::unique_ptr<Contract> TaskBoard::clone() const { return std::make_unique<TaskBoard>(*this); }

Amount TaskBoard::stake_amount(Amount reward) const {
    if (params_.stake_rate_micro == 0) return 0;
    const Amount raw = Amount(__int128(reward) * params_.stake_rate_micro / kMicro);
    return std::max<Amount>(raw, 1);
}

Amount TaskBoard::current_reward(const Task& task, Height height) const {
    if (params_.decay_rate_micro == 0) return task.reward;
    const Height age = height > task.post_block ? height - task.post_block : 0;
    const Height past_grace = age > params_.decay_grace ? age - params_.decay_grace : 0;
    const __int128 decay = __int128(params_.decay_rate_micro) * past_grace;
    if (decay >= kMicro) return 0;
    return Amount(__int128(task.reward) * (kMicro - std::int64_t(decay)) / kMicro);
}

std::uint64_t TaskBoard::round_at(Height h) const {
    const Height len = params_.commit_window + params_.reveal_window;
    if (h < params_.phase_start) return 0;
    return (h - params_.phase_start) / len;
}

TaskBoard::Phase TaskBoard::phase_at(Height h) const {
    if (h < params_.phase_start) return Phase::CLOSED;
    const Height len = params_.commit_window + params_.reveal_window;
    const Height offset = (h - params_.phase_start) % len;
    return offset < params_.commit_window ? Phase::COMMIT : Phase::REVEAL;
}

Height TaskBoard::reveal_end(std::uint64_t round) const {
    const Height len = params_.commit_window + params_.reveal_window;
    return params_.phase_start + (round + 1) * len;
}

Task& TaskBoard::require_task(CallContext& ctx, std::uint64_t id) {
    ctx.charge_read();
    auto it = tasks_.find(id);
    ctx.require(it != tasks_.end(), "UNKNOWN_TASK");
    return it->second;
}

void TaskBoard::call(CallContext& ctx, const std::string& name, const json& args) {
    if (name == "post_task") return post_task(ctx, args);
    if (name == "claim_task") return claim_task(ctx, args);
    if (name == "submit_completion") return submit_completion(ctx, args);
    if (name == "poke_task") return poke_task(ctx, args);
    if (name == "commit") return commit(ctx, args);
    if (name == "reveal") return reveal(ctx, args);
    if (name == "cleanup_round") return cleanup_round(ctx, args);
    throw RevertError{"UNKNOWN_CALL"};
}

// args: [reward, deadline, difficulty, capability]
void TaskBoard::post_task(CallContext& ctx, const json& args) {
    ctx.require(args.is_array() && args.size() == 4, "BAD_ARGS");
    const Amount reward = args[0].get<Amount>();
    const Height deadline = args[1].get<Height>();
    const Height difficulty = args[2].get<Height>();
    const std::string capability = args[3].get<std::string>();
    ctx.require(reward > 0, "BAD_ARGS");
    ctx.require(deadline > ctx.height(), "PAST_DEADLINE");
    ctx.transfer(ctx.sender(), id(), reward, "INSUFFICIENT_BALANCE");

    ctx.charge_read();
    Task task;
    task.id = next_task_id_++;
    task.reward = reward;
    task.deadline = deadline;
    task.difficulty = difficulty;
    task.required_capability = capability;
    task.status = TaskStatus::OPEN;
    task.poster = ctx.sender();
    task.post_block = ctx.height();
    ctx.charge_write(2);  // task record + id counter
    ctx.emit("TaskPosted", json{{"taskId", task.id},
                                {"reward", reward},
                                {"deadline", deadline},
                                {"difficulty", difficulty},
                                {"capability", capability},
                                {"poster", ctx.sender()},
                                {"stakeRequired", stake_amount(reward)}});
    tasks_.emplace(task.id, std::move(task));
}

// args: [taskId, stake]
void TaskBoard::claim_task(CallContext& ctx, const json& args) {
    ctx.require(args.is_array() && args.size() == 2, "BAD_ARGS");
    ctx.require(!params_.commit_reveal, "CLAIMS_CLOSED");  // overlay owns sequencing
    do_claim(ctx, args[0].get<std::uint64_t>(), args[1].get<Amount>());
}

void TaskBoard::do_claim(CallContext& ctx, std::uint64_t task_id, Amount stake) {
    Task& task = require_task(ctx, task_id);
    ctx.require(task.status == TaskStatus::OPEN, "NOT_OPEN");
    ctx.require(ctx.height() <= task.deadline, "PAST_DEADLINE");
    ctx.require(stake == stake_amount(task.reward), "BAD_STAKE");
    ctx.transfer(ctx.sender(), id(), stake, "INSUFFICIENT_BALANCE");
    task.status = TaskStatus::CLAIMED;
    task.claimant = ctx.sender();
    task.claim_block = ctx.height();
    task.stake = stake;
    ctx.charge_write();
    ctx.emit("TaskClaimed", json{{"taskId", task.id},
                                 {"claimant", ctx.sender()},
                                 {"claimBlock", task.claim_block},
                                 {"stake", stake}});
}

// args: [taskId]
void TaskBoard::submit_completion(CallContext& ctx, const json& args) {
    ctx.require(args.is_array() && args.size() == 1, "BAD_ARGS");
    Task& task = require_task(ctx, args[0].get<std::uint64_t>());
    ctx.require(task.status == TaskStatus::CLAIMED, "NOT_CLAIMED");
    ctx.require(task.claimant == ctx.sender(), "NOT_CLAIMANT");
    ctx.require(ctx.height() <= task.deadline, "PAST_DEADLINE");
    ctx.require(ctx.height() - task.claim_block >= task.difficulty, "TOO_EARLY");

    const Amount paid = current_reward(task, ctx.height());
    const Amount remainder = task.reward - paid;
    const Amount bonus = task.bonus_pool;
    ctx.transfer(id(), ctx.sender(), paid + bonus + task.stake, "ESCROW_UNDERFLOW");
    if (remainder > 0) ctx.transfer(id(), task.poster, remainder, "ESCROW_UNDERFLOW");
    task.status = TaskStatus::DONE;
    const Amount stake_refund = task.stake;
    task.stake = 0;
    task.bonus_pool = 0;
    ctx.charge_write();
    ctx.emit("TaskCompleted", json{{"taskId", task.id},
                                   {"claimant", ctx.sender()},
                                   {"paid", paid},
                                   {"bonus", bonus},
                                   {"stakeRefund", stake_refund},
                                   {"decayRemainder", remainder}});
}

// args: [taskId]
void TaskBoard::poke_task(CallContext& ctx, const json& args) {
    ctx.require(args.is_array() && args.size() == 1, "BAD_ARGS");
    Task& task = require_task(ctx, args[0].get<std::uint64_t>());

    if (ctx.height() > task.deadline &&
        (task.status == TaskStatus::OPEN || task.status == TaskStatus::CLAIMED)) {
        const char* prev = to_string(task.status);
        const Amount refund = task.reward + task.bonus_pool;
        const Amount slashed = task.stake;
        ctx.transfer(id(), task.poster, refund, "ESCROW_UNDERFLOW");
        if (slashed > 0) ctx.transfer(id(), ctx.sender(), slashed, "ESCROW_UNDERFLOW");
        task.status = TaskStatus::EXPIRED;
        task.claimant.clear();
        task.stake = 0;
        task.bonus_pool = 0;
        ctx.charge_write();
        ctx.emit("TaskExpired", json{{"taskId", task.id},
                                     {"poker", ctx.sender()},
                                     {"rewardRefund", refund},
                                     {"stakeSlashed", slashed},
                                     {"prevStatus", prev}});
        return;
    }

    if (task.status == TaskStatus::CLAIMED && params_.claim_timeout > 0 &&
        ctx.height() - task.claim_block > params_.claim_timeout) {
        // Timeout reversion: claimant's stake is slashed, half to the poker
        // as bounty, the rest into the task's bonus pool for the eventual
        // completer.
        const Amount to_poker = task.stake / 2;
        const Amount to_pool = task.stake - to_poker;
        const Address old_claimant = task.claimant;
        if (to_poker > 0) ctx.transfer(id(), ctx.sender(), to_poker, "ESCROW_UNDERFLOW");
        task.bonus_pool += to_pool;
        task.status = TaskStatus::OPEN;
        task.claimant.clear();
        task.claim_block = 0;
        task.stake = 0;
        ctx.charge_write();
        ctx.emit("TaskReverted", json{{"taskId", task.id},
                                      {"claimant", old_claimant},
                                      {"poker", ctx.sender()},
                                      {"slashedToPoker", to_poker},
                                      {"slashedToPool", to_pool}});
        return;
    }

    throw RevertError{"NOTHING_TO_DO"};
}

// args: [round, taskId, commitHashHex, stake]
void TaskBoard::commit(CallContext& ctx, const json& args) {
    ctx.require(args.is_array() && args.size() == 4, "BAD_ARGS");
    ctx.require(params_.commit_reveal, "NO_OVERLAY");
    const auto round = args[0].get<std::uint64_t>();
    const auto hash_hex = args[2].get<std::string>();
    const Amount stake = args[3].get<Amount>();

    ctx.charge_read();
    ctx.require(phase_at(ctx.height()) == Phase::COMMIT && round_at(ctx.height()) == round,
                "OUT_OF_PHASE");
    auto& round_commits = commits_[round];
    ctx.require(round_commits.find(ctx.sender()) == round_commits.end(), "ALREADY_COMMITTED");
    ctx.require(stake == params_.commit_stake, "BAD_STAKE");
    ctx.transfer(ctx.sender(), id(), stake, "INSUFFICIENT_BALANCE");

    round_commits[ctx.sender()] = CommitRecord{ctx.sender(), hash_hex, stake, false};
    ctx.charge_write();
    ctx.emit("Committed", json{{"round", round}, {"committer", ctx.sender()}, {"stake", stake}});
}

// args: [round, taskId, actionName, actionArgs, saltHex]
void TaskBoard::reveal(CallContext& ctx, const json& args) {
    ctx.require(args.is_array() && args.size() == 5, "BAD_ARGS");
    ctx.require(params_.commit_reveal, "NO_OVERLAY");
    const auto round = args[0].get<std::uint64_t>();
    const auto task_id = args[1].get<std::uint64_t>();
    const auto action = args[2].get<std::string>();
    const json& action_args = args[3];
    const auto salt_hex = args[4].get<std::string>();

    ctx.charge_read();
    ctx.require(phase_at(ctx.height()) == Phase::REVEAL && round_at(ctx.height()) == round,
                "OUT_OF_PHASE");
    auto round_it = commits_.find(round);
    ctx.require(round_it != commits_.end(), "NO_COMMIT");
    auto rec_it = round_it->second.find(ctx.sender());
    ctx.require(rec_it != round_it->second.end(), "NO_COMMIT");
    CommitRecord& rec = rec_it->second;
    ctx.require(!rec.revealed, "ALREADY_REVEALED");

    ctx.require(salt_hex.size() == 64, "BAD_SALT");
    std::vector<std::uint8_t> salt(32);
    for (int i = 0; i < 32; ++i)
        salt[std::size_t(i)] =
            std::uint8_t(std::stoul(salt_hex.substr(std::size_t(i) * 2, 2), nullptr, 16));
    const std::string recomputed = commit_hash_hex(task_id, round, action, action_args, salt);
    ctx.require(recomputed == rec.commit_hash_hex, "HASH_MISMATCH");

    rec.revealed = true;
    ctx.transfer(id(), ctx.sender(), rec.stake, "ESCROW_UNDERFLOW");
    ctx.charge_write();

    // Process the underlying action under its normal guards. The first valid
    // reveal in block order wins a contested claim; later ones stay revealed
    // (stake already refunded) but acquire nothing.
    bool claimed = false;
    if (action == "claim_task") {
        ctx.require(action_args.is_array() && action_args.size() == 2, "BAD_ARGS");
        Task* task = nullptr;
        {
            ctx.charge_read();
            auto it = tasks_.find(task_id);
            task = it == tasks_.end() ? nullptr : &it->second;
        }
        if (task != nullptr && task->status == TaskStatus::OPEN && ctx.height() <= task->deadline) {
            do_claim(ctx, task_id, action_args[1].get<Amount>());
            claimed = true;
        }
    } else {
        throw RevertError{"UNKNOWN_ACTION"};
    }
    ctx.emit("Revealed", json{{"round", round},
                              {"committer", ctx.sender()},
                              {"taskId", task_id},
                              {"claimed", claimed}});
}

// args: [round]
void TaskBoard::cleanup_round(CallContext& ctx, const json& args) {
    ctx.require(args.is_array() && args.size() == 1, "BAD_ARGS");
    ctx.require(params_.commit_reveal, "NO_OVERLAY");
    const auto round = args[0].get<std::uint64_t>();
    ctx.charge_read();
    ctx.require(ctx.height() >= reveal_end(round), "CLEANUP_EARLY");

    Amount slashed_total = 0;
    std::uint64_t cleared = 0;
    auto round_it = commits_.find(round);
    if (round_it != commits_.end()) {
        for (const auto& [committer, rec] : round_it->second) {
            ctx.charge_read();
            if (!rec.revealed && rec.stake > 0) {
                ctx.transfer(id(), ctx.sender(), rec.stake, "ESCROW_UNDERFLOW");
                slashed_total += rec.stake;
            }
            ++cleared;
        }
        ctx.charge_write();
        commits_.erase(round_it);
    }
    ctx.emit("RoundCleaned", json{{"round", round},
                                  {"caller", ctx.sender()},
                                  {"slashedTotal", slashed_total},
                                  {"recordsCleared", cleared}});
}

json TaskBoard::view(const std::string& name, const json& args, Height height) const {
    if (name == "getOpenTasks") {
        // optional capability filter
        std::optional<std::string> filter;
        if (args.is_array() && !args.empty()) filter = args[0].get<std::string>();
        json out = json::array();
        for (const auto& [tid, task] : tasks_) {
            if (task.status != TaskStatus::OPEN) continue;
            if (filter && task.required_capability != *filter) continue;
            out.push_back(tid);
        }
        return out;
    }
    if (name == "current_reward") {
        if (!args.is_array() || args.size() != 1) throw ViewError("BAD_ARGS");
        auto it = tasks_.find(args[0].get<std::uint64_t>());
        if (it == tasks_.end()) throw ViewError("UNKNOWN_TASK");
        return current_reward(it->second, height);
    }
    if (name == "getTask") {
        if (!args.is_array() || args.size() != 1) throw ViewError("BAD_ARGS");
        auto it = tasks_.find(args[0].get<std::uint64_t>());
        if (it == tasks_.end()) throw ViewError("UNKNOWN_TASK");
        json out = it->second.to_json();
        out["currentReward"] = current_reward(it->second, height);
        return out;
    }
    if (name == "getTasksSummary") {
        json out = json::array();
        for (const auto& [tid, task] : tasks_) {
            json t = task.to_json();
            t["currentReward"] = current_reward(task, height);
            t["stakeRequired"] = stake_amount(task.reward);
            t["stale"] = task.status == TaskStatus::CLAIMED && params_.claim_timeout > 0 &&
                         height > task.claim_block + params_.claim_timeout;
            out.push_back(std::move(t));
        }
        return out;
    }
    if (name == "getRoundInfo") {
        if (!args.is_array() || args.size() != 1) throw ViewError("BAD_ARGS");
        const Height h = args[0].get<Height>();
        const Phase phase = phase_at(h);
        return json{{"round", round_at(h)},
                    {"phase", phase == Phase::COMMIT  ? "COMMIT"
                              : phase == Phase::REVEAL ? "REVEAL"
                                                       : "CLOSED"},
                    {"commitStake", params_.commit_stake}};
    }
    if (name == "getCleanupable") {
        json out = json::array();
        for (const auto& [round, records] : commits_) {
            if (height < reveal_end(round)) continue;
            std::uint64_t unrevealed = 0;
            for (const auto& [committer, rec] : records)
                if (!rec.revealed) ++unrevealed;
            out.push_back(json{{"round", round}, {"unrevealed", unrevealed}});
        }
        return out;
    }
    if (name == "getCommit") {
        if (!args.is_array() || args.size() != 2) throw ViewError("BAD_ARGS");
        auto round_it = commits_.find(args[0].get<std::uint64_t>());
        if (round_it == commits_.end()) return nullptr;
        auto rec_it = round_it->second.find(args[1].get<std::string>());
        if (rec_it == round_it->second.end()) return nullptr;
        return json{{"committer", rec_it->second.committer},
                    {"hash", rec_it->second.commit_hash_hex},
                    {"stake", rec_it->second.stake},
                    {"revealed", rec_it->second.revealed}};
    }
    throw ViewError("UNKNOWN_VIEW");
}

json TaskBoard::storage_json() const {
    json tasks_json = json::object();
    for (const auto& [tid, task] : tasks_) tasks_json[std::to_string(tid)] = task.to_json();
    json commits_json = json::object();
    for (const auto& [round, records] : commits_) {
        json per_round = json::object();
        for (const auto& [committer, rec] : records)
            per_round[committer] = json{{"hash", rec.commit_hash_hex},
                                        {"stake", rec.stake},
                                        {"revealed", rec.revealed}};
        commits_json[std::to_string(round)] = std::move(per_round);
    }
    return json{{"kind", "taskboard"},
                {"tasks", tasks_json},
                {"nextTaskId", next_task_id_},
                {"commits", commits_json}};
}

}  // namespace stigsim
