#include "stigsim/agents.hpp"

#include <algorithm>

#include "stigsim/canonical.hpp"

namespace stigsim {

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::HONEST: return "HONEST";
        case Strategy::GRIEFER: return "GRIEFER";
        case Strategy::NON_REVEALER: return "NON_REVEALER";
        case Strategy::SPAMMER: return "SPAMMER";
        case Strategy::FRONTRUNNER: return "FRONTRUNNER";
    }
    return "?";
}

const char* to_string(CoordinationStyle s) {
    switch (s) {
        case CoordinationStyle::STIG: return "STIG";
        case CoordinationStyle::MSG: return "MSG";
        case CoordinationStyle::ORCH: return "ORCH";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "HONEST") return Strategy::HONEST;
    if (s == "GRIEFER") return Strategy::GRIEFER;
    if (s == "NON_REVEALER") return Strategy::NON_REVEALER;
    if (s == "SPAMMER") return Strategy::SPAMMER;
    if (s == "FRONTRUNNER") return Strategy::FRONTRUNNER;
    throw std::invalid_argument("unknown strategy: " + s);
}

CoordinationStyle style_from_string(const std::string& s) {
    if (s == "STIG") return CoordinationStyle::STIG;
    if (s == "MSG") return CoordinationStyle::MSG;
    if (s == "ORCH") return CoordinationStyle::ORCH;
    throw std::invalid_argument("unknown style: " + s);
}

std::string Intent::key() const { return target + "|" + call + "|" + canonical_dump(args); }

std::string derive_salt_hex(const Address& agent, std::uint64_t round, std::uint64_t task_id) {
    return Sha256::hex("salt|" + agent + "|" + std::to_string(round) + "|" + std::to_string(task_id));
}

AgentRuntime::AgentRuntime(AgentSpec spec, CoordinationStyle style)
    : spec_(std::move(spec)), style_(style) {}

bool AgentRuntime::inflight(const Intent& intent) const { return inflight_.count(intent.key()) > 0; }

void AgentRuntime::note_submitted(const Intent& intent) { inflight_.insert(intent.key()); }

Amount AgentRuntime::self_balance(const AgentView& view) const {
    if (!view.storage.contains("self")) return 0;
    return view.storage["self"]["balance"].get<Amount>();
}

// --- observation -------------------------------------------------------------

namespace {

std::vector<std::string> subscription_for(const PredicateSpec& pred) {
    if (pred.kind == PredicateKind::THRESHOLD)
        return {"PositionOpened", "PriceSet", "Liquidated"};
    return {"TaskPosted", "TaskClaimed", "TaskReverted", "TaskCompleted", "TaskExpired"};
}

}  // namespace

AgentView AgentRuntime::observe(const Chain& chain, const Mempool& mempool, Tick tick) {
    (void)tick;
    AgentView view;
    const Height tip = chain.tip();
    view.as_of = tip > spec_.observation.lag ? tip - spec_.observation.lag : 0;
    view.exec_height = tip + 1;

    if (spec_.observation.mode == ObsMode::STORAGE_POLL) {
        const WorldState& snapshot = chain.state_at(view.as_of);
        json storage = json::object();
        if (snapshot.contracts.count(spec_.board) > 0) {
            if (spec_.predicate.kind == PredicateKind::THRESHOLD) {
                storage["positions"] = read_view(snapshot, spec_.board, "getPositionsSummary", json::array());
                storage["price"] = read_view(snapshot, spec_.board, "getPrice", json::array());
            } else {
                storage["tasks"] = read_view(snapshot, spec_.board, "getTasksSummary", json::array());
                if (spec_.predicate.kind == PredicateKind::COMMIT_REVEAL) {
                    storage["round"] =
                        read_view(snapshot, spec_.board, "getRoundInfo", json::array({view.exec_height}));
                    storage["cleanup"] = read_view(snapshot, spec_.board, "getCleanupable", json::array());
                }
            }
        }
        auto acct = snapshot.accounts.find(spec_.address);
        storage["self"] = json{{"balance", acct == snapshot.accounts.end() ? 0 : acct->second.balance}};
        view.storage = std::move(storage);
    } else {
        // Event subscription: only entries at least max(lag, confirmations)
        // blocks deep are delivered, each at most once.
        const Height depth = std::max(spec_.observation.lag, spec_.observation.confirmations);
        const Height visible_up_to = tip > depth ? tip - depth : 0;
        const auto subs = subscription_for(spec_.predicate);
        for (const auto& entry : chain.canonical_logs()) {
            if (entry.block_height > visible_up_to) continue;
            if (entry.contract != spec_.board) continue;
            if (std::find(subs.begin(), subs.end(), entry.event_name) == subs.end()) continue;
            const auto token = std::make_tuple(entry.block_height, entry.log_index, entry.tx_id);
            if (consumed_.count(token) > 0) continue;
            consumed_.insert(token);
            view.events.push_back(entry);
        }
    }

    if (spec_.observation.mempool_visible)
        view.mempool = mempool.ordered();
    return view;
}

// --- decision rules ----------------------------------------------------------

std::optional<Intent> AgentRuntime::decide(const AgentView& view) {
    if (spec_.strategy == Strategy::SPAMMER) return spam_intent(view);
    if (style_ == CoordinationStyle::STIG) return decide_stig(view);
    return decide_channel(view);
}

std::optional<Intent> AgentRuntime::decide_stig(const AgentView& view) {
    switch (spec_.strategy) {
        case Strategy::HONEST: {
            if (auto done = completion_intent(view)) return done;
            if (spec_.predicate.kind == PredicateKind::THRESHOLD) return threshold_intent(view);
            std::optional<Intent> acquire;
            if (spec_.predicate.kind == PredicateKind::COMMIT_REVEAL)
                acquire = commit_reveal_intent(view);
            else if (spec_.observation.mode == ObsMode::EVENT_SUBSCRIBE)
                acquire = claim_intent_from_events(view);
            else
                acquire = claim_intent_from_storage(view);
            if (acquire) return acquire;
            if (auto poke = poke_intent(view)) return poke;
            return cleanup_intent(view);
        }
        case Strategy::GRIEFER:
            // claims like an honest agent, never completes, never maintains
            if (spec_.predicate.kind == PredicateKind::COMMIT_REVEAL)
                return commit_reveal_intent(view);
            if (spec_.observation.mode == ObsMode::EVENT_SUBSCRIBE)
                return claim_intent_from_events(view);
            return claim_intent_from_storage(view);
        case Strategy::NON_REVEALER: {
            // commits and then withholds the reveal
            if (spec_.predicate.kind != PredicateKind::COMMIT_REVEAL) return std::nullopt;
            if (!view.storage.contains("round")) return std::nullopt;
            if (view.storage["round"]["phase"] != "COMMIT") return std::nullopt;
            return commit_reveal_intent(view);
        }
        case Strategy::FRONTRUNNER:
            // acquisition happens in frontrun(); finish what was sniped
            return completion_intent(view);
        case Strategy::SPAMMER:
            return spam_intent(view);
    }
    return std::nullopt;
}

// Lowest-id completable own task, preferred over any new claim.
std::optional<Intent> AgentRuntime::completion_intent(const AgentView& view) {
    const Height h = view.exec_height;
    if (spec_.observation.mode == ObsMode::STORAGE_POLL && view.storage.contains("tasks")) {
        for (const auto& task : view.storage["tasks"]) {
            if (task["status"] != "CLAIMED" || task["claimant"] != spec_.address) continue;
            if (h > task["deadline"].get<Height>()) continue;
            if (h - task["claimBlock"].get<Height>() < task["difficulty"].get<Height>()) continue;
            Intent intent{spec_.board, "submit_completion", json::array({task["id"].get<std::uint64_t>()}), {}};
            if (!inflight(intent)) return intent;
        }
        return std::nullopt;
    }
    for (const auto& [task_id, facts] : my_claims_) {
        if (h > facts.deadline) continue;
        if (h - facts.claim_block < facts.difficulty) continue;
        Intent intent{spec_.board, "submit_completion", json::array({task_id}), {}};
        if (!inflight(intent)) return intent;
    }
    return std::nullopt;
}

// State-Flag acquisition: lowest-id OPEN task matching capability with
// current reward above the activation threshold.
std::optional<Intent> AgentRuntime::claim_intent_from_storage(const AgentView& view) {
    if (!view.storage.contains("tasks")) return std::nullopt;
    const Height h = view.exec_height;
    for (const auto& task : view.storage["tasks"]) {
        if (task["status"] != "OPEN") continue;
        const std::string cap = task["capability"].get<std::string>();
        if (!cap.empty() && cap != spec_.predicate.capability) continue;
        if (task["currentReward"].get<Amount>() < spec_.predicate.min_reward) continue;
        if (h > task["deadline"].get<Height>()) continue;
        const Amount stake = task["stakeRequired"].get<Amount>();
        if (self_balance(view) < stake) continue;
        Intent intent{spec_.board, "claim_task",
                      json::array({task["id"].get<std::uint64_t>(), stake}), {}};
        if (!inflight(intent)) return intent;
    }
    return std::nullopt;
}

// Event-Signal acquisition: candidates maintained from delivered events.
std::optional<Intent> AgentRuntime::claim_intent_from_events(const AgentView& view) {
    for (const auto& entry : view.events) {
        const auto& f = entry.fields;
        if (entry.event_name == "TaskPosted") {
            const auto id = f["taskId"].get<std::uint64_t>();
            TaskFacts facts{f["reward"].get<Amount>(), f["deadline"].get<Height>(),
                            f["difficulty"].get<Height>(), f["capability"].get<std::string>(),
                            f["stakeRequired"].get<Amount>()};
            known_tasks_[id] = facts;
            const bool cap_ok = facts.capability.empty() || facts.capability == spec_.predicate.capability;
            if (cap_ok && facts.reward >= spec_.predicate.min_reward) candidates_.insert(id);
        } else if (entry.event_name == "TaskClaimed") {
            candidates_.erase(f["taskId"].get<std::uint64_t>());
        } else if (entry.event_name == "TaskReverted") {
            const auto id = f["taskId"].get<std::uint64_t>();
            auto known = known_tasks_.find(id);
            if (known != known_tasks_.end()) {
                const bool cap_ok = known->second.capability.empty() ||
                                    known->second.capability == spec_.predicate.capability;
                if (cap_ok && known->second.reward >= spec_.predicate.min_reward) candidates_.insert(id);
            }
        } else if (entry.event_name == "TaskCompleted" || entry.event_name == "TaskExpired") {
            candidates_.erase(f["taskId"].get<std::uint64_t>());
        }
    }

    const Height h = view.exec_height;
    for (auto task_id : candidates_) {
        const auto& facts = known_tasks_.at(task_id);
        if (h > facts.deadline) continue;
        Intent intent{spec_.board, "claim_task", json::array({task_id, facts.stake_required}), {}};
        if (!inflight(intent)) return intent;
    }
    return std::nullopt;
}

// Commit-reveal acquisition: commit in COMMIT phase, reveal in REVEAL phase.
std::optional<Intent> AgentRuntime::commit_reveal_intent(const AgentView& view) {
    if (!view.storage.contains("round")) return std::nullopt;
    const auto& round_info = view.storage["round"];
    const auto round = round_info["round"].get<std::uint64_t>();
    const std::string phase = round_info["phase"].get<std::string>();
    const Amount commit_stake = round_info["commitStake"].get<Amount>();
    const Height h = view.exec_height;

    if (phase == "COMMIT") {
        if (commit_memory_.count(round) > 0) return std::nullopt;
        if (!view.storage.contains("tasks")) return std::nullopt;
        for (const auto& task : view.storage["tasks"]) {
            if (task["status"] != "OPEN") continue;
            const std::string cap = task["capability"].get<std::string>();
            if (!cap.empty() && cap != spec_.predicate.capability) continue;
            if (task["currentReward"].get<Amount>() < spec_.predicate.min_reward) continue;
            if (h > task["deadline"].get<Height>()) continue;
            const Amount stake = task["stakeRequired"].get<Amount>();
            if (self_balance(view) < stake + commit_stake) continue;

            const auto task_id = task["id"].get<std::uint64_t>();
            const json action_args = json::array({task_id, stake});
            const std::string salt = derive_salt_hex(spec_.address, round, task_id);
            const std::string hash =
                commit_hash_hex(task_id, round, "claim_task", action_args, hex_to_bytes(salt));
            Intent intent{spec_.board, "commit", json::array({round, task_id, hash, commit_stake}), {}};
            if (inflight(intent)) return std::nullopt;
            CommitMemory memory;
            memory.task_id = task_id;
            memory.action_args = action_args;
            memory.salt_hex = salt;
            commit_memory_[round] = std::move(memory);
            return intent;
        }
        return std::nullopt;
    }

    if (phase == "REVEAL" && spec_.strategy != Strategy::NON_REVEALER) {
        auto it = commit_memory_.find(round);
        if (it == commit_memory_.end() || it->second.revealed || !it->second.confirmed)
            return std::nullopt;
        const auto& memory = it->second;
        Intent intent{spec_.board, "reveal",
                      json::array({round, memory.task_id, "claim_task", memory.action_args,
                                   memory.salt_hex}),
                      {}};
        if (inflight(intent)) return std::nullopt;
        return intent;
    }
    return std::nullopt;
}

// Medium hygiene: timeout reversion first, then expiry sweep.
std::optional<Intent> AgentRuntime::poke_intent(const AgentView& view) {
    if (!view.storage.contains("tasks")) return std::nullopt;
    const Height h = view.exec_height;
    for (const auto& task : view.storage["tasks"]) {
        if (task["status"] != "CLAIMED") continue;
        if (h > task["deadline"].get<Height>()) continue;
        if (!task["stale"].get<bool>()) continue;  // summary computes staleness vs the timeout
        Intent intent{spec_.board, "poke_task", json::array({task["id"].get<std::uint64_t>()}), {}};
        if (!inflight(intent)) return intent;
    }
    for (const auto& task : view.storage["tasks"]) {
        const std::string status = task["status"].get<std::string>();
        if (status != "OPEN" && status != "CLAIMED") continue;
        if (h <= task["deadline"].get<Height>()) continue;
        Intent intent{spec_.board, "poke_task", json::array({task["id"].get<std::uint64_t>()}), {}};
        if (!inflight(intent)) return intent;
    }
    return std::nullopt;
}

std::optional<Intent> AgentRuntime::cleanup_intent(const AgentView& view) {
    if (!view.storage.contains("cleanup")) return std::nullopt;
    for (const auto& entry : view.storage["cleanup"]) {
        if (entry["unrevealed"].get<std::uint64_t>() == 0) continue;
        Intent intent{spec_.board, "cleanup_round", json::array({entry["round"].get<std::uint64_t>()}), {}};
        if (!inflight(intent)) return intent;
    }
    return std::nullopt;
}

// Threshold-Trigger: liquidate the lowest-id unhealthy position.
std::optional<Intent> AgentRuntime::threshold_intent(const AgentView& view) {
    if (!view.storage.contains("positions")) return std::nullopt;
    for (const auto& pos : view.storage["positions"]) {
        if (pos["healthMicro"].get<std::int64_t>() >= kMicro) continue;
        if (self_balance(view) < pos["debt"].get<Amount>()) continue;
        Intent intent{spec_.board, "liquidate", json::array({pos["id"].get<std::uint64_t>()}), {}};
        if (!inflight(intent)) return intent;
    }
    return std::nullopt;
}

// Decoy posts, one per tick until the budget runs out (budget is enforced by
// the engine at submission time).
std::optional<Intent> AgentRuntime::spam_intent(const AgentView& view) {
    Intent intent{spec_.board, "post_task",
                  json::array({spec_.decoy_reward, view.exec_height + spec_.decoy_deadline_offset,
                               spec_.decoy_difficulty, spec_.predicate.capability}),
                  {}};
    if (inflight(intent)) return std::nullopt;
    return intent;
}

// MSG / ORCH: act on negotiated wins or assignments; completion timing comes
// from own receipts, not from watching the board.
std::optional<Intent> AgentRuntime::decide_channel(const AgentView& view) {
    if (spec_.strategy == Strategy::FRONTRUNNER) return completion_intent(view);
    if (spec_.strategy == Strategy::HONEST) {
        if (auto done = completion_intent(view)) return done;
    }
    if (spec_.strategy != Strategy::HONEST && spec_.strategy != Strategy::GRIEFER)
        return std::nullopt;

    const Height h = view.exec_height;
    for (auto task_id : won_queue_) {
        auto known = known_tasks_.find(task_id);
        if (known == known_tasks_.end()) continue;
        if (h > known->second.deadline) continue;
        Intent intent{spec_.board, "claim_task",
                      json::array({task_id, known->second.stake_required}), {}};
        if (!inflight(intent)) return intent;
    }
    return std::nullopt;
}

std::optional<Intent> AgentRuntime::frontrun(const AgentView& view) {
    if (spec_.strategy != Strategy::FRONTRUNNER || !spec_.observation.mempool_visible)
        return std::nullopt;

    // Value map for ranking copy targets.
    std::map<std::uint64_t, Amount> task_value;
    std::map<std::uint64_t, Amount> position_value;
    if (view.storage.contains("tasks"))
        for (const auto& task : view.storage["tasks"]) {
            if (task["status"] != "OPEN") continue;
            task_value[task["id"].get<std::uint64_t>()] = task["currentReward"].get<Amount>();
        }
    if (view.storage.contains("positions"))
        for (const auto& pos : view.storage["positions"]) {
            if (pos["healthMicro"].get<std::int64_t>() >= kMicro) continue;
            position_value[pos["id"].get<std::uint64_t>()] = pos["debt"].get<Amount>();
        }

    const Transaction* victim = nullptr;
    Amount best_value = -1;
    for (const auto& tx : view.mempool) {
        if (tx.sender == spec_.address) continue;  // never self-copy
        Amount value = -1;
        if (tx.call_name == "claim_task" && tx.args.is_array() && tx.args.size() == 2) {
            auto it = task_value.find(tx.args[0].get<std::uint64_t>());
            if (it != task_value.end()) value = it->second;
        } else if (tx.call_name == "reveal" && tx.args.is_array() && tx.args.size() == 5 &&
                   tx.args[2] == "claim_task") {
            auto it = task_value.find(tx.args[1].get<std::uint64_t>());
            if (it != task_value.end()) value = it->second;
        } else if (tx.call_name == "liquidate" && tx.args.is_array() && tx.args.size() == 1) {
            auto it = position_value.find(tx.args[0].get<std::uint64_t>());
            if (it != position_value.end()) value = it->second;
        }
        if (value > best_value) {
            best_value = value;
            victim = &tx;
        }
    }
    if (victim == nullptr || best_value < 0) return std::nullopt;

    Intent intent{victim->target, victim->call_name, victim->args,
                  victim->gas_price + spec_.gas_bump};
    if (inflight(intent)) return std::nullopt;
    return intent;
}

// --- self-knowledge ------------------------------------------------------------

void AgentRuntime::on_receipt(const Transaction& tx, const Receipt& receipt) {
    inflight_.erase(Intent{tx.target, tx.call_name, tx.args, {}}.key());

    if (tx.call_name == "commit" && tx.args.is_array() && tx.args.size() == 4) {
        const auto round = tx.args[0].get<std::uint64_t>();
        auto it = commit_memory_.find(round);
        if (it != commit_memory_.end()) {
            if (receipt.status == TxStatus::SUCCESS)
                it->second.confirmed = true;
            else
                commit_memory_.erase(it);  // failed commit: free the round
        }
        return;
    }
    if (tx.call_name == "reveal" && tx.args.is_array() && tx.args.size() == 5) {
        const auto round = tx.args[0].get<std::uint64_t>();
        auto it = commit_memory_.find(round);
        if (it != commit_memory_.end() && receipt.status == TxStatus::SUCCESS)
            it->second.revealed = true;
    }

    // Track acquisitions and losses for modes without storage views.
    if (receipt.status == TxStatus::SUCCESS) {
        for (const auto& ev : receipt.events) {
            if (ev.event_name == "TaskClaimed" && ev.fields["claimant"] == spec_.address) {
                const auto task_id = ev.fields["taskId"].get<std::uint64_t>();
                ClaimFacts facts;
                facts.claim_block = ev.fields["claimBlock"].get<Height>();
                auto known = known_tasks_.find(task_id);
                if (known != known_tasks_.end()) {
                    facts.difficulty = known->second.difficulty;
                    facts.deadline = known->second.deadline;
                }
                my_claims_[task_id] = facts;
                candidates_.erase(task_id);
                won_queue_.erase(std::remove(won_queue_.begin(), won_queue_.end(), task_id),
                                 won_queue_.end());
            }
            if (ev.event_name == "TaskCompleted" && ev.fields["claimant"] == spec_.address)
                my_claims_.erase(ev.fields["taskId"].get<std::uint64_t>());
        }
    } else if (tx.call_name == "claim_task" && tx.args.is_array() && !tx.args.empty()) {
        // a lost race; stop chasing this task unless it reverts to OPEN later
        const auto task_id = tx.args[0].get<std::uint64_t>();
        candidates_.erase(task_id);
        won_queue_.erase(std::remove(won_queue_.begin(), won_queue_.end(), task_id),
                         won_queue_.end());
    }
}

void AgentRuntime::on_dropped(const Transaction& tx) {
    inflight_.erase(Intent{tx.target, tx.call_name, tx.args, {}}.key());
}

// --- baseline channel ------------------------------------------------------------

void AgentRuntime::on_announcement(const json& task) {
    const auto id = task["taskId"].get<std::uint64_t>();
    known_tasks_[id] = TaskFacts{task["reward"].get<Amount>(), task["deadline"].get<Height>(),
                                 task["difficulty"].get<Height>(),
                                 task["capability"].get<std::string>(),
                                 task["stakeRequired"].get<Amount>()};
}

bool AgentRuntime::interested_in(const json& task) const {
    if (spec_.strategy != Strategy::HONEST && spec_.strategy != Strategy::GRIEFER) return false;
    const std::string cap = task["capability"].get<std::string>();
    if (!cap.empty() && cap != spec_.predicate.capability) return false;
    if (task["reward"].get<Amount>() < spec_.predicate.min_reward) return false;
    // one task at a time through the channel
    return my_claims_.empty() && won_queue_.empty();
}

void AgentRuntime::on_win(std::uint64_t task_id) { won_queue_.push_back(task_id); }

void AgentRuntime::on_assignment(const json& task) {
    on_announcement(task);
    won_queue_.push_back(task["taskId"].get<std::uint64_t>());
}

}  // namespace stigsim
