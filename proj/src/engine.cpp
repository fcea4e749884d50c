#include "stigsim/engine.hpp"

#include <algorithm>
#include <cstdio>

#include "stigsim/canonical.hpp"

namespace stigsim {

namespace {

constexpr Amount kPosterGasPriceFallback = 20;

Gas gas_limit_for(const std::string& call) {
    if (call == "cleanup_round") return 250;
    if (call == "reveal") return 120;
    if (call == "liquidate") return 90;
    if (call == "open_position") return 80;
    if (call == "post_task") return 45;
    if (call == "set_price") return 45;
    return 60;
}

std::string borrower_address(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "borrower-%03zu", i);
    return buf;
}

// One coordination style simulated end to end over a shared schedule plan.
class StyleEngine {
  public:
    StyleEngine(const ScenarioConfig& cfg, CoordinationStyle style, const SchedulePlan& plan)
        : cfg_(cfg),
          style_(style),
          plan_(plan),
          roster_(cfg.roster()),
          mempool_(cfg.ordering),
          bus_(cfg.baseline.msg_latency),
          orchestrator_(cfg.baseline.orch_latency, cfg.baseline.orch_capacity,
                        cfg.baseline.orch_silent_from, cfg.baseline.orch_silent_to),
          chain_(build_genesis()) {
        for (const auto& spec : roster_) runtimes_.emplace_back(spec, style_);
        result_.style = style_;
        result_.genesis_total = chain_.state().total_funds();
    }

    StyleRunResult run(const RunHooks* hooks) {
        for (Tick tick = 1; tick <= cfg_.ticks; ++tick) {
            step_channel(tick);
            step_arrivals(tick);
            step_agents(tick);
            step_frontrunners(tick);
            step_seal(tick);
            step_reorg(tick);
            if (hooks != nullptr && hooks->on_block) hooks->on_block(style_, chain_, tick);
        }
        build_trace();
        result_.metrics = fold_metrics(result_.trace_lines);
        return std::move(result_);
    }

  private:
    WorldState build_genesis() const {
        WorldState state;
        state.accounts["poster"].balance = cfg_.poster_balance;
        for (const auto& spec : roster_) state.accounts[spec.address].balance = spec.starting_balance;

        if (cfg_.pattern == PredicateKind::THRESHOLD) {
            LendingPoolParams params;
            params.liquidation_bonus_micro = cfg_.contract.liquidation_bonus_micro;
            params.oracle_mode =
                cfg_.contract.oracle_mode == "MEDIAN" ? OracleMode::MEDIAN : OracleMode::SINGLE;
            for (std::uint32_t f = 0; f < cfg_.contract.oracle_feeds; ++f) {
                params.oracle_accounts.push_back("oracle-" + std::to_string(f));
                params.initial_feeds_micro.push_back(cfg_.price_walk.start_micro);
            }
            for (std::uint32_t p = 0; p < cfg_.partitions; ++p) {
                const ContractId id = "pool-" + std::to_string(p);
                state.contracts.emplace(id, std::make_unique<LendingPool>(id, params));
                state.accounts[id].balance = cfg_.contract.pool_liquidity;
            }
            for (std::uint32_t f = 0; f < cfg_.contract.oracle_feeds; ++f)
                state.accounts["oracle-" + std::to_string(f)].balance = cfg_.oracle_balance;
            for (std::size_t i = 0; i < cfg_.initial_positions.size(); ++i)
                state.accounts[borrower_address(i)].balance = cfg_.borrower_balance;
        } else {
            TaskBoardParams params;
            params.stake_rate_micro = cfg_.contract.stake_rate_micro;
            params.claim_timeout = cfg_.contract.claim_timeout;
            params.decay_rate_micro = cfg_.contract.decay_rate_micro;
            params.decay_grace = cfg_.contract.decay_grace;
            params.commit_reveal = cfg_.pattern == PredicateKind::COMMIT_REVEAL;
            params.commit_window = cfg_.contract.commit_window;
            params.reveal_window = cfg_.contract.reveal_window;
            params.commit_stake = cfg_.contract.commit_stake;
            params.phase_start = 1;
            for (std::uint32_t p = 0; p < cfg_.partitions; ++p) {
                const ContractId id = "board-" + std::to_string(p);
                state.contracts.emplace(id, std::make_unique<TaskBoard>(id, params));
                state.accounts[id].balance = 0;
            }
        }
        return state;
    }

    // --- per-tick steps -----------------------------------------------------

    // (1) deliver due baseline messages, resolve negotiations, let the
    // orchestrator issue assignments.
    void step_channel(Tick tick) {
        if (style_ == CoordinationStyle::STIG) return;

        if (style_ == CoordinationStyle::MSG) {
            const bool boosted = cfg_.baseline.msg_latency_boost > 0 &&
                                 tick >= cfg_.baseline.msg_latency_boost_from &&
                                 tick <= cfg_.baseline.msg_latency_boost_to;
            bus_.set_extra_latency(boosted ? cfg_.baseline.msg_latency_boost : 0);
        }

        const auto due = bus_.collect_due(tick);
        std::vector<json> announcements;
        for (const auto& msg : due) {
            if (msg.topic == "announce") {
                announcements.push_back(msg.payload);
            } else if (msg.topic == "intent") {
                const auto task_id = msg.payload.at("taskId").get<std::uint64_t>();
                for (auto& nego : negotiations_)
                    if (nego.task_id == task_id && !nego.decided)
                        nego.interested.push_back(msg.payload.at("agentId").get<int>());
            } else if (msg.topic == "assign") {
                runtimes_[std::size_t(msg.payload.at("agentId").get<int>())].on_assignment(
                    msg.payload.at("task"));
            }
        }

        if (style_ == CoordinationStyle::MSG) {
            for (const auto& [task_id, winner] : msg_negotiate(negotiations_, tick,
                                                               cfg_.baseline.negotiation_window))
                runtimes_[std::size_t(winner)].on_win(task_id);

            for (const auto& task : announcements) {
                Negotiation nego;
                nego.task_id = task.at("taskId").get<std::uint64_t>();
                nego.task = task;
                nego.decide_tick = tick + cfg_.baseline.negotiation_window;
                negotiations_.push_back(std::move(nego));
                for (auto& runtime : runtimes_) {
                    runtime.on_announcement(task);
                    if (runtime.interested_in(task))
                        bus_.publish("intent",
                                     json{{"taskId", task.at("taskId")},
                                          {"agentId", runtime.spec().id}},
                                     tick);
                }
            }
        }

        if (style_ == CoordinationStyle::ORCH) {
            json open_tasks = json::array();
            const WorldState& state = chain_.state();
            for (std::uint32_t p = 0; p < cfg_.partitions; ++p) {
                const ContractId board = "board-" + std::to_string(p);
                if (state.contracts.count(board) == 0) continue;
                for (const auto& task : read_view(state, board, "getTasksSummary", json::array())) {
                    if (task.at("status") != "OPEN") continue;
                    json t = task;
                    t["board"] = board;
                    open_tasks.push_back(std::move(t));
                }
            }
            for (const auto& assignment : orchestrator_.step(tick, open_tasks, roster_)) {
                json task;
                for (const auto& t : open_tasks)
                    if (t.at("id").get<std::uint64_t>() == assignment.task_id) task = t;
                bus_.publish("assign",
                             json{{"agentId", assignment.agent_id},
                                  {"task", json{{"taskId", assignment.task_id},
                                                {"reward", task.at("reward")},
                                                {"deadline", task.at("deadline")},
                                                {"difficulty", task.at("difficulty")},
                                                {"capability", task.at("capability")},
                                                {"stakeRequired", task.at("stakeRequired")},
                                                {"board", task.at("board")}}}},
                             tick);
            }
        }
    }

    // (2) scheduled arrivals and oracle updates become ordinary transactions.
    void step_arrivals(Tick tick) {
        if (tick == 1) {
            for (std::size_t i = 0; i < cfg_.initial_positions.size(); ++i) {
                const auto& pos = cfg_.initial_positions[i];
                submit_system(borrower_address(i),
                              "pool-" + std::to_string(std::uint32_t(i) % cfg_.partitions),
                              "open_position", json::array({pos.collateral, pos.debt}),
                              cfg_.poster_gas_price > 0 ? cfg_.poster_gas_price
                                                        : kPosterGasPriceFallback,
                              tick);
            }
        }
        for (const auto& arrival : plan_.tasks) {
            if (arrival.tick != tick) continue;
            const Height deadline = chain_.tip() + 1 + arrival.task.deadline_offset;
            submit_system("poster", "board-" + std::to_string(arrival.board), "post_task",
                          json::array({arrival.task.reward, deadline, arrival.task.difficulty,
                                       arrival.task.capability}),
                          cfg_.poster_gas_price, tick);
        }
        for (const auto& update : plan_.prices) {
            if (update.tick != tick) continue;
            for (std::uint32_t p = 0; p < cfg_.partitions; ++p)
                submit_system("oracle-" + std::to_string(update.feed), "pool-" + std::to_string(p),
                              "set_price", json::array({update.feed, update.price_micro}),
                              cfg_.oracle_gas_price, tick);
        }
    }

    // (3) agents observe and decide in ascending id order.
    void step_agents(Tick tick) {
        for (auto& runtime : runtimes_) {
            if (runtime.spec().strategy == Strategy::FRONTRUNNER) continue;  // step (4)
            AgentView view;
            if (style_ == CoordinationStyle::STIG) {
                view = runtime.observe(chain_, mempool_, tick);
                record_deliveries(runtime, view, tick);
            } else {
                view.as_of = chain_.tip();
                view.exec_height = chain_.tip() + 1;
                if (runtime.spec().strategy == Strategy::SPAMMER)
                    view.storage["self"] =
                        json{{"balance", balance_of(runtime.spec().address)}};
            }
            if (auto intent = runtime.decide(view)) submit_agent(runtime, *intent, tick);
        }
    }

    // (4) frontrunners inspect the mempool last and copy at most one target.
    // The copy takes the earlier nonce so it is not queued behind the
    // frontrunner's own lower-priced housekeeping transactions.
    void step_frontrunners(Tick tick) {
        for (auto& runtime : runtimes_) {
            if (runtime.spec().strategy != Strategy::FRONTRUNNER) continue;
            AgentView view = runtime.observe(chain_, mempool_, tick);
            record_deliveries(runtime, view, tick);
            if (auto copy = runtime.frontrun(view)) submit_agent(runtime, *copy, tick);
            if (auto intent = runtime.decide(view)) submit_agent(runtime, *intent, tick);
        }
    }

    // (5) seal one block, route receipts, publish MSG announcements, keep the
    // orchestrator's books, check conservation.
    void step_seal(Tick tick) {
        std::vector<Transaction> dropped;
        const Block& block = chain_.seal_block(mempool_, cfg_.block_gas_limit, tick, &dropped);

        for (const auto& tx : dropped) {
            result_.audit.dropped_txs.push_back(tx);
            if (auto* runtime = runtime_for(tx.sender)) runtime->on_dropped(tx);
        }
        for (std::size_t i = 0; i < block.txs.size(); ++i) {
            const auto& tx = block.txs[i];
            const auto& receipt = block.receipts[i];
            result_.audit.gas_spend[tx.sender] += receipt.gas_used * tx.gas_price;
            if (auto* runtime = runtime_for(tx.sender)) runtime->on_receipt(tx, receipt);

            if (style_ == CoordinationStyle::MSG) {
                for (const auto& ev : receipt.events)
                    if (ev.event_name == "TaskPosted") {
                        json payload = ev.fields;
                        payload["board"] = ev.contract;
                        bus_.publish("announce", payload, tick);
                    }
            }
            if (style_ == CoordinationStyle::ORCH) {
                for (const auto& ev : receipt.events)
                    if (ev.event_name == "TaskCompleted" || ev.event_name == "TaskExpired")
                        orchestrator_.on_task_closed(ev.fields.at("taskId").get<std::uint64_t>());
            }
        }

        if (chain_.state().total_funds() != result_.genesis_total)
            result_.audit.conservation_violations += 1;
    }

    // (6) scheduled reorg: roll back, replay orphaned transactions through
    // the mempool.
    void step_reorg(Tick tick) {
        for (const auto& ev : cfg_.reorg_schedule) {
            if (ev.tick != tick) continue;
            if (ev.depth >= chain_.blocks().size()) {
                result_.audit.skipped_reorgs += 1;
                continue;
            }
            const Height tip_before = chain_.tip();
            ReorgResult reorg = chain_.inject_reorg(ev.depth, tick);
            for (const auto& entry : reorg.orphaned_events)
                result_.audit.orphans.push_back({entry.block_height, entry.log_index, entry.tx_id,
                                                 tip_before - entry.block_height, tick});
            for (const auto& tx : reorg.orphaned_txs) {
                const SubmitResult submitted = mempool_.submit(tx);
                if (submitted == SubmitResult::REJECTED_DUPLICATE ||
                    submitted == SubmitResult::REJECTED_MALFORMED) {
                    result_.audit.dropped_txs.push_back(tx);
                    if (auto* runtime = runtime_for(tx.sender)) runtime->on_dropped(tx);
                }
            }
            recompute_gas_spend();
        }
    }

    // --- submission helpers ---------------------------------------------------

    AgentRuntime* runtime_for(const Address& address) {
        for (auto& runtime : runtimes_)
            if (runtime.spec().address == address) return &runtime;
        return nullptr;
    }

    Amount balance_of(const Address& address) const {
        auto it = chain_.state().accounts.find(address);
        return it == chain_.state().accounts.end() ? 0 : it->second.balance;
    }

    std::uint64_t next_nonce(const Address& sender) const {
        auto it = chain_.state().accounts.find(sender);
        const std::uint64_t confirmed = it == chain_.state().accounts.end() ? 0 : it->second.nonce;
        return confirmed + mempool_.pending_count(sender);
    }

    void submit_system(const Address& sender, const ContractId& target, const std::string& call,
                       json args, Amount gas_price, Tick tick) {
        Transaction tx;
        tx.tx_id = next_tx_id();
        tx.sender = sender;
        tx.target = target;
        tx.call_name = call;
        tx.args = std::move(args);
        tx.gas_limit = gas_limit_for(call);
        tx.gas_price = gas_price;
        tx.nonce = next_nonce(sender);
        tx.arrival_tick = tick;
        mempool_.submit(tx);
    }

    void submit_agent(AgentRuntime& runtime, const Intent& intent, Tick tick) {
        const auto& spec = runtime.spec();
        Transaction tx;
        tx.tx_id = next_tx_id();
        tx.sender = spec.address;
        tx.target = intent.target;
        tx.call_name = intent.call;
        tx.args = intent.args;
        tx.gas_limit = gas_limit_for(intent.call);
        tx.gas_price = intent.gas_price_override.value_or(spec.gas_price);
        tx.nonce = next_nonce(spec.address);
        tx.arrival_tick = tick;

        if (spec.gas_budget > 0) {
            // Conservative reservation: an agent stops before it could ever
            // exceed its budget, so the ceiling holds in every run.
            Amount reserved = 0;
            for (const auto& pending : mempool_.pending())
                if (pending.sender == spec.address) reserved += pending.gas_limit * pending.gas_price;
            const Amount spent = result_.audit.gas_spend.count(spec.address)
                                     ? result_.audit.gas_spend.at(spec.address)
                                     : 0;
            if (spent + reserved + tx.gas_limit * tx.gas_price > spec.gas_budget) return;
        }

        if (mempool_.submit(tx) != SubmitResult::REJECTED_DUPLICATE) runtime.note_submitted(intent);
    }

    std::string next_tx_id() {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "tx-%06llu", static_cast<unsigned long long>(tx_seq_++));
        return buf;
    }

    void record_deliveries(const AgentRuntime& runtime, const AgentView& view, Tick tick) {
        const auto& obs = runtime.spec().observation;
        for (const auto& entry : view.events)
            result_.audit.deliveries.push_back({runtime.spec().id,
                                                std::max(obs.lag, obs.confirmations),
                                                entry.block_height, entry.log_index, entry.tx_id,
                                                entry.event_name, tick});
    }

    void recompute_gas_spend() {
        result_.audit.gas_spend.clear();
        for (const auto& block : chain_.blocks())
            for (std::size_t i = 0; i < block.txs.size(); ++i)
                result_.audit.gas_spend[block.txs[i].sender] +=
                    block.receipts[i].gas_used * block.txs[i].gas_price;
    }

    // --- trace ------------------------------------------------------------------

    void build_trace() {
        json agents = json::array();
        for (const auto& spec : roster_)
            agents.push_back(json{{"address", spec.address},
                                  {"strategy", to_string(spec.strategy)},
                                  {"capability", spec.predicate.capability}});
        const char* pattern = cfg_.pattern == PredicateKind::STATE_FLAG    ? "STATE_FLAG"
                              : cfg_.pattern == PredicateKind::EVENT_SIGNAL ? "EVENT_SIGNAL"
                              : cfg_.pattern == PredicateKind::THRESHOLD    ? "THRESHOLD"
                                                                            : "COMMIT_REVEAL";
        result_.trace_lines.push_back(canonical_dump(json{{"kind", "header"},
                                                          {"style", to_string(style_)},
                                                          {"seed", cfg_.seed},
                                                          {"ticks", cfg_.ticks},
                                                          {"pattern", pattern},
                                                          {"partitions", cfg_.partitions},
                                                          {"agents", agents},
                                                          {"genesisTotal", result_.genesis_total}}));

        for (const auto& block : chain_.blocks()) {
            json txs = json::array();
            json events = json::array();
            for (std::size_t i = 0; i < block.txs.size(); ++i) {
                json tx = block.txs[i].to_json();
                tx["status"] = to_string(block.receipts[i].status);
                tx["reason"] = block.receipts[i].reason;
                tx["gasUsed"] = block.receipts[i].gas_used;
                txs.push_back(std::move(tx));
                for (const auto& ev : block.receipts[i].events) events.push_back(ev.to_json());
            }
            result_.trace_lines.push_back(canonical_dump(json{{"kind", "block"},
                                                              {"height", block.height},
                                                              {"parentDigest", block.parent_digest},
                                                              {"stateDigest", block.state_digest},
                                                              {"txs", txs},
                                                              {"events", events}}));
            result_.block_digests.emplace_back(block.height, block.state_digest);
        }

        Sha256 hasher;
        for (const auto& line : result_.trace_lines) {
            hasher.update(line);
            hasher.update("\n");
        }
        result_.trace_digest = to_hex(hasher.finish());
        result_.final_state_digest = chain_.state().digest();
    }

    const ScenarioConfig& cfg_;
    CoordinationStyle style_;
    const SchedulePlan& plan_;
    std::vector<AgentSpec> roster_;
    Mempool mempool_;
    MessageBus bus_;
    Orchestrator orchestrator_;
    Chain chain_;
    std::vector<AgentRuntime> runtimes_;
    std::vector<Negotiation> negotiations_;
    std::uint64_t tx_seq_ = 0;
    StyleRunResult result_;
};

}  // namespace

SchedulePlan plan_schedule(const ScenarioConfig& cfg) {
    SchedulePlan plan;
    std::uint32_t task_index = 0;
    for (const auto& task : cfg.initial_tasks)
        plan.tasks.push_back({1, task, task_index++ % cfg.partitions});

    if (cfg.arrivals.count > 0) {
        RngStream arrivals = rng_stream(cfg.seed, "arrivals");
        std::uint64_t arrived = 0;
        for (Tick tick = cfg.arrivals.start_tick; tick <= cfg.ticks && arrived < cfg.arrivals.count;
             ++tick) {
            if (!arrivals.bernoulli_micro(cfg.arrivals.rate_micro)) continue;
            plan.tasks.push_back({tick, cfg.arrivals.task, task_index++ % cfg.partitions});
            ++arrived;
        }
    }

    if (cfg.price_walk.enabled) {
        RngStream prices = rng_stream(cfg.seed, "prices");
        std::int64_t price = cfg.price_walk.start_micro;
        const Tick last_update =
            cfg.ticks > cfg.price_walk.freeze_tail_ticks ? cfg.ticks - cfg.price_walk.freeze_tail_ticks : 0;
        for (Tick tick = 2; tick <= last_update; ++tick) {
            if ((tick - 2) % cfg.price_walk.every_ticks != 0) continue;
            const bool down = prices.bernoulli_micro(cfg.price_walk.down_bias_micro);
            price += down ? -cfg.price_walk.step_micro : cfg.price_walk.step_micro;
            price = std::clamp(price, cfg.price_walk.floor_micro, cfg.price_walk.cap_micro);
            plan.prices.push_back({tick, 0, price});
        }
    }
    return plan;
}

RunResult run_scenario(const ScenarioConfig& cfg, const RunHooks* hooks) {
    RunResult result;
    result.config_digest = cfg.digest();
    const SchedulePlan plan = plan_schedule(cfg);
    for (const auto style : cfg.styles) {
        StyleEngine engine(cfg, style, plan);
        result.styles.push_back(engine.run(hooks));
    }
    return result;
}

}  // namespace stigsim
