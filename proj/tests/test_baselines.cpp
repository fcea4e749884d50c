#include "doctest.h"
#include "stigsim/baselines.hpp"

using namespace stigsim;

namespace {

AgentSpec worker(int id, const std::string& capability, Strategy strategy = Strategy::HONEST) {
    AgentSpec spec;
    spec.id = id;
    spec.address = "agent-" + std::to_string(id);
    spec.strategy = strategy;
    spec.predicate.capability = capability;
    return spec;
}

}  // namespace

TEST_CASE("bus: delivery respects latency and the next-tick floor") {
    MessageBus bus(0);
    bus.publish("announce", json{{"x", 1}}, 5);
    CHECK(bus.collect_due(5).empty());  // same tick: not visible
    const auto due = bus.collect_due(6);
    REQUIRE(due.size() == 1);
    CHECK(due[0].payload["x"] == 1);
    CHECK(bus.collect_due(7).empty());  // delivered once

    MessageBus slow(3);
    slow.publish("announce", json{{"x", 2}}, 5);
    CHECK(slow.collect_due(7).empty());
    CHECK(slow.collect_due(8).size() == 1);
}

TEST_CASE("bus: per-topic order survives a latency boost window") {
    MessageBus bus(1);
    bus.set_extra_latency(3);
    bus.publish("announce", json{{"seq", 1}}, 9);  // deliver 13
    bus.set_extra_latency(0);
    bus.publish("announce", json{{"seq", 2}}, 10);  // computed 11, floored to 13
    std::vector<int> order;
    for (Tick t = 10; t <= 14; ++t)
        for (const auto& msg : bus.collect_due(t)) order.push_back(msg.payload["seq"].get<int>());
    REQUIRE(order.size() == 2);
    CHECK(order[0] == 1);
    CHECK(order[1] == 2);
}

TEST_CASE("msg_negotiate: lowest agent id wins; empty windows re-arm") {
    std::vector<Negotiation> negotiations;
    Negotiation n;
    n.task_id = 4;
    n.decide_tick = 10;
    n.interested = {7, 3};
    negotiations.push_back(n);

    auto winners = msg_negotiate(negotiations, 9, 2);
    CHECK(winners.empty());  // not due yet

    winners = msg_negotiate(negotiations, 10, 2);
    REQUIRE(winners.size() == 1);
    CHECK(winners[4] == 3);
    CHECK(negotiations[0].decided);

    // no interest: the window re-arms instead of deciding
    Negotiation empty;
    empty.task_id = 9;
    empty.decide_tick = 10;
    std::vector<Negotiation> pending{empty};
    winners = msg_negotiate(pending, 10, 2);
    CHECK(winners.empty());
    CHECK(pending[0].decide_tick == 12);
    CHECK(!pending[0].decided);
}

TEST_CASE("orchestrator: greedy least-loaded matching with ties by id") {
    Orchestrator orch(1, 2, 0, 0);
    const json tasks = json::array({json{{"id", 1}, {"capability", "generic"}},
                                    json{{"id", 2}, {"capability", "generic"}}});
    const std::vector<AgentSpec> roster = {worker(0, "generic"), worker(1, "generic")};
    const auto assigned = orch.step(1, tasks, roster);
    REQUIRE(assigned.size() == 2);
    CHECK(assigned[0].task_id == 1);
    CHECK(assigned[0].agent_id == 0);
    CHECK(assigned[1].task_id == 2);
    CHECK(assigned[1].agent_id == 1);  // least-loaded beats lowest id

    // a task already assigned is not reassigned
    CHECK(orch.step(2, tasks, roster).empty());
}

TEST_CASE("orchestrator: no capable agent leaves the task unassigned") {
    Orchestrator orch(1, 2, 0, 0);
    const json tasks = json::array({json{{"id", 1}, {"capability", "exotic"}}});
    const std::vector<AgentSpec> roster = {worker(0, "generic")};
    CHECK(orch.step(1, tasks, roster).empty());
    CHECK(orch.live().empty());
}

TEST_CASE("orchestrator: capacity caps live assignments per agent") {
    Orchestrator orch(1, 2, 0, 0);
    const json tasks = json::array({json{{"id", 1}, {"capability", "generic"}},
                                    json{{"id", 2}, {"capability", "generic"}},
                                    json{{"id", 3}, {"capability", "generic"}}});
    const std::vector<AgentSpec> roster = {worker(0, "generic")};
    const auto assigned = orch.step(1, tasks, roster);
    REQUIRE(assigned.size() == 2);  // capacity 2: task 3 waits
    CHECK(orch.live().size() == 2);

    // closing a task frees capacity (a closed task is no longer open)
    orch.on_task_closed(1);
    const json still_open = json::array({json{{"id", 2}, {"capability", "generic"}},
                                         json{{"id", 3}, {"capability", "generic"}}});
    const auto more = orch.step(2, still_open, roster);
    REQUIRE(more.size() == 1);
    CHECK(more[0].task_id == 3);
}

TEST_CASE("orchestrator: silence window suspends assignment issuance") {
    Orchestrator orch(1, 2, 10, 20);
    const json tasks = json::array({json{{"id", 1}, {"capability", "generic"}}});
    const std::vector<AgentSpec> roster = {worker(0, "generic")};
    CHECK(orch.silent_at(10));
    CHECK(orch.silent_at(20));
    CHECK(!orch.silent_at(21));
    CHECK(orch.step(15, tasks, roster).empty());
    CHECK(orch.step(21, tasks, roster).size() == 1);
}

TEST_CASE("orchestrator: non-worker strategies are never assigned") {
    Orchestrator orch(1, 2, 0, 0);
    const json tasks = json::array({json{{"id", 1}, {"capability", "generic"}}});
    const std::vector<AgentSpec> roster = {worker(0, "generic", Strategy::FRONTRUNNER),
                                           worker(1, "generic", Strategy::SPAMMER),
                                           worker(2, "generic", Strategy::HONEST)};
    const auto assigned = orch.step(1, tasks, roster);
    REQUIRE(assigned.size() == 1);
    CHECK(assigned[0].agent_id == 2);
}
