#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stigsim/agents.hpp"
#include "stigsim/types.hpp"

namespace stigsim {

struct Message {
    std::string topic;
    json payload;
    Tick send_tick = 0;
    Tick deliver_tick = 0;  // sendTick + channel latency
};

// Reliable, in-order-per-topic channel. A message published during tick t is
// visible no earlier than tick t+1 even at zero latency; per-topic delivery
// order always matches publish order.
class MessageBus {
  public:
    explicit MessageBus(Tick latency) : latency_(latency) {}

    void publish(const std::string& topic, json payload, Tick now);
    // Messages due at `now`, in publish order; each is delivered once.
    std::vector<Message> collect_due(Tick now);

    void set_extra_latency(Tick extra) { extra_latency_ = extra; }  // failure hook
    std::size_t in_flight() const { return queue_.size(); }

  private:
    Tick latency_;
    Tick extra_latency_ = 0;
    std::map<std::string, Tick> topic_floor_;  // enforces in-order delivery
    std::vector<Message> queue_;
};

// One task's off-chain negotiation: announced, interest collected, lowest
// agent id wins after the window closes. Undecided windows re-arm.
struct Negotiation {
    std::uint64_t task_id = 0;
    json task;  // announcement payload
    Tick decide_tick = 0;
    bool decided = false;
    std::vector<int> interested;
};

// Lowest-id winner per task among intents delivered inside the window.
std::map<std::uint64_t, int> msg_negotiate(std::vector<Negotiation>& negotiations,
                                           Tick now, Tick window);

struct Assignment {
    std::uint64_t task_id = 0;
    int agent_id = 0;
    Tick issued_tick = 0;
};

// Centralized capability-matching scheduler. Observes the ledger directly
// (it is the trusted coordination authority) and issues assignments as bus
// messages; silent windows suspend issuance.
class Orchestrator {
  public:
    Orchestrator(Tick latency, std::uint32_t capacity, Tick silent_from, Tick silent_to)
        : latency_(latency), capacity_(capacity), silent_from_(silent_from), silent_to_(silent_to) {}

    // Greedy matching over open unassigned tasks: fewest live assignments
    // first, ties by lowest agent id. Returns the new assignments; the engine
    // routes them through the bus.
    std::vector<Assignment> step(Tick now, const json& open_tasks,
                                 const std::vector<AgentSpec>& roster);

    // Assignment bookkeeping driven from canonical ledger facts.
    void on_task_closed(std::uint64_t task_id);

    bool silent_at(Tick now) const { return now >= silent_from_ && now <= silent_to_ && silent_to_ > 0; }
    Tick latency() const { return latency_; }
    const std::map<std::uint64_t, Assignment>& live() const { return live_; }

  private:
    Tick latency_;
    std::uint32_t capacity_;
    Tick silent_from_;
    Tick silent_to_;
    std::map<std::uint64_t, Assignment> live_;  // task -> assignment
};

}  // namespace stigsim
