#include "stigsim/baselines.hpp"

#include <algorithm>

namespace stigsim {

void MessageBus::publish(const std::string& topic, json payload, Tick now) {
    Message msg;
    msg.topic = topic;
    msg.payload = std::move(payload);
    msg.send_tick = now;
    Tick deliver = now + latency_ + extra_latency_;
    auto floor_it = topic_floor_.find(topic);
    if (floor_it != topic_floor_.end()) deliver = std::max(deliver, floor_it->second);
    topic_floor_[topic] = deliver;
    msg.deliver_tick = deliver;
    queue_.push_back(std::move(msg));
}

std::vector<Message> MessageBus::collect_due(Tick now) {
    std::vector<Message> due;
    std::vector<Message> keep;
    for (auto& msg : queue_) {
        if (msg.deliver_tick <= now && msg.send_tick < now)
            due.push_back(std::move(msg));
        else
            keep.push_back(std::move(msg));
    }
    queue_ = std::move(keep);
    return due;  // queue order == publish order, so per-topic order holds
}

std::map<std::uint64_t, int> msg_negotiate(std::vector<Negotiation>& negotiations, Tick now,
                                           Tick window) {
    std::map<std::uint64_t, int> winners;
    for (auto& nego : negotiations) {
        if (nego.decided || nego.decide_tick != now) continue;
        if (nego.interested.empty()) {
            nego.decide_tick = now + std::max<Tick>(window, 1);  // re-arm for later windows
            continue;
        }
        const int winner = *std::min_element(nego.interested.begin(), nego.interested.end());
        nego.decided = true;
        winners[nego.task_id] = winner;
    }
    return winners;
}

std::vector<Assignment> Orchestrator::step(Tick now, const json& open_tasks,
                                           const std::vector<AgentSpec>& roster) {
    std::vector<Assignment> issued;
    if (silent_at(now)) return issued;

    std::map<int, std::uint32_t> load;
    for (const auto& [task_id, assignment] : live_) load[assignment.agent_id] += 1;

    for (const auto& task : open_tasks) {
        const auto task_id = task["id"].get<std::uint64_t>();
        if (live_.count(task_id) > 0) continue;
        const std::string cap = task["capability"].get<std::string>();

        const AgentSpec* chosen = nullptr;
        std::uint32_t chosen_load = 0;
        for (const auto& agent : roster) {
            if (agent.strategy != Strategy::HONEST && agent.strategy != Strategy::GRIEFER) continue;
            if (!cap.empty() && agent.predicate.capability != cap) continue;
            const std::uint32_t agent_load = load.count(agent.id) ? load.at(agent.id) : 0;
            if (agent_load >= capacity_) continue;
            if (chosen == nullptr || agent_load < chosen_load ||
                (agent_load == chosen_load && agent.id < chosen->id)) {
                chosen = &agent;
                chosen_load = agent_load;
            }
        }
        if (chosen == nullptr) continue;  // coverage gap, reported by metrics

        Assignment assignment{task_id, chosen->id, now};
        live_[task_id] = assignment;
        load[chosen->id] += 1;
        issued.push_back(assignment);
    }
    return issued;
}

void Orchestrator::on_task_closed(std::uint64_t task_id) { live_.erase(task_id); }

}  // namespace stigsim
