#include "stigsim/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "stigsim/canonical.hpp"

namespace stigsim {

json MetricsReport::to_json() const {
    json latencies = json::array();
    for (const auto& l : completion_latencies)
        latencies.push_back(json{{"taskId", l.task_id},
                                 {"claimLatency", l.claim_latency},
                                 {"completionLatency", l.completion_latency}});
    return json{{"style", style},
                {"seed", seed},
                {"ticks", ticks},
                {"blocks", blocks},
                {"tasksPosted", tasks_posted},
                {"feasibleTasks", feasible_tasks},
                {"tasksCompleted", tasks_completed},
                {"tasksExpired", tasks_expired},
                {"completionRateMicro", completion_rate_micro},
                {"duplicateClaimAttempts", duplicate_claim_attempts},
                {"wastedGas", wasted_gas},
                {"totalGasUsed", total_gas_used},
                {"gasPerCompletedTask", gas_per_completed_task},
                {"medianClaimLatencyBlocks", median_claim_latency},
                {"medianCompletionLatencyBlocks", median_completion_latency},
                {"contestedTasks", contested_tasks},
                {"frontrunnerWonTasks", frontrunner_won_tasks},
                {"frontrunnerWinRateMicro", frontrunner_win_rate_micro},
                {"slashedStake", slashed_stake},
                {"unassignedTasks", unassigned_tasks},
                {"completionLatencies", latencies}};
}

const std::vector<std::string>& MetricsReport::csv_columns() {
    static const std::vector<std::string> kColumns = {
        "style",
        "seed",
        "ticks",
        "blocks",
        "tasksPosted",
        "feasibleTasks",
        "tasksCompleted",
        "tasksExpired",
        "completionRateMicro",
        "duplicateClaimAttempts",
        "wastedGas",
        "totalGasUsed",
        "gasPerCompletedTask",
        "medianClaimLatencyBlocks",
        "medianCompletionLatencyBlocks",
        "contestedTasks",
        "frontrunnerWonTasks",
        "frontrunnerWinRateMicro",
        "slashedStake",
        "unassignedTasks"};
    return kColumns;
}

std::string MetricsReport::csv_row() const {
    std::ostringstream out;
    out << style << ',' << seed << ',' << ticks << ',' << blocks << ',' << tasks_posted << ','
        << feasible_tasks << ',' << tasks_completed << ',' << tasks_expired << ','
        << completion_rate_micro << ',' << duplicate_claim_attempts << ',' << wasted_gas << ','
        << total_gas_used << ',' << gas_per_completed_task << ',' << median_claim_latency << ','
        << median_completion_latency << ',' << contested_tasks << ',' << frontrunner_won_tasks
        << ',' << frontrunner_win_rate_micro << ',' << slashed_stake << ',' << unassigned_tasks;
    return out.str();
}

std::string metrics_csv(const std::vector<MetricsReport>& reports) {
    std::ostringstream out;
    const auto& columns = MetricsReport::csv_columns();
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& r : reports) out << r.csv_row() << '\n';
    return out.str();
}

namespace {

Height lower_median(std::vector<Height> values) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

}  // namespace

MetricsReport fold_metrics(const std::vector<std::string>& trace_lines) {
    if (trace_lines.empty()) throw std::invalid_argument("empty trace");
    const json header = json::parse(trace_lines.front());
    if (header.value("kind", "") != "header") throw std::invalid_argument("missing trace header");

    MetricsReport report;
    report.style = header.at("style").get<std::string>();
    report.seed = header.at("seed").get<std::uint64_t>();
    report.ticks = header.at("ticks").get<Tick>();

    std::map<Address, std::string> strategy_of;
    std::set<std::string> capabilities;
    for (const auto& agent : header.at("agents")) {
        strategy_of[agent.at("address").get<std::string>()] = agent.at("strategy").get<std::string>();
        capabilities.insert(agent.at("capability").get<std::string>());
    }

    struct TaskFold {
        Height post_block = 0;
        Height deadline = 0;
        Height difficulty = 0;
        std::string capability;
        Height first_claim_block = 0;
        Address winner;
        Height done_block = 0;
        bool done = false;
        bool expired = false;
        std::set<Address> claim_attempt_senders;
        bool frontrunner_claimed = false;
    };
    std::map<std::uint64_t, TaskFold> tasks;  // keyed by (board, id) flattened
    auto task_key = [](const std::string& contract, std::uint64_t id) {
        // board ids are "board-<n>"; partition count is bounded well below 1e6
        std::uint64_t board = 0;
        const auto dash = contract.rfind('-');
        if (dash != std::string::npos) board = std::stoull(contract.substr(dash + 1));
        return board * 1000000 + id;
    };

    for (std::size_t i = 1; i < trace_lines.size(); ++i) {
        const json block = json::parse(trace_lines[i]);
        if (block.value("kind", "") != "block") throw std::invalid_argument("bad trace line");
        report.blocks += 1;

        for (const auto& tx : block.at("txs")) {
            const auto status = tx.at("status").get<std::string>();
            const Gas gas_used = tx.at("gasUsed").get<Gas>();
            report.total_gas_used += gas_used;
            if (status == "REVERT" || status == "OUT_OF_GAS") report.wasted_gas += gas_used;

            const auto call = tx.at("call").get<std::string>();
            const auto reason = tx.value("reason", "");
            if (call == "claim_task" && status == "REVERT" && reason == "NOT_OPEN")
                report.duplicate_claim_attempts += 1;
            if (call == "liquidate" && status == "REVERT" && reason == "HEALTHY")
                report.duplicate_claim_attempts += 1;

            // contest bookkeeping: anything that tries to acquire a claim
            const auto& args = tx.at("args");
            if (call == "claim_task" && args.is_array() && args.size() == 2) {
                tasks[task_key(tx.at("target").get<std::string>(), args[0].get<std::uint64_t>())]
                    .claim_attempt_senders.insert(tx.at("sender").get<std::string>());
            } else if (call == "reveal" && args.is_array() && args.size() == 5 &&
                       args[2] == "claim_task") {
                tasks[task_key(tx.at("target").get<std::string>(), args[1].get<std::uint64_t>())]
                    .claim_attempt_senders.insert(tx.at("sender").get<std::string>());
            }
        }

        for (const auto& ev : block.at("events")) {
            const auto name = ev.at("name").get<std::string>();
            const auto& f = ev.at("fields");
            const Height height = ev.at("height").get<Height>();
            const auto contract = ev.at("contract").get<std::string>();
            if (name == "TaskPosted") {
                auto& t = tasks[task_key(contract, f.at("taskId").get<std::uint64_t>())];
                t.post_block = height;
                t.deadline = f.at("deadline").get<Height>();
                t.difficulty = f.at("difficulty").get<Height>();
                t.capability = f.at("capability").get<std::string>();
                report.tasks_posted += 1;
            } else if (name == "TaskClaimed") {
                auto& t = tasks[task_key(contract, f.at("taskId").get<std::uint64_t>())];
                if (t.first_claim_block == 0) {
                    t.first_claim_block = f.at("claimBlock").get<Height>();
                    t.winner = f.at("claimant").get<std::string>();
                }
                auto it = strategy_of.find(f.at("claimant").get<std::string>());
                if (it != strategy_of.end() && it->second == "FRONTRUNNER")
                    t.frontrunner_claimed = true;
            } else if (name == "TaskCompleted") {
                auto& t = tasks[task_key(contract, f.at("taskId").get<std::uint64_t>())];
                t.done = true;
                t.done_block = height;
            } else if (name == "TaskExpired") {
                tasks[task_key(contract, f.at("taskId").get<std::uint64_t>())].expired = true;
                report.slashed_stake += f.at("stakeSlashed").get<Amount>();
            } else if (name == "TaskReverted") {
                const auto& t = f;
                report.slashed_stake +=
                    t.at("slashedToPoker").get<Amount>() + t.at("slashedToPool").get<Amount>();
            } else if (name == "RoundCleaned") {
                report.slashed_stake += f.at("slashedTotal").get<Amount>();
            }
        }
    }

    std::vector<Height> claim_latencies;
    std::vector<Height> completion_latencies;
    for (const auto& [key, t] : tasks) {
        if (t.post_block == 0 && t.deadline == 0) continue;  // attempts on unknown tasks
        // feasible: a claim in the next block could still finish in time
        const bool feasible = t.deadline >= t.post_block + 1 + t.difficulty;
        if (feasible) report.feasible_tasks += 1;
        if (t.done) {
            report.tasks_completed += 1;
            const Height claim_latency = t.first_claim_block - t.post_block;
            const Height completion_latency = t.done_block - t.post_block;
            claim_latencies.push_back(claim_latency);
            completion_latencies.push_back(completion_latency);
            report.completion_latencies.push_back(
                {key % 1000000, claim_latency, completion_latency});
        }
        if (t.expired) report.tasks_expired += 1;
        if (t.claim_attempt_senders.size() >= 2) {
            report.contested_tasks += 1;
            if (t.frontrunner_claimed) report.frontrunner_won_tasks += 1;
        }
        // coverage: nobody in the roster had the required capability
        if (!t.capability.empty() && capabilities.count(t.capability) == 0)
            report.unassigned_tasks += 1;
    }

    if (report.feasible_tasks > 0)
        report.completion_rate_micro =
            report.tasks_completed * 1000000ULL / report.feasible_tasks;
    if (report.tasks_completed > 0)
        report.gas_per_completed_task = report.total_gas_used / Gas(report.tasks_completed);
    report.median_claim_latency = lower_median(claim_latencies);
    report.median_completion_latency = lower_median(completion_latencies);
    if (report.contested_tasks > 0)
        report.frontrunner_win_rate_micro =
            report.frontrunner_won_tasks * 1000000ULL / report.contested_tasks;
    return report;
}

}  // namespace stigsim
