#pragma once

#include <string>
#include <vector>

#include "stigsim/types.hpp"

namespace stigsim {

// Everything here is a pure fold over the trace: re-folding a stored trace
// reproduces the report bit-exactly.
struct MetricsReport {
    std::string style;
    std::uint64_t seed = 0;
    Tick ticks = 0;
    std::uint64_t blocks = 0;
    std::uint64_t tasks_posted = 0;
    std::uint64_t feasible_tasks = 0;
    std::uint64_t tasks_completed = 0;
    std::uint64_t tasks_expired = 0;
    std::uint64_t completion_rate_micro = 0;  // completed / feasible
    std::uint64_t duplicate_claim_attempts = 0;
    Gas wasted_gas = 0;
    Gas total_gas_used = 0;
    Gas gas_per_completed_task = 0;
    Height median_claim_latency = 0;
    Height median_completion_latency = 0;
    std::uint64_t contested_tasks = 0;
    std::uint64_t frontrunner_won_tasks = 0;
    std::uint64_t frontrunner_win_rate_micro = 0;
    Amount slashed_stake = 0;
    std::uint64_t unassigned_tasks = 0;

    // per-task latency detail (kept in JSON output, medians in CSV)
    struct TaskLatency {
        std::uint64_t task_id = 0;
        Height claim_latency = 0;
        Height completion_latency = 0;
    };
    std::vector<TaskLatency> completion_latencies;

    json to_json() const;
    static const std::vector<std::string>& csv_columns();
    std::string csv_row() const;
};

// Parses canonical trace lines (header line + one line per block) and folds
// the metrics. Throws std::invalid_argument on malformed traces.
MetricsReport fold_metrics(const std::vector<std::string>& trace_lines);

std::string metrics_csv(const std::vector<MetricsReport>& reports);

}  // namespace stigsim
