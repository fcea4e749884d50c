// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Each criterion pins its thresholds in code; scenario inputs come from the
// gen-config templates plus randomized corpora derived from named rng streams.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stigsim/artifacts.hpp"
#include "stigsim/canonical.hpp"
#include "stigsim/engine.hpp"

using namespace stigsim;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& what) {
    std::printf("[%2d] %s %s\n", criterion, ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) ++failures;
}

const StyleRunResult& style_run(const RunResult& result, CoordinationStyle style) {
    for (const auto& run : result.styles)
        if (run.style == style) return run;
    throw std::runtime_error("missing style");
}

// ---------------------------------------------------------------------------
// 1. Determinism across the five templates, plus cmd_verify round trip.
void criterion_determinism() {
    bool ok = true;
    std::string detail;
    const fs::path dir = fs::temp_directory_path() / "stigsim_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);

    for (const auto& name : template_names()) {
        const auto cfg = ScenarioConfig::from_json(template_config(name));
        const auto a = run_scenario(cfg);
        const auto b = run_scenario(cfg);
        for (std::size_t i = 0; i < a.styles.size(); ++i) {
            if (a.styles[i].trace_digest != b.styles[i].trace_digest) {
                ok = false;
                detail = name + " trace digests differ";
            }
        }
        // exercise the verify path end to end through files
        const fs::path cfg_path = dir / (name + ".json");
        std::ofstream(cfg_path) << template_config(name).dump();
        const fs::path digest_path = dir / (name + ".digest");
        std::ofstream(digest_path) << digest_file_contents(a);
        const auto outcome = cmd_verify(cfg_path, digest_path);
        if (!outcome.ok) {
            ok = false;
            detail = name + " verify failed: " + outcome.message;
        }
    }
    report(1, ok, "determinism: 5 templates x 2 runs, identical digests, verify passes" +
                      (detail.empty() ? "" : " (" + detail + ")"));
}

// ---------------------------------------------------------------------------
// 2 + 3. Randomized small-scenario corpus: single occupancy (no task ever has
// two claimants; claim successes always separated by a reversion), status
// machine closure, and conservation at every height.
struct CorpusStats {
    std::uint64_t runs = 0;
    std::uint64_t occupancy_violations = 0;
    std::uint64_t status_violations = 0;
    std::uint64_t conservation_violations = 0;
    std::uint64_t claims_seen = 0;
};

json random_small_config(RngStream& rng) {
    const std::uint64_t honest = 1 + rng.next_below(18);
    const std::uint64_t griefers = rng.next_below(3);
    const std::uint64_t tasks = 1 + rng.next_below(10);
    const std::uint64_t ticks = 8 + rng.next_below(7);
    const bool staking = rng.next_below(2) == 0;
    const std::uint64_t timeout = staking ? 3 + rng.next_below(4) : 0;
    const bool events = rng.next_below(4) == 0;
    const bool congested = rng.next_below(5) == 0;
    const std::uint64_t partitions = 1 + rng.next_below(2);

    json agents = json::array();
    agents.push_back(json{{"count", honest},
                          {"strategy", "HONEST"},
                          {"observation", json{{"mode", events ? "EVENT_SUBSCRIBE" : "STORAGE_POLL"},
                                               {"lagBlocks", rng.next_below(2)},
                                               {"confirmationBlocks", events ? rng.next_below(3) : 0},
                                               {"mempoolVisible", false}}},
                          {"capability", "generic"},
                          {"gasPrice", 10},
                          {"balance", 5000}});
    if (griefers > 0)
        agents.push_back(json{{"count", griefers},
                              {"strategy", "GRIEFER"},
                              {"capability", "generic"},
                              {"gasPrice", 11},
                              {"balance", 600}});

    json initial = json::array();
    for (std::uint64_t i = 0; i < tasks; ++i)
        initial.push_back(json{{"reward", 50 + Amount(rng.next_below(100))},
                               {"deadlineOffsetBlocks", 6 + rng.next_below(15)},
                               {"difficultyBlocks", rng.next_below(4)},
                               {"capability", "generic"}});

    json cfg = json{{"seed", rng.next()},
                    {"styles", json::array({"STIG"})},
                    {"pattern", events ? "EVENT_SIGNAL" : "STATE_FLAG"},
                    {"ticks", ticks},
                    {"blockGasLimit", congested ? 150 : 100000},
                    {"orderingPolicy", rng.next_below(4) == 0 ? "FIFO" : "GAS_PRICE_DESC"},
                    {"partitions", partitions},
                    {"contract", json{{"stakeRateMicro", staking ? 100000 : 0},
                                      {"claimTimeoutBlocks", timeout}}},
                    {"agents", agents},
                    {"tasks", json{{"initial", initial}}},
                    {"posterBalance", 40000},
                    {"posterGasPrice", 20}};
    if (rng.next_below(10) < 3 && ticks > 6)
        cfg["reorgSchedule"] = json::array(
            {json{{"tick", 3 + rng.next_below(ticks - 5)}, {"depth", 1 + rng.next_below(2)}}});
    return cfg;
}

void audit_task_lifecycles(const StyleRunResult& run, CorpusStats& stats) {
    // per (board, task): status machine driven by canonical events
    std::map<std::string, std::string> status;
    for (std::size_t i = 1; i < run.trace_lines.size(); ++i) {
        const json block = json::parse(run.trace_lines[i]);
        for (const auto& ev : block["events"]) {
            const std::string name = ev["name"].get<std::string>();
            if (name != "TaskPosted" && name != "TaskClaimed" && name != "TaskReverted" &&
                name != "TaskCompleted" && name != "TaskExpired")
                continue;
            const std::string key = ev["contract"].get<std::string>() + "#" +
                                    std::to_string(ev["fields"]["taskId"].get<std::uint64_t>());
            auto it = status.find(key);
            const std::string current = it == status.end() ? "" : it->second;
            if (name == "TaskPosted") {
                if (!current.empty()) ++stats.status_violations;
                status[key] = "OPEN";
            } else if (name == "TaskClaimed") {
                ++stats.claims_seen;
                if (current != "OPEN") ++stats.occupancy_violations;  // CLAIMED->CLAIMED included
                status[key] = "CLAIMED";
            } else if (name == "TaskReverted") {
                if (current != "CLAIMED") ++stats.status_violations;
                status[key] = "OPEN";
            } else if (name == "TaskCompleted") {
                if (current != "CLAIMED") ++stats.status_violations;
                status[key] = "DONE";
            } else {  // TaskExpired
                if (current != "OPEN" && current != "CLAIMED") ++stats.status_violations;
                status[key] = "EXPIRED";
            }
        }
    }
}

CorpusStats run_corpus(std::uint64_t count) {
    CorpusStats stats;
    RngStream rng(20260809, "acceptance-corpus");
    RunHooks hooks;

    // claimant-shape check straight off the world state, every block
    std::uint64_t shape_violations = 0;
    hooks.on_block = [&](CoordinationStyle, const Chain& chain, Tick) {
        for (const auto& [id, contract] : chain.state().contracts) {
            const auto* board = dynamic_cast<const TaskBoard*>(contract.get());
            if (board == nullptr) continue;
            for (const auto& [tid, task] : board->tasks()) {
                const bool has_claimant = !task.claimant.empty();
                if (task.status == TaskStatus::CLAIMED && !has_claimant) ++shape_violations;
                if (task.status != TaskStatus::CLAIMED && has_claimant) ++shape_violations;
            }
        }
    };

    for (std::uint64_t i = 0; i < count; ++i) {
        const auto cfg = ScenarioConfig::from_json(random_small_config(rng));
        const auto result = run_scenario(cfg, &hooks);
        for (const auto& run : result.styles) {
            ++stats.runs;
            stats.conservation_violations += run.audit.conservation_violations;
            audit_task_lifecycles(run, stats);
        }
    }
    stats.occupancy_violations += shape_violations;
    return stats;
}

// ---------------------------------------------------------------------------
// 4. Contention ordering on the benign template.
void criterion_contention() {
    const auto cfg = ScenarioConfig::from_json(template_config("taskboard-benign"));
    const auto result = run_scenario(cfg);
    const auto& stig = style_run(result, CoordinationStyle::STIG).metrics;
    const auto& msg = style_run(result, CoordinationStyle::MSG).metrics;
    const auto& orch = style_run(result, CoordinationStyle::ORCH).metrics;
    const bool ok = stig.duplicate_claim_attempts > msg.duplicate_claim_attempts &&
                    msg.duplicate_claim_attempts == 0 && orch.duplicate_claim_attempts == 0 &&
                    stig.wasted_gas > 0 && orch.wasted_gas == 0;
    char buf[180];
    std::snprintf(buf, sizeof(buf),
                  "contention: dup STIG=%llu > MSG=%llu = ORCH=%llu = 0; wasted STIG=%lld > ORCH=%lld = 0",
                  (unsigned long long)stig.duplicate_claim_attempts,
                  (unsigned long long)msg.duplicate_claim_attempts,
                  (unsigned long long)orch.duplicate_claim_attempts, (long long)stig.wasted_gas,
                  (long long)orch.wasted_gas);
    report(4, ok, buf);
}

// ---------------------------------------------------------------------------
// 5. Griefing recovery with and without staking/timeout.
void criterion_griefing() {
    json with = template_config("taskboard-adversarial");
    with["styles"] = json::array({"STIG"});
    const auto protected_run = run_scenario(ScenarioConfig::from_json(with));
    const auto& staked = protected_run.styles.front().metrics;

    json without = with;
    without["contract"]["stakeRateMicro"] = 0;
    without["contract"]["claimTimeoutBlocks"] = 0;
    const auto bare_run = run_scenario(ScenarioConfig::from_json(without));
    const auto& bare = bare_run.styles.front().metrics;

    const bool ok = staked.completion_rate_micro == 1000000 &&
                    bare.completion_rate_micro < 1000000;
    char buf[180];
    std::snprintf(buf, sizeof(buf),
                  "griefing recovery: completionRate staked=%llu/1e6 (want 1.0), unstaked=%llu/1e6 (< 1.0)",
                  (unsigned long long)staked.completion_rate_micro,
                  (unsigned long long)bare.completion_rate_micro);
    report(5, ok, buf);
}

// ---------------------------------------------------------------------------
// 6. Commit-reveal: kills copy-frontrunning, roughly doubles gas, adds >= 2
// blocks of claim latency.
void criterion_commit_reveal() {
    json overlay_json = template_config("commit-reveal");
    json raw_json = overlay_json;
    raw_json["pattern"] = "STATE_FLAG";

    const auto raw = run_scenario(ScenarioConfig::from_json(raw_json));
    const auto& raw_metrics = raw.styles.front().metrics;
    const bool raw_ok = raw_metrics.frontrunner_win_rate_micro == 1000000;

    std::uint64_t worst_overlay_rate = 0;
    double ratio_lo = 1e9, ratio_hi = 0;
    Height latency_gain = 0;
    bool completions_ok = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        json sweep = overlay_json;
        sweep["seed"] = seed;
        const auto overlay = run_scenario(ScenarioConfig::from_json(sweep));
        const auto& m = overlay.styles.front().metrics;
        worst_overlay_rate = std::max(worst_overlay_rate, m.frontrunner_win_rate_micro);

        json raw_sweep = raw_json;
        raw_sweep["seed"] = seed;
        const auto raw_at_seed = run_scenario(ScenarioConfig::from_json(raw_sweep));
        const auto& rm = raw_at_seed.styles.front().metrics;
        if (m.tasks_completed == 0 || rm.tasks_completed == 0) completions_ok = false;

        const double ratio = double(m.gas_per_completed_task) / double(rm.gas_per_completed_task);
        ratio_lo = std::min(ratio_lo, ratio);
        ratio_hi = std::max(ratio_hi, ratio);
        latency_gain = m.median_claim_latency - rm.median_claim_latency;
    }

    const bool overlay_ok = worst_overlay_rate <= 300000;  // 1/5 + 0.1
    const bool ratio_ok = ratio_lo >= 1.8 && ratio_hi <= 2.6;
    const bool latency_ok = latency_gain >= 2;
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "commit-reveal: raw winRate=%llu/1e6 (want 1.0); overlay max=%llu/1e6 (<= 300000); "
                  "gas ratio [%.3f, %.3f] within [1.8, 2.6]; claim latency +%llu (>= 2)",
                  (unsigned long long)raw_metrics.frontrunner_win_rate_micro,
                  (unsigned long long)worst_overlay_rate, ratio_lo, ratio_hi,
                  (unsigned long long)latency_gain);
    report(6, raw_ok && overlay_ok && ratio_ok && latency_ok && completions_ok, buf);
}

// ---------------------------------------------------------------------------
// 7. Liquidation oracle equivalence over randomized price paths. The audit
// recomputes health from raw storage with its own arithmetic route.
void criterion_liquidation(std::uint64_t paths) {
    RngStream rng(20260809, "acceptance-liquidation");
    std::uint64_t mismatches = 0, late = 0, unsound = 0, total_marked = 0;

    for (std::uint64_t path = 0; path < paths; ++path) {
        const std::uint64_t positions = 1 + rng.next_below(6);
        json positions_json = json::array();
        for (std::uint64_t i = 0; i < positions; ++i)
            positions_json.push_back(
                json{{"collateral", 120 + Amount(rng.next_below(80))}, {"debt", 100}});
        json cfg_json =
            json{{"seed", rng.next()},
                 {"styles", json::array({"STIG"})},
                 {"pattern", "THRESHOLD"},
                 {"ticks", 24},
                 {"blockGasLimit", 100000},
                 {"orderingPolicy", "GAS_PRICE_DESC"},
                 {"partitions", 1},
                 {"contract", json{{"liquidationBonusMicro", 50000},
                                   {"oracleMode", "SINGLE"},
                                   {"oracleFeeds", 1},
                                   {"poolLiquidity", 4000}}},
                 {"agents", json::array({json{{"count", 3},
                                              {"strategy", "HONEST"},
                                              {"capability", "liquidator"},
                                              {"gasPrice", 10},
                                              {"balance", 30000}}})},
                 {"positions", json{{"initial", positions_json}, {"borrowerBalance", 3000}}},
                 {"priceWalk", json{{"enabled", true},
                                    {"startMicro", 1000000 + std::int64_t(rng.next_below(300000))},
                                    {"stepMicro", 80000 + std::int64_t(rng.next_below(120000))},
                                    {"everyTicks", 1 + rng.next_below(2)},
                                    {"downBiasMicro", 550000 + rng.next_below(300000)},
                                    {"floorMicro", 250000},
                                    {"capMicro", 1800000},
                                    {"freezeTailTicks", 4}}},
                 {"posterBalance", 1000},
                 {"posterGasPrice", 20},
                 {"oracleBalance", 20000},
                 {"oracleGasPrice", 5}};

        std::set<std::uint64_t> marked;
        std::map<std::uint64_t, Height> first_marked_at;
        RunHooks hooks;
        hooks.on_block = [&](CoordinationStyle, const Chain& chain, Tick) {
            const auto& state = chain.state();
            const json storage = state.contracts.at("pool-0")->storage_json();
            const std::int64_t price = storage["feeds"][0].get<std::int64_t>();
            for (const auto& [pid_str, pos] : storage["positions"].items()) {
                if (pos["closed"].get<bool>()) continue;
                const Amount debt = pos["debt"].get<Amount>();
                if (debt == 0) continue;
                const __int128 health = __int128(pos["collateral"].get<Amount>()) * price / debt;
                if (health < kMicro) {
                    const auto pid = std::stoull(pid_str);
                    marked.insert(pid);
                    if (first_marked_at.count(pid) == 0) first_marked_at[pid] = state.height;
                }
            }
        };
        const auto result = run_scenario(ScenarioConfig::from_json(cfg_json), &hooks);
        const auto& run = result.styles.front();

        std::set<std::uint64_t> liquidated;
        std::map<std::uint64_t, Height> liquidated_at;
        for (std::size_t i = 1; i < run.trace_lines.size(); ++i) {
            const json block = json::parse(run.trace_lines[i]);
            for (const auto& ev : block["events"]) {
                if (ev["name"] != "Liquidated") continue;
                const auto pid = ev["fields"]["positionId"].get<std::uint64_t>();
                liquidated.insert(pid);
                liquidated_at[pid] = ev["height"].get<Height>();
            }
        }
        total_marked += marked.size();
        if (marked != liquidated) ++mismatches;
        for (const auto& [pid, when] : liquidated_at) {
            const auto marked_it = first_marked_at.find(pid);
            if (marked_it == first_marked_at.end()) {
                ++unsound;  // liquidated but never marked: pre-state was healthy
                continue;
            }
            if (when > marked_it->second + 2) ++late;
        }
    }

    const bool ok = mismatches == 0 && late == 0 && unsound == 0 && total_marked > 0;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "liquidation oracle: %llu paths, %llu marked; set mismatches=%llu, late=%llu, "
                  "unsound=%llu (all must be 0)",
                  (unsigned long long)paths, (unsigned long long)total_marked,
                  (unsigned long long)mismatches, (unsigned long long)late,
                  (unsigned long long)unsound);
    report(7, ok, buf);
}

// ---------------------------------------------------------------------------
// 8. Reorg safety for event subscribers with k confirmations.
void criterion_reorg_safety() {
    json cfg_json = template_config("taskboard-benign");
    cfg_json["pattern"] = "EVENT_SIGNAL";
    cfg_json["styles"] = json::array({"STIG"});
    cfg_json["ticks"] = 30;
    cfg_json["agents"] = json::array(
        {json{{"count", 6},
              {"strategy", "HONEST"},
              {"observation", json{{"mode", "EVENT_SUBSCRIBE"},
                                   {"lagBlocks", 0},
                                   {"confirmationBlocks", 3},
                                   {"mempoolVisible", false}}},
              {"capability", "generic"},
              {"gasPrice", 10},
              {"balance", 5000}}});
    cfg_json["tasks"]["initial"] = json::array();
    cfg_json["tasks"]["arrivals"] = json{{"count", 6},
                                         {"startTick", 2},
                                         {"rateMicro", 500000},
                                         {"reward", 100},
                                         {"deadlineOffsetBlocks", 25},
                                         {"difficultyBlocks", 2},
                                         {"capability", "generic"}};
    cfg_json["reorgSchedule"] = json::array({json{{"tick", 6}, {"depth", 2}},
                                             json{{"tick", 13}, {"depth", 2}},
                                             json{{"tick", 20}, {"depth", 2}}});

    std::uint64_t violations = 0, orphans = 0, deliveries = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        cfg_json["seed"] = seed;
        const auto result = run_scenario(ScenarioConfig::from_json(cfg_json));
        const auto& run = result.styles.front();
        orphans += run.audit.orphans.size();
        deliveries += run.audit.deliveries.size();
        for (const auto& d : run.audit.deliveries)
            for (const auto& o : run.audit.orphans)
                if (d.block_height == o.block_height && d.log_index == o.log_index &&
                    d.tx_id == o.tx_id && d.tick <= o.tick &&
                    o.confirmations_at_orphan < d.confirmations_required)
                    ++violations;
    }
    const bool ok = violations == 0 && orphans > 0 && deliveries > 0;
    char buf[180];
    std::snprintf(buf, sizeof(buf),
                  "reorg safety: %llu deliveries, %llu orphaned events over 10 seeds; "
                  "under-confirmed deliveries=%llu (must be 0)",
                  (unsigned long long)deliveries, (unsigned long long)orphans,
                  (unsigned long long)violations);
    report(8, ok, buf);
}

// ---------------------------------------------------------------------------
// 9. Partition sweep: mean duplicate claims non-increasing in partitions.
void criterion_partition_sweep() {
    std::vector<double> means;
    for (std::uint32_t partitions : {1u, 2u, 3u, 4u}) {
        double total = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            json cfg_json = template_config("partition-sweep");
            cfg_json["partitions"] = partitions;
            cfg_json["seed"] = seed;
            const auto result = run_scenario(ScenarioConfig::from_json(cfg_json));
            total += double(result.styles.front().metrics.duplicate_claim_attempts);
        }
        means.push_back(total / 20.0);
    }
    bool ok = true;
    for (std::size_t i = 1; i < means.size(); ++i)
        if (means[i] > means[i - 1]) ok = false;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "partition sweep: mean duplicates %.2f >= %.2f >= %.2f >= %.2f (non-increasing)",
                  means[0], means[1], means[2], means[3]);
    report(9, ok, buf);
}

// ---------------------------------------------------------------------------
// 10. Metrics reproducibility: refolding the stored trace reproduces
// metrics.csv byte for byte.
void criterion_metrics_reproducibility() {
    const fs::path dir = fs::temp_directory_path() / "stigsim_acceptance_fold";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg_path = dir / "cfg.json";
    std::ofstream(cfg_path) << template_config("taskboard-benign").dump();

    const auto artifacts = cmd_run(cfg_path, dir / "out", true);
    std::ifstream metrics_in(artifacts.metrics_csv, std::ios::binary);
    std::string produced((std::istreambuf_iterator<char>(metrics_in)),
                         std::istreambuf_iterator<char>());

    std::vector<MetricsReport> refolded;
    for (const char* style : {"STIG", "MSG", "ORCH"}) {
        std::ifstream trace_in(dir / "out" / ("trace." + std::string(style) + ".jsonl"));
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(trace_in, line))
            if (!line.empty()) lines.push_back(line);
        refolded.push_back(fold_metrics(lines));
    }
    const std::string rebuilt = metrics_csv(refolded);
    const bool ok = rebuilt == produced;
    report(10, ok, std::string("metrics reproducibility: fold(trace.jsonl) vs metrics.csv ") +
                       (ok ? "byte-identical" : "DIFFER"));
}

}  // namespace

int main(int argc, char** argv) {
    std::uint64_t corpus_size = 10000;
    std::uint64_t liquidation_paths = 1000;
    if (argc > 1) corpus_size = std::strtoull(argv[1], nullptr, 10);  // dev shortcut
    if (argc > 2) liquidation_paths = std::strtoull(argv[2], nullptr, 10);

    criterion_determinism();

    const auto corpus = run_corpus(corpus_size);
    {
        char buf[220];
        std::snprintf(buf, sizeof(buf),
                      "single occupancy: %llu runs, %llu claims; occupancy violations=%llu, "
                      "status-machine violations=%llu (must be 0)",
                      (unsigned long long)corpus.runs, (unsigned long long)corpus.claims_seen,
                      (unsigned long long)corpus.occupancy_violations,
                      (unsigned long long)corpus.status_violations);
        report(2, corpus.occupancy_violations == 0 && corpus.status_violations == 0 &&
                      corpus.runs >= corpus_size && corpus.claims_seen > 0,
               buf);
        std::snprintf(buf, sizeof(buf),
                      "conservation: %llu runs, per-height violations=%llu (must be 0)",
                      (unsigned long long)corpus.runs,
                      (unsigned long long)corpus.conservation_violations);
        report(3, corpus.conservation_violations == 0, buf);
    }

    criterion_contention();
    criterion_griefing();
    criterion_commit_reveal();
    criterion_liquidation(liquidation_paths);
    criterion_reorg_safety();
    criterion_partition_sweep();
    criterion_metrics_reproducibility();

    std::printf("ACCEPTANCE: %d/10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
