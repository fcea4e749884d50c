#include "stigsim/artifacts.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stigsim/canonical.hpp"

namespace stigsim {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& contents) {
    // atomic-enough for single-writer runs: write sidecar, then rename
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

ScenarioConfig load_config(const fs::path& config_path) {
    json parsed;
    try {
        parsed = json::parse(read_file(config_path));
    } catch (const json::exception& e) {
        throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
    }
    return ScenarioConfig::from_json(parsed);
}

bool apply_seed_override(ScenarioConfig& cfg) {
    const char* override_value = std::getenv("STIGSIM_SEED_OVERRIDE");
    if (override_value == nullptr || *override_value == '\0') return false;
    cfg.seed = std::strtoull(override_value, nullptr, 10);
    return true;
}

json run_summary(const ScenarioConfig& cfg, const RunResult& result, bool seed_overridden) {
    json runs = json::object();
    for (const auto& style_run : result.styles) {
        runs[to_string(style_run.style)] = json{{"metrics", style_run.metrics.to_json()},
                                                {"traceDigest", style_run.trace_digest},
                                                {"finalStateDigest", style_run.final_state_digest},
                                                {"blocks", style_run.metrics.blocks},
                                                {"genesisTotal", style_run.genesis_total}};
    }
    return json{{"configDigest", result.config_digest},
                {"seed", cfg.seed},
                {"seedOverridden", seed_overridden},
                {"runs", runs}};
}

std::string digest_file_contents(const RunResult& result) {
    std::ostringstream out;
    for (const auto& style_run : result.styles)
        out << to_string(style_run.style) << " trace " << style_run.trace_digest << '\n';
    for (const auto& style_run : result.styles)
        for (const auto& [height, digest] : style_run.block_digests)
            out << to_string(style_run.style) << " block " << height << ' ' << digest << '\n';
    return out.str();
}

std::string compare_csv(const RunResult& result) {
    // rank: fewest duplicate claim attempts first, wasted gas, then style name
    std::vector<const StyleRunResult*> order;
    for (const auto& style_run : result.styles) order.push_back(&style_run);
    std::stable_sort(order.begin(), order.end(), [](const StyleRunResult* a, const StyleRunResult* b) {
        if (a->metrics.duplicate_claim_attempts != b->metrics.duplicate_claim_attempts)
            return a->metrics.duplicate_claim_attempts < b->metrics.duplicate_claim_attempts;
        if (a->metrics.wasted_gas != b->metrics.wasted_gas)
            return a->metrics.wasted_gas < b->metrics.wasted_gas;
        return a->metrics.style < b->metrics.style;
    });
    std::map<std::string, std::size_t> rank;
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]->metrics.style] = i + 1;

    std::ostringstream out;
    out << "style,duplicateClaimAttempts,wastedGas,completionRateMicro,"
           "medianCompletionLatencyBlocks,gasPerCompletedTask,frontrunnerWinRateMicro,rank\n";
    for (const auto& style_run : result.styles) {
        const auto& m = style_run.metrics;
        out << m.style << ',' << m.duplicate_claim_attempts << ',' << m.wasted_gas << ','
            << m.completion_rate_micro << ',' << m.median_completion_latency << ','
            << m.gas_per_completed_task << ',' << m.frontrunner_win_rate_micro << ','
            << rank.at(m.style) << '\n';
    }
    return out.str();
}

RunArtifacts cmd_run(const fs::path& config_path, const fs::path& out_dir, bool with_trace) {
    ScenarioConfig cfg = load_config(config_path);
    const bool overridden = apply_seed_override(cfg);
    fs::create_directories(out_dir);

    RunArtifacts artifacts;
    try {
        const RunResult result = run_scenario(cfg);

        std::vector<MetricsReport> reports;
        for (const auto& style_run : result.styles) reports.push_back(style_run.metrics);

        artifacts.metrics_csv = out_dir / "metrics.csv";
        write_file(artifacts.metrics_csv, metrics_csv(reports));

        artifacts.summary_json = out_dir / "summary.json";
        write_file(artifacts.summary_json, canonical_dump(run_summary(cfg, result, overridden)) + "\n");

        artifacts.digest_txt = out_dir / "digest.txt";
        write_file(artifacts.digest_txt, digest_file_contents(result));

        if (with_trace) {
            for (const auto& style_run : result.styles) {
                const fs::path trace_path =
                    out_dir / ("trace." + std::string(to_string(style_run.style)) + ".jsonl");
                std::string contents;
                for (const auto& line : style_run.trace_lines) contents += line + "\n";
                write_file(trace_path, contents);
                artifacts.trace_files.push_back(trace_path);
            }
        }
    } catch (...) {
        // no partial outputs on failure
        for (const auto& path : {artifacts.metrics_csv, artifacts.summary_json, artifacts.digest_txt})
            if (!path.empty()) fs::remove(path);
        for (const auto& path : artifacts.trace_files) fs::remove(path);
        throw;
    }
    return artifacts;
}

fs::path cmd_compare(const fs::path& config_path, const fs::path& out_dir) {
    ScenarioConfig cfg = load_config(config_path);
    if (cfg.styles.size() < 2)
        throw ConfigError("styles", "comparison needs at least 2 styles");
    apply_seed_override(cfg);
    fs::create_directories(out_dir);
    const RunResult result = run_scenario(cfg);
    const fs::path compare_path = out_dir / "compare.csv";
    write_file(compare_path, compare_csv(result));
    return compare_path;
}

VerifyOutcome cmd_verify(const fs::path& config_path, const fs::path& digest_path) {
    ScenarioConfig cfg = load_config(config_path);
    apply_seed_override(cfg);

    // parse the stored digest file
    std::map<std::string, std::string> stored_trace;
    std::map<std::string, std::map<Height, std::string>> stored_blocks;
    {
        std::istringstream in(read_file(digest_path));
        std::string style, kind;
        while (in >> style >> kind) {
            if (kind == "trace") {
                std::string digest;
                in >> digest;
                stored_trace[style] = digest;
            } else if (kind == "block") {
                Height height = 0;
                std::string digest;
                in >> height >> digest;
                stored_blocks[style][height] = digest;
            } else {
                return {false, "", std::nullopt, "malformed digest file"};
            }
        }
    }

    const RunResult result = run_scenario(cfg);
    for (const auto& style_run : result.styles) {
        const std::string style = to_string(style_run.style);
        auto stored = stored_trace.find(style);
        if (stored == stored_trace.end())
            return {false, style, std::nullopt, "style " + style + " missing from digest file"};
        if (stored->second == style_run.trace_digest) continue;

        // locate the first divergent block height
        const auto& expected = stored_blocks[style];
        for (const auto& [height, digest] : style_run.block_digests) {
            auto it = expected.find(height);
            if (it == expected.end() || it->second != digest)
                return {false, style, height,
                        "trace digest mismatch for " + style + "; first divergent block height " +
                            std::to_string(height)};
        }
        return {false, style, std::nullopt,
                "trace digest mismatch for " + style + " (block digests all match; header differs)"};
    }
    return {true, "", std::nullopt, "verified"};
}

fs::path cmd_gen_config(const std::string& template_name, const fs::path& out_file) {
    const json config = template_config(template_name);
    if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
    write_file(out_file, config.dump(2) + "\n");
    return out_file;
}

}  // namespace stigsim
