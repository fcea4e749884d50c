#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stigsim/engine.hpp"

namespace stigsim {

// Operator-facing operations behind the CLI subcommands. Everything here is a
// thin layer over run_scenario plus deterministic file formats:
//   metrics.csv   one row per style, fixed column order
//   summary.json  canonical JSON run summary
//   digest.txt    "<style> trace <hex>" then "<style> block <height> <hex>"
//   trace.<style>.jsonl   canonical trace lines (optional, --trace)
//   compare.csv   per-style comparison with a rank column

struct RunArtifacts {
    std::filesystem::path metrics_csv;
    std::filesystem::path summary_json;
    std::filesystem::path digest_txt;
    std::vector<std::filesystem::path> trace_files;
};

// Applies the STIGSIM_SEED_OVERRIDE environment variable, if set. Returns
// whether an override happened.
bool apply_seed_override(ScenarioConfig& cfg);

json run_summary(const ScenarioConfig& cfg, const RunResult& result, bool seed_overridden);
std::string digest_file_contents(const RunResult& result);
std::string compare_csv(const RunResult& result);

RunArtifacts cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                     bool with_trace);
std::filesystem::path cmd_compare(const std::filesystem::path& config_path,
                                  const std::filesystem::path& out_dir);

struct VerifyOutcome {
    bool ok = false;
    std::string style;                        // first diverging style, when !ok
    std::optional<Height> divergent_height;   // first diverging block, when known
    std::string message;
};

VerifyOutcome cmd_verify(const std::filesystem::path& config_path,
                         const std::filesystem::path& digest_path);

std::filesystem::path cmd_gen_config(const std::string& template_name,
                                     const std::filesystem::path& out_file);

ScenarioConfig load_config(const std::filesystem::path& config_path);

}  // namespace stigsim
