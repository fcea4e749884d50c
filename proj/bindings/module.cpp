#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stigsim/artifacts.hpp"
#include "stigsim/canonical.hpp"
#include "stigsim/engine.hpp"

namespace py = pybind11;
using namespace stigsim;

namespace {

// The binding surface speaks JSON strings; the Python package turns them into
// dicts. Keeps the ABI trivial and the canonical forms authoritative.

std::string run_scenario_json(const std::string& config_json, bool with_trace) {
    ScenarioConfig cfg = ScenarioConfig::from_json(json::parse(config_json));
    const bool overridden = apply_seed_override(cfg);
    const RunResult result = run_scenario(cfg);

    json out = run_summary(cfg, result, overridden);
    std::vector<MetricsReport> reports;
    for (const auto& style_run : result.styles) reports.push_back(style_run.metrics);
    out["metricsCsv"] = metrics_csv(reports);
    out["digestFile"] = digest_file_contents(result);
    if (with_trace) {
        json traces = json::object();
        for (const auto& style_run : result.styles) {
            json lines = json::array();
            for (const auto& line : style_run.trace_lines) lines.push_back(line);
            traces[to_string(style_run.style)] = std::move(lines);
        }
        out["traces"] = std::move(traces);
    }
    return canonical_dump(out);
}

std::string fold_metrics_json(const std::vector<std::string>& trace_lines) {
    return canonical_dump(fold_metrics(trace_lines).to_json());
}

std::string gen_config_json(const std::string& name) { return template_config(name).dump(2); }

std::vector<std::uint64_t> rng_stream_values(std::uint64_t seed, const std::string& name,
                                             std::size_t count) {
    RngStream stream(seed, name);
    std::vector<std::uint64_t> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(stream.next());
    return out;
}

std::string commit_hash_py(std::uint64_t task_id, std::uint64_t round, const std::string& action,
                           const std::string& args_json, const py::bytes& salt) {
    const std::string salt_str = salt;
    std::vector<std::uint8_t> salt_bytes(salt_str.begin(), salt_str.end());
    return commit_hash_hex(task_id, round, action, json::parse(args_json), salt_bytes);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "deterministic ledger-state coordination simulator";

    m.def("run_scenario", &run_scenario_json, py::arg("config_json"), py::arg("with_trace") = false,
          "Run a scenario config (JSON string); returns a JSON summary string.");
    m.def("fold_metrics", &fold_metrics_json, py::arg("trace_lines"),
          "Fold a trace (list of canonical JSON lines) into a metrics report JSON string.");
    m.def("gen_config", &gen_config_json, py::arg("template_name"),
          "Return a scenario template as a JSON string.");
    m.def("template_names", &template_names);
    m.def("canonical_json", [](const std::string& s) { return canonical_dump(json::parse(s)); },
          py::arg("json_text"), "Canonical form: sorted keys, no whitespace, integers only.");
    m.def("sha256_hex", [](const py::bytes& data) {
        const std::string s = data;
        return Sha256::hex(s);
    });
    m.def("rng_stream", &rng_stream_values, py::arg("seed"), py::arg("name"), py::arg("count"),
          "First `count` outputs of the named deterministic stream.");
    m.def("commit_hash", &commit_hash_py, py::arg("task_id"), py::arg("round"), py::arg("action"),
          py::arg("args_json"), py::arg("salt"),
          "Bit-exact commit-reveal hash over the documented preimage layout.");
    m.def("verify", [](const std::string& config_path, const std::string& digest_path) {
        const auto outcome = cmd_verify(config_path, digest_path);
        return py::make_tuple(outcome.ok, outcome.message);
    });

    m.attr("__version__") = "0.1.0";
}
