#include <cstdio>
#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "stigsim/artifacts.hpp"

namespace {

int run_command(const std::string& config, const std::string& out_dir, bool trace) {
    const auto artifacts = stigsim::cmd_run(config, out_dir, trace);
    std::cout << "wrote " << artifacts.metrics_csv.string() << '\n'
              << "wrote " << artifacts.summary_json.string() << '\n'
              << "wrote " << artifacts.digest_txt.string() << '\n';
    for (const auto& t : artifacts.trace_files) std::cout << "wrote " << t.string() << '\n';
    return 0;
}

int compare_command(const std::string& config, const std::string& out_dir) {
    const auto path = stigsim::cmd_compare(config, out_dir);
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int verify_command(const std::string& config, const std::string& digest) {
    const auto outcome = stigsim::cmd_verify(config, digest);
    std::cout << outcome.message << '\n';
    return outcome.ok ? 0 : 1;
}

int gen_config_command(const std::string& tmpl, const std::string& out_file) {
    const auto path = stigsim::cmd_gen_config(tmpl, out_file);
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stigsim - deterministic simulator of ledger-state coordination"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string digest_path;
    std::string template_name;
    std::string out_file;
    bool with_trace = false;

    auto* run = app.add_subcommand("run", "run a scenario and write metrics/summary/digest");
    run->add_option("config", config_path, "scenario config JSON")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_flag("--trace", with_trace, "also write trace.<style>.jsonl");

    auto* compare = app.add_subcommand("compare", "run all configured styles and write compare.csv");
    compare->add_option("config", config_path, "scenario config JSON")->required();
    compare->add_option("--out", out_dir, "output directory")->required();

    auto* verify = app.add_subcommand("verify", "re-run a config and check a stored digest file");
    verify->add_option("config", config_path, "scenario config JSON")->required();
    verify->add_option("digest", digest_path, "digest.txt from a previous run")->required();

    auto* gen = app.add_subcommand("gen-config", "write a scenario template");
    gen->add_option("template", template_name, "template name")->required();
    gen->add_option("--out", out_file, "output file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(config_path, out_dir, with_trace);
        if (compare->parsed()) return compare_command(config_path, out_dir);
        if (verify->parsed()) return verify_command(config_path, digest_path);
        if (gen->parsed()) return gen_config_command(template_name, out_file);
    } catch (const stigsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
