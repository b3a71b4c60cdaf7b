// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

// volte_sim: simulate scenarios, analyze RTP traces, compare reports.

#include <iostream>

#include <CLI11.hpp>

#include "volte/cli_runner.hpp"

namespace {

using namespace volte;

void add_scenario_flags(CLI::App* cmd, cli::ScenarioSource& src, std::optional<std::uint64_t>* seed) {
    cmd->add_option("--config", src.config_path, "Scenario INI, or a manifest.json to re-run");
    cmd->add_option("--preset", src.preset, "Bundled scenario name");
    if (seed) {
        cmd->add_option("--seed", *seed, "Override the scenario seed");
    }
    cmd->add_option("--set", src.overrides, "Override one value, section.key=value (repeatable)");
}

void print_outputs(const std::filesystem::path& out, const cli::Artifacts& a) {
    std::cout << "wrote " << a.files.size() << " files to " << out.string() << "\n";
    std::cout << "manifest digest " << a.manifest.digest() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VoLTE end-to-end simulator and RTP KPI analyzer"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(io::kToolVersion));

    std::string out_dir;
    std::string format = "json";
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "Output directory (default $VOLTE_SIM_OUT or ./volte_out)");
        cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    };

    cli::ScenarioSource sim_src;
    std::optional<std::uint64_t> sim_seed;
    auto* sim_cmd = app.add_subcommand("simulate", "Run one scenario");
    add_scenario_flags(sim_cmd, sim_src, &sim_seed);
    add_common(sim_cmd);

    cli::AnalyzeRequest an;
    std::optional<std::uint32_t> an_stream;
    auto* an_cmd = app.add_subcommand("analyze", "KPI report for an RTP trace CSV");
    an_cmd->add_option("trace", an.trace_path, "RTP trace CSV")->required();
    an_cmd->add_option("--radio", an.radio_path, "Radio trace CSV for RF-binned tables");
    an_cmd->add_option("--stream", an_stream, "Stream id to analyze (default: first in file)");
    an_cmd->add_option("--window-ms", an.options.window_ms, "Window length for windowed KPIs");
    an_cmd->add_option("--codec-rate", an.options.codec_rate_kbps, "Codec rate for the MOS estimate");
    add_common(an_cmd);

    std::string cmp_a;
    std::string cmp_b;
    auto* cmp_cmd = app.add_subcommand("compare", "Delta table between two report.json files");
    cmp_cmd->add_option("report_a", cmp_a)->required();
    cmp_cmd->add_option("report_b", cmp_b)->required();
    add_common(cmp_cmd);

    cli::ScenarioSource sw_src;
    std::string seeds = "1-20";
    unsigned threads = 0;
    auto* sw_cmd = app.add_subcommand("sweep", "Run one scenario over many seeds in parallel");
    add_scenario_flags(sw_cmd, sw_src, nullptr);
    sw_cmd->add_option("--seeds", seeds, "Seed list, e.g. 1-20 or 1,4,9");
    sw_cmd->add_option("--threads", threads, "Worker threads (default: all cores)");
    add_common(sw_cmd);

    app.add_subcommand("presets", "List bundled presets")->callback([] {
        for (const auto& p : cli::list_presets()) {
            std::cout << p << "\n";
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? cli::kOk : cli::kConfigError;
    }

    try {
        const auto fmt = cli::parse_format(format);
        const std::filesystem::path out = out_dir.empty() ? cli::default_out_dir() : std::filesystem::path(out_dir);
        cli::Artifacts result;
        if (sim_cmd->parsed()) {
            sim_src.seed = sim_seed;
            result = cli::simulate(cli::load_scenario(sim_src), fmt);
        } else if (an_cmd->parsed()) {
            an.stream_id = an_stream;
            result = cli::analyze(an, fmt);
        } else if (cmp_cmd->parsed()) {
            result = cli::compare(cmp_a, cmp_b, fmt);
            const auto rows = io::compare_reports(io::load_report(cmp_a), io::load_report(cmp_b));
            std::cout << io::compare_csv(rows);
        } else if (sw_cmd->parsed()) {
            result = cli::sweep(sw_src, cli::parse_seed_list(seeds), fmt, threads);
        } else {
            return cli::kOk;
        }
        cli::commit(out, result);
        print_outputs(out, result);
        return cli::kOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return cli::kConfigError;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return cli::kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kFailure;
    }
}
