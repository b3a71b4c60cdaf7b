// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_CLI_RUNNER_HPP
#define VOLTE_CLI_RUNNER_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "volte/common.hpp"
#include "volte/io/config.hpp"
#include "volte/io/event_log_io.hpp"
#include "volte/io/manifest.hpp"
#include "volte/io/report_io.hpp"
#include "volte/io/trace_csv.hpp"
#include "volte/kpi_report.hpp"
#include "volte/sim_pipeline.hpp"

namespace volte::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kInputError = 3 };

enum class Format { Json, Csv };

inline Format parse_format(const std::string& s) {
    if (s == "json") {
        return Format::Json;
    }
    if (s == "csv") {
        return Format::Csv;
    }
    throw ConfigError("--format: expected json or csv, got '" + s + "'");
}

inline constexpr const char* kOutEnv = "VOLTE_SIM_OUT";
inline constexpr const char* kPresetEnv = "VOLTE_SIM_PRESETS";
inline constexpr const char* kDefaultOutDir = "volte_out";

inline fs::path default_out_dir() {
    const char* env = std::getenv(kOutEnv);
    return env && *env ? fs::path(env) : fs::path(kDefaultOutDir);
}

inline fs::path preset_dir() {
    const char* env = std::getenv(kPresetEnv);
    if (env && *env) {
        return env;
    }
#ifdef VOLTE_PRESET_DIR
    return VOLTE_PRESET_DIR;
#else
    return "presets";
#endif
}

inline std::vector<std::string> list_presets() {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(preset_dir(), ec)) {
        if (e.path().extension() == ".ini") {
            out.push_back(e.path().stem().string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Files of one command, keyed by path relative to the output directory.
/// Nothing touches the disk until commit().
struct Artifacts {
    std::map<std::string, std::string> files;
    io::RunManifest manifest;

    void seal() { files["manifest.json"] = manifest.to_json(); }
};

/// Writes every file into a staging directory, then moves them into place.
inline void commit(const fs::path& out_dir, const Artifacts& a) {
    fs::create_directories(out_dir);
    const fs::path staging = out_dir / ".staging";
    fs::remove_all(staging);
    try {
        for (const auto& [rel, content] : a.files) {
            const fs::path p = staging / rel;
            fs::create_directories(p.parent_path());
            std::ofstream os(p, std::ios::binary);
            os.write(content.data(), static_cast<std::streamsize>(content.size()));
            if (!os) {
                throw std::runtime_error("cannot write " + p.string());
            }
        }
        for (const auto& [rel, content] : a.files) {
            const fs::path dst = out_dir / rel;
            fs::create_directories(dst.parent_path());
            fs::rename(staging / rel, dst);
        }
    } catch (...) {
        fs::remove_all(staging);
        throw;
    }
    fs::remove_all(staging);
}

inline std::string read_file_bytes(const std::string& path, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(what + " not found: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- scenario loading ----

struct ScenarioSource {
    std::optional<std::string> config_path;
    std::optional<std::string> preset;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
};

struct LoadedScenario {
    sim::ScenarioConfig cfg;
    /// Canonical text of cfg; this is what the manifest records and hashes.
    std::string canonical;
    /// Digests a re-run must match, when loading from a manifest.
    std::map<std::string, std::string> expected_inputs;
};

inline bool looks_like_manifest(const std::string& text) {
    const auto p = text.find_first_not_of(" \t\r\n");
    return p != std::string::npos && text[p] == '{';
}

inline LoadedScenario load_scenario(const ScenarioSource& src) {
    if (src.config_path && src.preset) {
        throw ConfigError("use either --config or --preset, not both");
    }
    std::string path;
    if (src.preset) {
        path = (preset_dir() / (*src.preset + ".ini")).string();
        if (!fs::exists(path)) {
            std::string names;
            for (const auto& n : list_presets()) {
                names += " " + n;
            }
            throw ConfigError("unknown preset '" + *src.preset + "'; available:" + names);
        }
    } else if (src.config_path) {
        path = *src.config_path;
    } else {
        throw ConfigError("need --config or --preset");
    }
    const std::string text = io::read_text_file(path, "config");
    LoadedScenario out;
    io::ConfigDraft draft;
    if (looks_like_manifest(text)) {
        const auto m = io::RunManifest::from_json(text, path);
        draft = io::parse_config_draft(m.config_text, path + " (embedded config)");
        out.expected_inputs = m.inputs;
    } else {
        draft = io::parse_config_draft(text, path, fs::absolute(path).parent_path());
    }
    for (const auto& o : src.overrides) {
        io::apply_override(draft, o);
    }
    if (src.seed) {
        draft.cfg.seed = *src.seed;
    }
    out.cfg = draft.finish();
    try {
        out.cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    out.canonical = io::to_ini(out.cfg);
    return out;
}

inline std::map<std::string, std::string> input_digests(const sim::ScenarioConfig& cfg) {
    std::map<std::string, std::string> out;
    if (!cfg.radio_source.trace_path.empty()) {
        out["radio_trace"] = io::sha256_hex(read_file_bytes(cfg.radio_source.trace_path, "radio trace"));
    }
    if (!cfg.tbs_table_path.empty()) {
        out["tbs_table"] = io::sha256_hex(read_file_bytes(cfg.tbs_table_path, "TBS table"));
    }
    return out;
}

// ---- commands ----

inline kpi::ReportOptions report_options_for(const sim::ScenarioConfig& cfg) {
    kpi::ReportOptions opt;
    opt.codec_rate_kbps = cfg.codec.codec_rate_kbps;
    return opt;
}

inline void add_report_files(Artifacts& a, const kpi::KpiReport& r, const kpi::ReportOptions& opt, Format fmt,
                             const std::string& prefix = "") {
    a.files[prefix + "report.json"] = io::report_json(r, opt).dump(2) + "\n";
    if (fmt == Format::Csv) {
        for (auto& [name, content] : io::report_tables(r)) {
            a.files[prefix + "tables/" + name] = std::move(content);
        }
    }
}

inline Artifacts simulate(const LoadedScenario& ls, Format fmt) {
    const auto& cfg = ls.cfg;
    Artifacts a;
    a.manifest.command = "simulate";
    a.manifest.scenario = cfg.name;
    a.manifest.seed = cfg.seed;
    a.manifest.config_text = ls.canonical;
    a.manifest.inputs = input_digests(cfg);
    for (const auto& [label, digest] : ls.expected_inputs) {
        const auto it = a.manifest.inputs.find(label);
        if (it == a.manifest.inputs.end() || it->second != digest) {
            throw InputError("input '" + label + "' differs from the manifest digest");
        }
    }

    const auto res = sim::run_scenario(cfg);
    const auto opt = report_options_for(cfg);
    const auto report = kpi::build_report(res.downlink, opt, &res.radio, &res.log, &res.playout);

    std::ostringstream trace;
    std::vector<codec::RtpRecord> both = res.downlink;
    both.insert(both.end(), res.uplink.begin(), res.uplink.end());
    io::write_trace_csv(trace, both);
    a.files["trace.csv"] = trace.str();
    if (fmt == Format::Json) {
        a.files["events.json"] = io::event_log_json(res.log).dump() + "\n";
    } else {
        std::ostringstream ev;
        io::write_event_log_csv(ev, res.log);
        a.files["events.csv"] = ev.str();
    }
    add_report_files(a, report, opt, fmt);
    if (!res.uplink.empty()) {
        const auto ul = kpi::build_report(res.uplink, opt, &res.radio);
        add_report_files(a, ul, opt, fmt, "uplink/");
    }
    for (const auto& [rel, content] : a.files) {
        a.manifest.outputs[rel] = io::sha256_hex(content);
    }
    a.seal();
    return a;
}

struct AnalyzeRequest {
    std::string trace_path;
    std::optional<std::string> radio_path;
    std::optional<std::uint32_t> stream_id;
    kpi::ReportOptions options;
};

inline Artifacts analyze(const AnalyzeRequest& req, Format fmt) {
    const std::string trace_bytes = read_file_bytes(req.trace_path, "trace");
    std::istringstream is(trace_bytes);
    auto rows = io::read_trace_csv(is);
    if (rows.empty()) {
        throw InputError("trace has no rows: " + req.trace_path);
    }
    const std::uint32_t sid = req.stream_id.value_or(rows.front().stream_id);
    std::erase_if(rows, [&](const codec::RtpRecord& r) { return r.stream_id != sid; });
    if (rows.empty()) {
        throw InputError("trace has no rows for stream " + std::to_string(sid));
    }

    Artifacts a;
    a.manifest.command = "analyze";
    a.manifest.scenario = fs::path(req.trace_path).stem().string();
    a.manifest.config_text = "stream_id = " + std::to_string(sid) + "\nwindow_ms = " +
                             io::num(req.options.window_ms) + "\ncodec_rate_kbps = " +
                             io::num(req.options.codec_rate_kbps) + "\n";
    a.manifest.inputs["trace"] = io::sha256_hex(trace_bytes);

    std::optional<radio::RadioTrace> radio_trace;
    if (req.radio_path) {
        const std::string radio_bytes = read_file_bytes(*req.radio_path, "radio trace");
        std::istringstream rs(radio_bytes);
        radio_trace = radio::read_radio_csv(rs);
        a.manifest.inputs["radio_trace"] = io::sha256_hex(radio_bytes);
    }
    auto report = kpi::build_report(rows, req.options, radio_trace ? &*radio_trace : nullptr);
    report.scenario = a.manifest.scenario;
    add_report_files(a, report, req.options, fmt);
    for (const auto& [rel, content] : a.files) {
        a.manifest.outputs[rel] = io::sha256_hex(content);
    }
    a.seal();
    return a;
}

inline Artifacts compare(const std::string& path_a, const std::string& path_b, Format fmt) {
    const std::string ta = read_file_bytes(path_a, "report");
    const std::string tb = read_file_bytes(path_b, "report");
    const auto rows = io::compare_reports(io::parse_report(ta, path_a), io::parse_report(tb, path_b));
    Artifacts a;
    a.manifest.command = "compare";
    a.manifest.inputs["report_a"] = io::sha256_hex(ta);
    a.manifest.inputs["report_b"] = io::sha256_hex(tb);
    if (fmt == Format::Json) {
        a.files["compare.json"] = io::compare_json(rows).dump(2) + "\n";
    } else {
        a.files["compare.csv"] = io::compare_csv(rows);
    }
    for (const auto& [rel, content] : a.files) {
        a.manifest.outputs[rel] = io::sha256_hex(content);
    }
    a.seal();
    return a;
}

/// Seeds run on a thread pool; each member is a full, independent simulate.
inline Artifacts sweep(const ScenarioSource& base, const std::vector<std::uint64_t>& seeds, Format fmt,
                       unsigned threads = 0) {
    if (seeds.empty()) {
        throw ConfigError("sweep needs at least one seed");
    }
    std::vector<LoadedScenario> members;
    for (const auto s : seeds) {
        auto src = base;
        src.seed = s;
        members.push_back(load_scenario(src));
    }
    std::vector<Artifacts> results(members.size());
    std::vector<std::exception_ptr> errors(members.size());
    std::atomic<std::size_t> next{0};
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min<unsigned>(threads, static_cast<unsigned>(members.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < members.size(); i = next++) {
                try {
                    results[i] = simulate(members[i], fmt);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    Artifacts a;
    a.manifest.command = "sweep";
    a.manifest.scenario = members.front().cfg.name;
    a.manifest.seed = seeds.front();
    a.manifest.config_text = members.front().canonical;
    std::ostringstream summary;
    summary << "seed,rtp_error_rate,jitter_avg_ms,mos_estimate,mux_pct,avg_tbs_bits,avg_padding_bits,"
               "voice_inter_tti_ms,handovers,call_drops,manifest_digest\n";
    for (std::size_t i = 0; i < members.size(); ++i) {
        const std::string dir = "seed-" + std::to_string(seeds[i]) + "/";
        for (auto& [rel, content] : results[i].files) {
            a.files[dir + rel] = std::move(content);
        }
        const auto j = nlohmann::json::parse(a.files[dir + "report.json"]);
        const auto& sc = j.at("scheduler");
        summary << seeds[i] << ',' << io::num(j["rtp_error_rate"].get<double>()) << ','
                << io::num(j["jitter_stats"]["avg"].get<double>()) << ','
                << io::num(j["mos"]["estimate"].get<double>()) << ',' << io::num(sc["mux_pct"].get<double>())
                << ',' << io::num(sc["avg_tbs_bits"].get<double>()) << ','
                << io::num(sc["avg_padding_bits"].get<double>()) << ','
                << io::num(sc["voice_inter_tti_ms"].get<double>()) << ','
                << j["handover"]["count"].get<std::size_t>() << ',' << j.value("call_drops", 0) << ','
                << results[i].manifest.digest() << '\n';
    }
    a.files["sweep.csv"] = summary.str();
    for (const auto& [rel, content] : a.files) {
        a.manifest.outputs[rel] = io::sha256_hex(content);
    }
    a.seal();
    return a;
}

/// "1-20" or "3,5,9" or a mix.
inline std::vector<std::uint64_t> parse_seed_list(const std::string& spec) {
    std::vector<std::uint64_t> out;
    try {
        for (const auto& part : io::detail::split(spec, ',')) {
            const auto dash = part.find('-');
            if (dash == std::string::npos) {
                out.push_back(io::detail::parse_num<std::uint64_t>(part));
                continue;
            }
            const auto lo = io::detail::parse_num<std::uint64_t>(part.substr(0, dash));
            const auto hi = io::detail::parse_num<std::uint64_t>(part.substr(dash + 1));
            if (hi < lo || hi - lo > 100000) {
                throw std::invalid_argument("bad seed range '" + part + "'");
            }
            for (auto s = lo; s <= hi; ++s) {
                out.push_back(s);
            }
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--seeds: ") + e.what());
    }
    return out;
}

}  // namespace volte::cli

#endif  // VOLTE_CLI_RUNNER_HPP
