// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_IO_CONFIG_HPP
#define VOLTE_IO_CONFIG_HPP

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "volte/common.hpp"
#include "volte/io/format.hpp"
#include "volte/sim_pipeline.hpp"

namespace volte::io {

/// ScenarioConfig plus the optional blocks that the INI spells as
/// "enabled" switches, so a disabled block can still carry its values.
struct ConfigDraft {
    sim::ScenarioConfig cfg;
    bool bundling_enabled = false;
    bundling::BundlingConfig bundling;
    bool sps_enabled = false;
    sched::SpsConfig sps;
    bool drx_enabled = false;
    sched::DrxConfig drx;

    sim::ScenarioConfig finish() const {
        sim::ScenarioConfig out = cfg;
        out.bundling = bundling_enabled ? std::optional(bundling) : std::nullopt;
        out.policy.sps = sps_enabled ? std::optional(sps) : std::nullopt;
        out.policy.drx = drx_enabled ? std::optional(drx) : std::nullopt;
        return out;
    }

    static ConfigDraft from(const sim::ScenarioConfig& c) {
        ConfigDraft d;
        d.cfg = c;
        if (c.bundling) {
            d.bundling_enabled = true;
            d.bundling = *c.bundling;
        }
        if (c.policy.sps) {
            d.sps_enabled = true;
            d.sps = *c.policy.sps;
        }
        if (c.policy.drx) {
            d.drx_enabled = true;
            d.drx = *c.policy.drx;
        }
        return d;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_num(const std::string& s) {
    T v{};
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end || s.empty()) {
        throw std::invalid_argument("expected a number, got '" + s + "'");
    }
    return v;
}

inline bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
        return true;
    }
    if (s == "false" || s == "0" || s == "no" || s == "off") {
        return false;
    }
    throw std::invalid_argument("expected true/false, got '" + s + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        const auto t = trim(cur);
        if (!t.empty()) {
            out.push_back(t);
        }
    }
    return out;
}

inline std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& p : split(s, ',')) {
        out.push_back(parse_num<double>(p));
    }
    return out;
}

inline std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? "," : "") + num(v[i]);
    }
    return out;
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(ConfigDraft&, const std::string&)> set;
    std::function<std::string(const ConfigDraft&)> get;
};

#define VOLTE_NUM(sec, name, T, expr)                                                              \
    Field {                                                                                        \
        sec, name, [](ConfigDraft& d, const std::string& v) { expr = parse_num<T>(v); },            \
            [](const ConfigDraft& d) -> std::string {                                              \
                if constexpr (std::is_floating_point_v<T>) {                                       \
                    return num(static_cast<double>(expr));                                         \
                } else {                                                                           \
                    return std::to_string(expr);                                                   \
                }                                                                                  \
            }                                                                                      \
    }
#define VOLTE_BOOL(sec, name, expr)                                                                \
    Field {                                                                                        \
        sec, name, [](ConfigDraft& d, const std::string& v) { expr = parse_bool(v); },              \
            [](const ConfigDraft& d) -> std::string { return expr ? "true" : "false"; }            \
    }
#define VOLTE_STR(sec, name, expr)                                                                 \
    Field {                                                                                        \
        sec, name, [](ConfigDraft& d, const std::string& v) { expr = v; },                          \
            [](const ConfigDraft& d) -> std::string { return expr; }                               \
    }
#define VOLTE_OPT(sec, name, expr)                                                                 \
    Field {                                                                                        \
        sec, name,                                                                                 \
            [](ConfigDraft& d, const std::string& v) {                                             \
                if (v.empty() || v == "none") {                                                    \
                    expr.reset();                                                                  \
                } else {                                                                           \
                    expr = parse_num<double>(v);                                                   \
                }                                                                                  \
            },                                                                                     \
            [](const ConfigDraft& d) -> std::string { return expr ? num(*expr) : "none"; }         \
    }

// clang-format off
inline const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        VOLTE_STR("scenario", "name", d.cfg.name),
        VOLTE_NUM("scenario", "duration_ms", double, d.cfg.duration_ms),
        VOLTE_NUM("scenario", "seed", std::uint64_t, d.cfg.seed),

        VOLTE_NUM("codec", "rate_kbps", double, d.cfg.codec.codec_rate_kbps),
        VOLTE_NUM("codec", "frame_interval_ms", double, d.cfg.codec.frame_interval_ms),
        VOLTE_NUM("codec", "amr_header_bits", int, d.cfg.codec.amr_header_bits),
        VOLTE_NUM("codec", "rtp_header_bits", int, d.cfg.codec.rtp_header_bits),
        VOLTE_NUM("codec", "proto_header_bits", int, d.cfg.codec.proto_header_bits),
        VOLTE_NUM("codec", "amr_payload_bytes", int, d.cfg.codec.amr_payload_bytes),

        Field{"activity", "kind",
              [](ConfigDraft& d, const std::string& v) {
                  if (v == "continuous") {
                      d.cfg.activity.kind = codec::ActivityModel::Kind::Continuous;
                  } else if (v == "on_off") {
                      d.cfg.activity.kind = codec::ActivityModel::Kind::OnOff;
                  } else {
                      throw std::invalid_argument("expected continuous or on_off, got '" + v + "'");
                  }
              },
              [](const ConfigDraft& d) -> std::string {
                  return d.cfg.activity.kind == codec::ActivityModel::Kind::OnOff ? "on_off" : "continuous";
              }},
        VOLTE_NUM("activity", "mean_talkspurt_ms", double, d.cfg.activity.mean_talkspurt_ms),
        VOLTE_NUM("activity", "mean_silence_ms", double, d.cfg.activity.mean_silence_ms),

        VOLTE_BOOL("rohc", "enabled", d.cfg.rohc_enabled),
        Field{"rohc", "mode",
              [](ConfigDraft& d, const std::string& v) {
                  if (v == "U") {
                      d.cfg.rohc.mode = rohc::Mode::U;
                  } else if (v == "O") {
                      d.cfg.rohc.mode = rohc::Mode::O;
                  } else if (v == "R") {
                      d.cfg.rohc.mode = rohc::Mode::R;
                  } else {
                      throw std::invalid_argument("expected U, O or R, got '" + v + "'");
                  }
              },
              [](const ConfigDraft& d) { return std::string(rohc::to_string(d.cfg.rohc.mode)); }},
        VOLTE_NUM("rohc", "full_header_bytes", double, d.cfg.rohc.sizes.full_header_bytes),
        VOLTE_NUM("rohc", "ir_overhead_bytes", double, d.cfg.rohc.sizes.ir_overhead_bytes),
        VOLTE_NUM("rohc", "fo_header_bytes", double, d.cfg.rohc.sizes.fo_header_bytes),
        VOLTE_NUM("rohc", "so_header_bytes", double, d.cfg.rohc.sizes.so_header_bytes),
        VOLTE_NUM("rohc", "optimistic_repeats", int, d.cfg.rohc.optimistic_repeats),
        VOLTE_NUM("rohc", "ir_refresh_period", int, d.cfg.rohc.ir_refresh_period),
        VOLTE_NUM("rohc", "dynamic_change_prob", double, d.cfg.rohc.dynamic_change_prob),
        VOLTE_NUM("rohc", "feedback_delay_ms", double, d.cfg.rohc.feedback_delay_ms),

        VOLTE_BOOL("traffic", "concurrent_data", d.cfg.concurrent_data),

        VOLTE_BOOL("scheduler", "multiplex_voice_data", d.cfg.policy.multiplex_voice_data),
        VOLTE_BOOL("scheduler", "allow_rank2_voice_split", d.cfg.policy.allow_rank2_voice_split),
        VOLTE_NUM("scheduler", "rank2_probability", double, d.cfg.policy.rank2_probability),
        VOLTE_NUM("scheduler", "rank2_min_sinr_db", double, d.cfg.policy.rank2_min_sinr_db),
        VOLTE_NUM("scheduler", "target_bler", double, d.cfg.policy.target_bler),
        VOLTE_NUM("scheduler", "max_voice_prb", int, d.cfg.policy.max_voice_prb),
        VOLTE_NUM("scheduler", "voice_tdm_window_ms", double, d.cfg.policy.voice_tdm_window_ms),
        VOLTE_NUM("scheduler", "available_prb", int, d.cfg.available_prb),
        VOLTE_STR("scheduler", "tbs_table", d.cfg.tbs_table_path),
        VOLTE_BOOL("scheduler", "sps", d.sps_enabled),
        VOLTE_NUM("scheduler", "sps_period_subframes", int, d.sps.period_subframes),
        VOLTE_NUM("scheduler", "sps_release_empty_count", int, d.sps.release_empty_count),
        VOLTE_BOOL("scheduler", "drx", d.drx_enabled),
        VOLTE_NUM("scheduler", "drx_long_cycle_ms", double, d.drx.long_cycle_ms),
        VOLTE_NUM("scheduler", "drx_on_duration_ms", double, d.drx.on_duration_ms),

        Field{"link", "sinr50_db",
              [](ConfigDraft& d, const std::string& v) { d.cfg.link.sinr50_db = parse_list(v); },
              [](const ConfigDraft& d) { return join(d.cfg.link.sinr50_db); }},
        VOLTE_NUM("link", "slope_per_db", double, d.cfg.link.slope_per_db),
        VOLTE_NUM("link", "max_harq_tx", int, d.cfg.link.max_harq_tx),
        VOLTE_NUM("link", "harq_rtt_ms", double, d.cfg.link.harq_rtt_ms),
        VOLTE_NUM("link", "harq_combining_gain_db", double, d.cfg.link.harq_combining_gain_db),

        VOLTE_BOOL("bundling", "enabled", d.bundling_enabled),
        VOLTE_NUM("bundling", "bundle_size", int, d.bundling.bundle_size),
        VOLTE_NUM("bundling", "max_tbs_bits", int, d.bundling.max_tbs_bits),
        VOLTE_NUM("bundling", "max_prb", int, d.bundling.max_prb),
        VOLTE_NUM("bundling", "max_mcs", int, d.bundling.max_mcs),
        VOLTE_NUM("bundling", "trigger_sinr_db", double, d.bundling.trigger_sinr_db),
        VOLTE_NUM("bundling", "release_sinr_db", double, d.bundling.release_sinr_db),
        VOLTE_NUM("bundling", "harq_rtt_ms", double, d.bundling.bundle_harq_rtt_ms),
        VOLTE_NUM("bundling", "coverage_gain_db", double, d.bundling.coverage_gain_db),
        VOLTE_NUM("bundling", "segment_overhead_bits", int, d.bundling.segment_overhead_bits),

        VOLTE_STR("radio", "trace", d.cfg.radio_source.trace_path),
        Field{"radio", "outages",
              [](ConfigDraft& d, const std::string& v) {
                  d.cfg.radio_source.outages.clear();
                  for (const auto& span : split(v, ',')) {
                      const auto parts = split(span, ':');
                      if (parts.size() != 2) {
                          throw std::invalid_argument("outages are start:end pairs, got '" + span + "'");
                      }
                      d.cfg.radio_source.outages.push_back(
                          {parse_num<double>(parts[0]), parse_num<double>(parts[1])});
                  }
              },
              [](const ConfigDraft& d) {
                  std::string out;
                  for (const auto& o : d.cfg.radio_source.outages) {
                      out += (out.empty() ? "" : ",") + num(o.start_ms) + ":" + num(o.end_ms);
                  }
                  return out;
              }},
        VOLTE_NUM("radio", "outage_sinr_db", double, d.cfg.radio_source.outage_sinr_db),
        VOLTE_NUM("radio", "sample_period_ms", double, d.cfg.radio_source.route.sample_period_ms),
        VOLTE_NUM("radio", "speed_kmh", double, d.cfg.radio_source.route.speed_kmh),
        VOLTE_NUM("radio", "site_spacing_m", double, d.cfg.radio_source.route.site_spacing_m),
        VOLTE_NUM("radio", "road_offset_m", double, d.cfg.radio_source.route.road_offset_m),
        VOLTE_NUM("radio", "pathloss_exponent", double, d.cfg.radio_source.route.pathloss_exponent),
        VOLTE_BOOL("radio", "flat", d.cfg.radio_source.route.flat),
        VOLTE_NUM("radio", "rsrp_mean_dbm", double, d.cfg.radio_source.route.rsrp_mean_dbm),
        VOLTE_NUM("radio", "shadow_sigma_db", double, d.cfg.radio_source.route.shadow_sigma_db),
        VOLTE_NUM("radio", "shadow_decorrelation_m", double, d.cfg.radio_source.route.shadow_decorrelation_m),
        VOLTE_NUM("radio", "sinr_mean_db", double, d.cfg.radio_source.route.sinr_mean_db),
        VOLTE_NUM("radio", "sinr_rsrp_coupling", double, d.cfg.radio_source.route.sinr_rsrp_coupling),
        VOLTE_NUM("radio", "sinr_noise_sigma_db", double, d.cfg.radio_source.route.sinr_noise_sigma_db),
        VOLTE_NUM("radio", "cell_load", double, d.cfg.radio_source.route.cell_load),

        VOLTE_NUM("channel", "fading_sigma_db", double, d.cfg.channel.fading_sigma_db),
        VOLTE_NUM("channel", "fading_rho", double, d.cfg.channel.fading_rho),
        VOLTE_NUM("channel", "size_penalty_db", double, d.cfg.channel.size_penalty_db),
        VOLTE_NUM("channel", "size_ref_bits", double, d.cfg.channel.size_ref_bits),
        VOLTE_NUM("channel", "rank2_penalty_db", double, d.cfg.channel.rank2_penalty_db),

        VOLTE_OPT("handover", "periodic_ms", d.cfg.handover.periodic_ms),
        VOLTE_NUM("handover", "periodic_offset_ms", double, d.cfg.handover.periodic_offset_ms),
        VOLTE_OPT("handover", "rsrp_crossing_dbm", d.cfg.handover.rsrp_crossing_dbm),
        VOLTE_NUM("handover", "min_spacing_ms", double, d.cfg.handover.min_spacing_ms),
        Field{"handover", "inject_at_ms",
              [](ConfigDraft& d, const std::string& v) { d.cfg.handover.inject_at_ms = parse_list(v); },
              [](const ConfigDraft& d) { return join(d.cfg.handover.inject_at_ms); }},
        VOLTE_NUM("handover", "interruption_mean_ms", double, d.cfg.handover.interruption_mean_ms),
        VOLTE_NUM("handover", "interruption_jitter_ms", double, d.cfg.handover.interruption_jitter_ms),
        VOLTE_NUM("handover", "extra_sched_delay_ms", double, d.cfg.handover.extra_sched_delay_ms),
        VOLTE_NUM("handover", "target_olla_offset_db", double, d.cfg.handover.target_olla_offset_db),

        VOLTE_NUM("core", "base_ms", double, d.cfg.core_delay.base_ms),
        VOLTE_NUM("core", "tail_mean_ms", double, d.cfg.core_delay.tail_mean_ms),

        VOLTE_NUM("jitter_buffer", "min_depth_ms", double, d.cfg.jitter_buffer.min_depth_ms),
        VOLTE_NUM("jitter_buffer", "max_depth_ms", double, d.cfg.jitter_buffer.max_depth_ms),
        VOLTE_NUM("jitter_buffer", "initial_depth_ms", double, d.cfg.jitter_buffer.initial_depth_ms),
        VOLTE_NUM("jitter_buffer", "percentile", double, d.cfg.jitter_buffer.percentile),
        VOLTE_NUM("jitter_buffer", "history_packets", std::size_t, d.cfg.jitter_buffer.history_packets),
        VOLTE_NUM("jitter_buffer", "resync_after_late", int, d.cfg.jitter_buffer.resync_after_late),

        VOLTE_BOOL("uplink", "enabled", d.cfg.uplink.enabled),
        VOLTE_NUM("uplink", "sinr_offset_db", double, d.cfg.uplink.sinr_offset_db),
        VOLTE_NUM("uplink", "max_prb", int, d.cfg.uplink.max_prb),
        VOLTE_NUM("uplink", "sched_delay_ms", double, d.cfg.uplink.sched_delay_ms),

        VOLTE_NUM("l2", "overhead_bytes", double, d.cfg.l2_overhead_bytes),
        VOLTE_NUM("l2", "rlc_segment_overhead_bits", int, d.cfg.rlc_segment_overhead_bits),
        VOLTE_NUM("l2", "pdcp_discard_ms", double, d.cfg.pdcp_discard_ms),

        VOLTE_NUM("call", "rtp_timeout_ms", double, d.cfg.rtp_timeout_ms),
    };
    return f;
}
// clang-format on

#undef VOLTE_NUM
#undef VOLTE_BOOL
#undef VOLTE_STR
#undef VOLTE_OPT

inline const Field* find_field(const std::string& section, const std::string& key) {
    for (const auto& f : fields()) {
        if (f.section == section && f.key == key) {
            return &f;
        }
    }
    return nullptr;
}

/// Line of `key` under `[section]` in the raw text, 0 if not found.
inline int line_of(const std::string& text, const std::string& section, const std::string& key) {
    std::istringstream is(text);
    std::string line;
    std::string cur;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        const auto t = trim(line);
        if (t.size() > 1 && t.front() == '[' && t.back() == ']') {
            cur = trim(std::string_view(t).substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (cur == section && eq != std::string::npos && trim(std::string_view(t).substr(0, eq)) == key) {
            return n;
        }
    }
    return 0;
}

inline std::string where(const std::string& origin, int line) {
    return line > 0 ? origin + ":" + std::to_string(line) + ": " : origin + ": ";
}

inline std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
    if (p.empty()) {
        return p;
    }
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) {
        path = base / path;
    }
    return path.lexically_normal().string();
}

}  // namespace detail

/// Applies one `section.key=value` override.
inline void apply_override(ConfigDraft& d, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw ConfigError("override '" + assignment + "': expected section.key=value");
    }
    const std::string section = detail::trim(std::string_view(assignment).substr(0, dot));
    const std::string key = detail::trim(std::string_view(assignment).substr(dot + 1, eq - dot - 1));
    const std::string value = detail::trim(std::string_view(assignment).substr(eq + 1));
    const auto* f = detail::find_field(section, key);
    if (!f) {
        throw ConfigError("override: unknown key '" + section + "." + key + "'");
    }
    try {
        f->set(d, value);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("override " + section + "." + key + ": " + e.what());
    }
}

/// Parses INI text. Relative file paths resolve against base_dir; origin
/// names the source in diagnostics.
inline ConfigDraft parse_config_draft(const std::string& text, const std::string& origin = "config",
                                      const std::filesystem::path& base_dir = {}) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(detail::where(origin, static_cast<int>(e.line())) + e.message());
    }
    ConfigDraft d;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            throw ConfigError(detail::where(origin, detail::line_of(text, "", section)) + "key '" + section +
                              "' outside any section");
        }
        for (const auto& [key, node] : body) {
            const int line = detail::line_of(text, section, key);
            const auto* f = detail::find_field(section, key);
            if (!f) {
                throw ConfigError(detail::where(origin, line) + "unknown key '" + key + "' in [" + section + "]");
            }
            try {
                f->set(d, detail::trim(node.data()));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(detail::where(origin, line) + section + "." + key + ": " + e.what());
            }
        }
    }
    d.cfg.radio_source.trace_path = detail::resolve_path(d.cfg.radio_source.trace_path, base_dir);
    d.cfg.tbs_table_path = detail::resolve_path(d.cfg.tbs_table_path, base_dir);
    return d;
}

inline sim::ScenarioConfig parse_config(const std::string& text, const std::string& origin = "config",
                                        const std::filesystem::path& base_dir = {}) {
    auto cfg = parse_config_draft(text, origin, base_dir).finish();
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

inline std::string read_text_file(const std::string& path, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(what + " not found: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Canonical form: every key, fixed order, shortest round-trip numbers.
inline std::string to_ini(const ConfigDraft& d) {
    std::string out;
    std::string section;
    for (const auto& f : detail::fields()) {
        if (f.section != section) {
            out += (section.empty() ? "[" : "\n[") + f.section + "]\n";
            section = f.section;
        }
        out += f.key + " = " + f.get(d) + "\n";
    }
    return out;
}

inline std::string to_ini(const sim::ScenarioConfig& cfg) { return to_ini(ConfigDraft::from(cfg)); }

}  // namespace volte::io

#endif  // VOLTE_IO_CONFIG_HPP
