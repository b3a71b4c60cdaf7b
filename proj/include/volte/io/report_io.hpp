// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_IO_REPORT_IO_HPP
#define VOLTE_IO_REPORT_IO_HPP

#include <fstream>
#include <map>
#include <set>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "volte/common.hpp"
#include "volte/io/format.hpp"
#include "volte/kpi_report.hpp"

namespace volte::io {

using ojson = nlohmann::ordered_json;

namespace detail {

inline ojson opt_num(const std::optional<double>& v) {
    return v ? ojson(*v) : ojson();
}

inline ojson stats_json(const kpi::Stats& s) {
    ojson j;
    j["avg"] = s.avg;
    j["median"] = s.median;
    j["min"] = s.min;
    j["max"] = s.max;
    j["count"] = s.count;
    return j;
}

inline ojson dist_json(const std::optional<kpi::Distribution>& d) {
    if (!d) {
        return ojson();
    }
    ojson j;
    j["bin_width"] = d->bin_width;
    auto& bins = j["bins"] = ojson::array();
    for (const auto& b : d->bins) {
        bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"pdf", b.pdf}, {"cdf", b.cdf}});
    }
    return j;
}

inline ojson rf_json(const kpi::RfBinnedTable& t) {
    auto arr = ojson::array();
    for (const auto& b : t.bins) {
        arr.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count},
                       {"mean", b.mean ? ojson(*b.mean) : ojson("EMPTY")}});
    }
    return arr;
}

}  // namespace detail

inline ojson report_json(const kpi::KpiReport& r, const kpi::ReportOptions& opt) {
    ojson j;
    j["schema_version"] = r.schema_version;
    j["scenario"] = r.scenario;
    j["stream_id"] = r.stream_id;
    j["rtp_error_rate"] = r.rtp_error_rate;
    j["errors"] = {{"E", r.errors.E},
                   {"N", r.errors.N},
                   {"reordered", r.errors.reordered},
                   {"duplicates", r.errors.duplicates}};
    j["jitter_stats"] = detail::stats_json(r.jitter_stats);
    j["jitter_normalized_stats"] = detail::stats_json(r.jitter_normalized_stats);
    j["window_ms"] = opt.window_ms;
    j["window_error_stats"] = detail::stats_json(r.window_error_stats);
    j["window_jitter_stats"] = detail::stats_json(r.window_jitter_stats);
    j["mos"] = {{"estimate", r.mos.estimate},
                {"loss_fraction", r.mos.loss_fraction},
                {"mean_one_way_ms", r.mos.mean_one_way_ms},
                {"codec_rate_kbps", r.mos.codec_rate_kbps}};
    if (r.jb_discards) {
        j["jb_discards"] = *r.jb_discards;
    }
    if (r.call_drops) {
        j["call_drops"] = *r.call_drops;
    }
    if (r.scheduler) {
        const auto& s = *r.scheduler;
        j["scheduler"] = {{"voice_grants", s.voice_grants},
                          {"sched_rate_pct", s.sched_rate_pct},
                          {"avg_tbs_bits", s.avg_tbs_bits},
                          {"avg_tbs_bytes", s.avg_tbs_bits / 8.0},
                          {"avg_prb", s.avg_prb},
                          {"avg_padding_bits", s.avg_padding_bits},
                          {"avg_padding_bytes", s.avg_padding_bits / 8.0},
                          {"mux_pct", s.mux_pct},
                          {"rank2_pct", s.rank2_pct},
                          {"voice_inter_tti_ms", s.voice_inter_tti_ms},
                          {"bitrate_kbps", s.bitrate_kbps},
                          {"first_tx_bler", s.first_tx_bler}};
    }
    if (r.handover) {
        auto rows = ojson::array();
        for (const auto& h : r.handover->rows) {
            rows.push_back({{"start_ms", h.start_ms},
                            {"end_ms", h.end_ms},
                            {"packets_lost", h.packets_lost},
                            {"max_jitter_ms", detail::opt_num(h.max_jitter_ms)},
                            {"first_gap_ms", detail::opt_num(h.first_gap_ms)}});
        }
        j["handover"] = {{"count", r.handover->rows.size()},
                         {"packets_lost", detail::stats_json(r.handover->lost)},
                         {"jitter_during_ho", detail::stats_json(r.handover->jitter)},
                         {"rows", rows}};
    }
    if (r.rf_jitter && r.rf_error) {
        j["rf_binned"] = {{"metric", kpi::to_string(r.rf_jitter->metric)},
                          {"jitter_ms", detail::rf_json(*r.rf_jitter)},
                          {"error_rate", detail::rf_json(*r.rf_error)}};
    }
    j["jitter_distribution"] = detail::dist_json(r.jitter_dist);
    j["window_error_distribution"] = detail::dist_json(r.window_error_dist);
    auto& win = j["windows"] = ojson::array();
    for (const auto& w : r.windows) {
        win.push_back({{"index", w.index},
                       {"start_ms", w.start_ms},
                       {"end_ms", w.end_ms},
                       {"E", w.E},
                       {"N", w.N},
                       {"error_rate", w.error_rate()},
                       {"jitter_mean_ms", detail::opt_num(w.jitter_mean_ms)},
                       {"jitter_samples", w.jitter_samples}});
    }
    auto& series = j["jitter_series"] = ojson::array();
    for (const auto& p : r.jitter) {
        series.push_back({{"seq", p.seq}, {"arrival_ms", p.arrival_ms}, {"jitter_ms", p.value}});
    }
    return j;
}

/// Flat CSV tables keyed by file name.
inline std::map<std::string, std::string> report_tables(const kpi::KpiReport& r) {
    std::map<std::string, std::string> out;
    {
        std::ostringstream os;
        os << "kpi,value\n";
        os << "rtp_error_rate," << num(r.rtp_error_rate) << '\n';
        os << "E," << r.errors.E << "\nN," << r.errors.N << '\n';
        os << "jitter_avg_ms," << num(r.jitter_stats.avg) << '\n';
        os << "jitter_median_ms," << num(r.jitter_stats.median) << '\n';
        os << "jitter_min_ms," << num(r.jitter_stats.min) << '\n';
        os << "jitter_max_ms," << num(r.jitter_stats.max) << '\n';
        os << "window_error_max," << num(r.window_error_stats.max) << '\n';
        os << "mos_estimate," << num(r.mos.estimate) << '\n';
        out["summary.csv"] = os.str();
    }
    {
        std::ostringstream os;
        os << "seq,arrival_ms,jitter_ms\n";
        for (const auto& p : r.jitter) {
            os << p.seq << ',' << num(p.arrival_ms) << ',' << num(p.value) << '\n';
        }
        out["jitter_series.csv"] = os.str();
    }
    {
        std::ostringstream os;
        os << "index,start_ms,end_ms,E,N,error_rate,jitter_mean_ms\n";
        for (const auto& w : r.windows) {
            os << w.index << ',' << num(w.start_ms) << ',' << num(w.end_ms) << ',' << w.E << ',' << w.N << ','
               << num(w.error_rate()) << ',' << (w.jitter_mean_ms ? num(*w.jitter_mean_ms) : "") << '\n';
        }
        out["windows.csv"] = os.str();
    }
    auto two_col = [&](const std::string& stem, const std::optional<kpi::Distribution>& d) {
        if (!d) {
            return;
        }
        std::ostringstream pdf;
        std::ostringstream cdf;
        pdf << "value,pdf\n";
        cdf << "value,cdf\n";
        for (const auto& b : d->bins) {
            pdf << num(b.lo) << ',' << num(b.pdf) << '\n';
            cdf << num(b.hi) << ',' << num(b.cdf) << '\n';
        }
        out[stem + "_pdf.csv"] = pdf.str();
        out[stem + "_cdf.csv"] = cdf.str();
    };
    two_col("jitter", r.jitter_dist);
    two_col("window_error", r.window_error_dist);
    if (r.rf_jitter && r.rf_error) {
        std::ostringstream os;
        os << "lo,hi,jitter_count,jitter_mean_ms,error_count,error_rate_mean\n";
        for (std::size_t i = 0; i < r.rf_jitter->bins.size(); ++i) {
            const auto& a = r.rf_jitter->bins[i];
            const auto& b = r.rf_error->bins[i];
            os << num(a.lo) << ',' << num(a.hi) << ',' << a.count << ',' << (a.mean ? num(*a.mean) : "EMPTY")
               << ',' << b.count << ',' << (b.mean ? num(*b.mean) : "EMPTY") << '\n';
        }
        out["rf_binned.csv"] = os.str();
    }
    if (r.handover) {
        std::ostringstream os;
        os << "start_ms,end_ms,packets_lost,max_jitter_ms,first_gap_ms\n";
        for (const auto& h : r.handover->rows) {
            os << num(h.start_ms) << ',' << num(h.end_ms) << ',' << h.packets_lost << ','
               << (h.max_jitter_ms ? num(*h.max_jitter_ms) : "") << ','
               << (h.first_gap_ms ? num(*h.first_gap_ms) : "") << '\n';
        }
        out["handover.csv"] = os.str();
    }
    if (r.scheduler) {
        const auto& s = *r.scheduler;
        std::ostringstream os;
        os << "sched_rate_pct,avg_tbs_bits,avg_prb,avg_padding_bits,mux_pct,rank2_pct,voice_inter_tti_ms,"
              "bitrate_kbps\n";
        os << num(s.sched_rate_pct) << ',' << num(s.avg_tbs_bits) << ',' << num(s.avg_prb) << ','
           << num(s.avg_padding_bits) << ',' << num(s.mux_pct) << ',' << num(s.rank2_pct) << ','
           << num(s.voice_inter_tti_ms) << ',' << num(s.bitrate_kbps) << '\n';
        out["scheduler.csv"] = os.str();
    }
    return out;
}

// ---- comparison ----

struct CompareRow {
    std::string kpi;
    double a = 0.0;
    double b = 0.0;
    double delta = 0.0;
    std::string verdict;
};

namespace detail {

inline void flatten(const ojson& j, const std::string& prefix, std::map<std::string, double>& out) {
    static const std::set<std::string> kSkip = {"windows", "jitter_series", "jitter_distribution",
                                                "window_error_distribution", "rf_binned", "rows",
                                                "schema_version", "stream_id"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (kSkip.count(it.key())) {
            continue;
        }
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object()) {
            flatten(*it, key, out);
        } else if (it->is_number()) {
            out[key] = it->get<double>();
        }
    }
}

}  // namespace detail

inline ojson parse_report(const std::string& text, const std::string& name) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(name + ": not valid JSON (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
        throw InputError(name + ": missing schema_version");
    }
    return j;
}

inline ojson load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("report not found: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_report(ss.str(), path);
}

/// Every scalar KPI side by side; delta = a - b.
inline std::vector<CompareRow> compare_reports(const ojson& a, const ojson& b) {
    if (a["schema_version"] != b["schema_version"]) {
        throw InputError("report schema_version mismatch: " + a["schema_version"].dump() + " vs " +
                         b["schema_version"].dump());
    }
    std::map<std::string, double> fa;
    std::map<std::string, double> fb;
    detail::flatten(a, "", fa);
    detail::flatten(b, "", fb);
    std::vector<CompareRow> rows;
    for (const auto& [k, va] : fa) {
        const auto it = fb.find(k);
        if (it == fb.end()) {
            continue;
        }
        CompareRow r{k, va, it->second, va - it->second, ""};
        r.verdict = va < it->second ? "A<B" : va > it->second ? "A>B" : "A=B";
        rows.push_back(r);
    }
    return rows;
}

inline std::string compare_csv(const std::vector<CompareRow>& rows) {
    std::ostringstream os;
    os << "kpi,a,b,delta,verdict\n";
    for (const auto& r : rows) {
        os << r.kpi << ',' << num(r.a) << ',' << num(r.b) << ',' << num(r.delta) << ',' << r.verdict << '\n';
    }
    return os.str();
}

inline ojson compare_json(const std::vector<CompareRow>& rows) {
    auto arr = ojson::array();
    for (const auto& r : rows) {
        arr.push_back({{"kpi", r.kpi}, {"a", r.a}, {"b", r.b}, {"delta", r.delta}, {"verdict", r.verdict}});
    }
    return {{"rows", arr}};
}

}  // namespace volte::io

#endif  // VOLTE_IO_REPORT_IO_HPP
