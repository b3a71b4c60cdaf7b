// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_KPI_REPORT_HPP
#define VOLTE_KPI_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include "volte/jitter_buffer.hpp"
#include "volte/kpi_analyzer.hpp"

namespace volte::kpi {

inline constexpr int kReportSchemaVersion = 1;

struct ReportOptions {
    double window_ms = 1000.0;
    double jitter_bin_ms = 1.0;
    double error_bin = 0.01;
    std::vector<double> rsrp_edges = {-130, -125, -120, -115, -110, -105, -100, -95,
                                      -90,  -85,  -80,  -75,  -70,  -65,  -60};
    double codec_rate_kbps = 12.65;
    /// Capture, coding and rendering delay outside the measured path.
    double terminal_delay_ms = 40.0;
    /// Playout delay assumed when no jitter buffer replay is available.
    double assumed_buffer_ms = 40.0;
};

struct MosSummary {
    double estimate = 0.0;
    double loss_fraction = 0.0;
    double mean_one_way_ms = 0.0;
    double codec_rate_kbps = 0.0;
};

struct KpiReport {
    int schema_version = kReportSchemaVersion;
    std::string scenario;
    std::uint32_t stream_id = 1;
    std::vector<JitterPoint> jitter;
    Stats jitter_stats;
    Stats jitter_normalized_stats;
    ErrorCounters errors;
    double rtp_error_rate = 0.0;
    std::vector<WindowStat> windows;
    Stats window_error_stats;
    Stats window_jitter_stats;
    std::optional<Distribution> jitter_dist;
    std::optional<Distribution> window_error_dist;
    std::optional<RfBinnedTable> rf_jitter;
    std::optional<RfBinnedTable> rf_error;
    std::optional<HandoverTable> handover;
    std::optional<SchedulerTable> scheduler;
    std::optional<std::int64_t> jb_discards;
    std::optional<std::int64_t> call_drops;
    MosSummary mos;
};

/// Everything the analyzer can say about one stream. radio, log and playout
/// are optional; the matching report sections stay absent without them.
inline KpiReport build_report(std::span<const RtpRecord> trace, const ReportOptions& opt,
                              const radio::RadioTrace* radio = nullptr, const sim::EventLog* log = nullptr,
                              const sim::PlayoutResult* playout = nullptr) {
    KpiReport r;
    if (!trace.empty()) {
        r.stream_id = trace.front().stream_id;
    }
    if (log) {
        r.scenario = log->scenario;
    }
    r.jitter = relative_jitter(trace);
    r.jitter_stats = stats_of(values_of(r.jitter));
    r.jitter_normalized_stats = stats_of(values_of(relative_jitter(trace, true)));
    r.errors = rtp_error_counts(trace);
    r.rtp_error_rate = r.errors.rate();
    r.windows = windowed_kpis(trace, opt.window_ms);

    std::vector<double> werr;
    std::vector<double> wjit;
    for (const auto& w : r.windows) {
        werr.push_back(w.error_rate());
        if (w.jitter_mean_ms) {
            wjit.push_back(*w.jitter_mean_ms);
        }
    }
    r.window_error_stats = stats_of(werr);
    r.window_jitter_stats = stats_of(wjit);
    if (!r.jitter.empty()) {
        const auto v = values_of(r.jitter);
        r.jitter_dist = distribution(v, opt.jitter_bin_ms);
    }
    if (!werr.empty()) {
        r.window_error_dist = distribution(werr, opt.error_bin);
    }

    if (radio && !radio->empty()) {
        std::vector<TimedValue> js;
        for (const auto& j : r.jitter) {
            js.push_back({j.arrival_ms, j.value});
        }
        std::vector<TimedValue> es;
        for (const auto& w : r.windows) {
            es.push_back({0.5 * (w.start_ms + w.end_ms), w.error_rate()});
        }
        r.rf_jitter = bin_by_radio(js, *radio, opt.rsrp_edges);
        r.rf_error = bin_by_radio(es, *radio, opt.rsrp_edges);
    }

    if (log) {
        r.handover = handover_kpis(*log);
        r.scheduler = scheduler_stats(*log);
        r.call_drops = static_cast<std::int64_t>(log->call_drops());
    }

    double delay_sum = 0.0;
    std::size_t delay_n = 0;
    std::int64_t discarded = 0;
    if (playout) {
        for (const auto& p : playout->played) {
            delay_sum += p.playout_ms - p.departure_ms;
            ++delay_n;
        }
        discarded = static_cast<std::int64_t>(playout->discarded.size());
        r.jb_discards = discarded;
    } else {
        for (const auto& p : trace) {
            if (p.arrival_ms) {
                delay_sum += *p.arrival_ms - p.departure_ms + opt.assumed_buffer_ms;
                ++delay_n;
            }
        }
    }
    const double total = static_cast<double>(r.errors.E + r.errors.N);
    r.mos.codec_rate_kbps = opt.codec_rate_kbps;
    r.mos.loss_fraction = total > 0 ? std::min(1.0, static_cast<double>(r.errors.E + discarded) / total) : 0.0;
    r.mos.mean_one_way_ms = (delay_n ? delay_sum / static_cast<double>(delay_n) : 0.0) + opt.terminal_delay_ms;
    r.mos.estimate = mos_estimate(r.mos.loss_fraction, r.mos.mean_one_way_ms, opt.codec_rate_kbps);
    return r;
}

}  // namespace volte::kpi

#endif  // VOLTE_KPI_REPORT_HPP
