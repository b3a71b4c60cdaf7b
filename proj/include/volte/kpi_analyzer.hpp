// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_KPI_ANALYZER_HPP
#define VOLTE_KPI_ANALYZER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "volte/codec_model.hpp"
#include "volte/event_log.hpp"
#include "volte/radio_channel.hpp"

namespace volte::kpi {

using codec::RtpRecord;

struct JitterPoint {
    std::int64_t seq = 0;
    double arrival_ms = 0.0;
    double value = 0.0;
};

struct JitterCounters {
    std::optional<double> s_prev;
    std::optional<double> r_prev;
    std::optional<std::int64_t> seq_prev;
};

/// Arrived packets in arrival order (stable for ties).
inline std::vector<RtpRecord> arrivals_in_order(std::span<const RtpRecord> trace) {
    std::vector<RtpRecord> out;
    for (const auto& r : trace) {
        if (r.arrival_ms) {
            out.push_back(r);
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const RtpRecord& a, const RtpRecord& b) { return *a.arrival_ms < *b.arrival_ms; });
    return out;
}

/// Relative jitter |(s - s') - (r - r')| in ms between consecutive
/// in-sequence packets of one talkspurt. A gap, a talkspurt start or a
/// reordered packet breaks the chain; reordered and duplicate packets
/// are skipped. With normalized set each value is divided by (r - r')
/// and pairs with r == r' are dropped.
inline std::vector<JitterPoint> relative_jitter(std::span<const RtpRecord> trace, bool normalized = false) {
    std::vector<JitterPoint> out;
    JitterCounters c;
    for (const auto& p : arrivals_in_order(trace)) {
        if (c.seq_prev && p.seq <= *c.seq_prev) {
            continue;
        }
        const double r = *p.arrival_ms;
        const double s = p.media_ts_ms;
        if (c.seq_prev && p.seq == *c.seq_prev + 1 && !p.talkspurt_start) {
            const double dr = r - *c.r_prev;
            const double j = std::abs((s - *c.s_prev) - dr);
            if (!normalized) {
                out.push_back({p.seq, r, j});
            } else if (dr > 0.0) {
                out.push_back({p.seq, r, j / dr});
            }
        }
        c.s_prev = s;
        c.r_prev = r;
        c.seq_prev = p.seq;
    }
    return out;
}

struct ErrorCounters {
    /// Missing sequence numbers between the lowest and highest seen.
    std::int64_t E = 0;
    /// Distinct sequence numbers received, reordered ones included.
    std::int64_t N = 0;
    std::int64_t reordered = 0;
    std::int64_t duplicates = 0;

    double rate() const { return E + N > 0 ? static_cast<double>(E) / static_cast<double>(E + N) : 0.0; }
};

/// Gap census over the trace. Rows without an arrival still widen the
/// sequence span (a simulator knows about trailing losses; a capture does not).
inline ErrorCounters rtp_error_counts(std::span<const RtpRecord> trace) {
    if (trace.empty()) {
        throw std::invalid_argument("rtp_error_rate needs a nonempty trace");
    }
    std::int64_t lo = trace.front().seq;
    std::int64_t hi = trace.front().seq;
    for (const auto& r : trace) {
        lo = std::min(lo, r.seq);
        hi = std::max(hi, r.seq);
    }
    ErrorCounters c;
    std::set<std::int64_t> seen;
    std::optional<std::int64_t> highest;
    for (const auto& p : arrivals_in_order(trace)) {
        if (!seen.insert(p.seq).second) {
            ++c.duplicates;
            continue;
        }
        if (highest && p.seq < *highest) {
            ++c.reordered;
        }
        highest = std::max(highest.value_or(p.seq), p.seq);
    }
    c.N = static_cast<std::int64_t>(seen.size());
    c.E = (hi - lo + 1) - c.N;
    return c;
}

inline double rtp_error_rate(std::span<const RtpRecord> trace) {
    return rtp_error_counts(trace).rate();
}

struct Stats {
    double avg = 0.0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

/// Median of an even count is the mean of the two middle values.
inline Stats stats_of(std::vector<double> v) {
    Stats s;
    s.count = v.size();
    if (v.empty()) {
        return s;
    }
    std::sort(v.begin(), v.end());
    s.min = v.front();
    s.max = v.back();
    s.avg = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    const std::size_t m = v.size() / 2;
    s.median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    return s;
}

inline std::vector<double> values_of(const std::vector<JitterPoint>& pts) {
    std::vector<double> v;
    v.reserve(pts.size());
    for (const auto& p : pts) {
        v.push_back(p.value);
    }
    return v;
}

// ---- windowed KPIs ----

struct WindowStat {
    std::size_t index = 0;
    double start_ms = 0.0;
    double end_ms = 0.0;
    std::int64_t E = 0;
    std::int64_t N = 0;
    std::size_t jitter_samples = 0;
    std::optional<double> jitter_mean_ms;

    double error_rate() const {
        return E + N > 0 ? static_cast<double>(E) / static_cast<double>(E + N) : 0.0;
    }
};

/// Fixed windows from the first arrival. A missing sequence number is
/// charged to the window in which the next higher received packet
/// arrived; trailing gaps go to the last window. Summing E and N over the
/// windows gives the whole-trace census.
inline std::vector<WindowStat> windowed_kpis(std::span<const RtpRecord> trace, double window_ms = 1000.0) {
    if (!(window_ms > 0.0)) {
        throw std::invalid_argument("window_ms must be > 0");
    }
    const auto arrived = arrivals_in_order(trace);
    if (arrived.empty()) {
        return {};
    }
    const double t0 = *arrived.front().arrival_ms;
    const double t_last = *arrived.back().arrival_ms;
    const auto n_win = static_cast<std::size_t>(std::floor((t_last - t0) / window_ms)) + 1;
    std::vector<WindowStat> w(n_win);
    for (std::size_t i = 0; i < n_win; ++i) {
        w[i].index = i;
        w[i].start_ms = t0 + static_cast<double>(i) * window_ms;
        w[i].end_ms = w[i].start_ms + window_ms;
    }
    auto slot = [&](double t) {
        return std::min(n_win - 1, static_cast<std::size_t>(std::floor((t - t0) / window_ms)));
    };

    // First arrival per distinct seq.
    std::map<std::int64_t, double> first_arrival;
    for (const auto& p : arrived) {
        first_arrival.emplace(p.seq, *p.arrival_ms);
    }
    for (const auto& [seq, t] : first_arrival) {
        ++w[slot(t)].N;
    }
    std::int64_t lo = trace.front().seq;
    std::int64_t hi = trace.front().seq;
    for (const auto& r : trace) {
        lo = std::min(lo, r.seq);
        hi = std::max(hi, r.seq);
    }
    auto it = first_arrival.begin();
    for (std::int64_t s = lo; s <= hi; ++s) {
        while (it != first_arrival.end() && it->first < s) {
            ++it;
        }
        if (it != first_arrival.end() && it->first == s) {
            continue;
        }
        const std::size_t k = (it == first_arrival.end()) ? n_win - 1 : slot(it->second);
        ++w[k].E;
    }

    std::vector<double> sum(n_win, 0.0);
    for (const auto& j : relative_jitter(trace)) {
        const std::size_t k = slot(j.arrival_ms);
        sum[k] += j.value;
        ++w[k].jitter_samples;
    }
    for (std::size_t i = 0; i < n_win; ++i) {
        if (w[i].jitter_samples) {
            w[i].jitter_mean_ms = sum[i] / static_cast<double>(w[i].jitter_samples);
        }
    }
    return w;
}

// ---- distributions ----

struct DistBin {
    double lo = 0.0;
    double hi = 0.0;
    double pdf = 0.0;
    double cdf = 0.0;
};

struct Distribution {
    double bin_width = 0.0;
    std::vector<DistBin> bins;
};

/// Histogram over bins of bin_width aligned to multiples of the width.
inline Distribution distribution(std::span<const double> series, double bin_width) {
    if (series.empty()) {
        throw std::invalid_argument("distribution needs a nonempty series");
    }
    if (!(bin_width > 0.0)) {
        throw std::invalid_argument("bin_width must be > 0");
    }
    const auto [mn, mx] = std::minmax_element(series.begin(), series.end());
    const auto first = static_cast<std::int64_t>(std::floor(*mn / bin_width));
    const auto last = static_cast<std::int64_t>(std::floor(*mx / bin_width));
    std::vector<std::int64_t> counts(static_cast<std::size_t>(last - first + 1), 0);
    for (double v : series) {
        ++counts[static_cast<std::size_t>(static_cast<std::int64_t>(std::floor(v / bin_width)) - first)];
    }
    Distribution d;
    d.bin_width = bin_width;
    const auto n = static_cast<double>(series.size());
    std::int64_t running = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        running += counts[i];
        const double lo = static_cast<double>(first + static_cast<std::int64_t>(i)) * bin_width;
        d.bins.push_back({lo, lo + bin_width, static_cast<double>(counts[i]) / n, static_cast<double>(running) / n});
    }
    return d;
}

/// Exact empirical CDF: fraction of samples <= x.
inline double ecdf(std::span<const double> sorted, double x) {
    if (sorted.empty()) {
        throw std::invalid_argument("ecdf needs a nonempty series");
    }
    const auto k = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
    return static_cast<double>(k) / static_cast<double>(sorted.size());
}

// ---- RF binning ----

enum class RfMetric { RSRP, RSRQ, SINR };

inline std::string_view to_string(RfMetric m) {
    switch (m) {
        case RfMetric::RSRP: return "rsrp_dbm";
        case RfMetric::RSRQ: return "rsrq_db";
        case RfMetric::SINR: return "sinr_db";
    }
    return "?";
}

struct TimedValue {
    double t_ms = 0.0;
    double value = 0.0;
};

struct RfBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    /// Absent for a bin without samples.
    std::optional<double> mean;
};

struct RfBinnedTable {
    RfMetric metric = RfMetric::RSRP;
    std::vector<RfBin> bins;
    std::size_t outside = 0;
};

/// Joins each sample to the nearest-in-time radio sample and averages
/// per bin [edge_i, edge_{i+1}).
inline RfBinnedTable bin_by_radio(std::span<const TimedValue> series, const radio::RadioTrace& trace,
                                  std::span<const double> edges, RfMetric metric = RfMetric::RSRP) {
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()) ||
        std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
        throw std::invalid_argument("bin edges must be strictly increasing with at least two entries");
    }
    RfBinnedTable t;
    t.metric = metric;
    std::vector<double> sums(edges.size() - 1, 0.0);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        t.bins.push_back({edges[i], edges[i + 1], 0, std::nullopt});
    }
    for (const auto& s : series) {
        const auto& rs = trace.nearest(s.t_ms);
        const double x = metric == RfMetric::RSRP ? rs.rsrp_dbm : metric == RfMetric::RSRQ ? rs.rsrq_db : rs.sinr_db;
        const auto it = std::upper_bound(edges.begin(), edges.end(), x);
        if (it == edges.begin() || it == edges.end()) {
            ++t.outside;
            continue;
        }
        const auto k = static_cast<std::size_t>(it - edges.begin()) - 1;
        sums[k] += s.value;
        ++t.bins[k].count;
    }
    for (std::size_t k = 0; k < t.bins.size(); ++k) {
        if (t.bins[k].count) {
            t.bins[k].mean = sums[k] / static_cast<double>(t.bins[k].count);
        }
    }
    return t;
}

// ---- handover KPIs ----

struct HandoverRow {
    double start_ms = 0.0;
    double end_ms = 0.0;
    std::int64_t packets_lost = 0;
    std::optional<double> max_jitter_ms;
    std::optional<double> first_gap_ms;
};

struct HandoverTable {
    std::vector<HandoverRow> rows;
    Stats lost;
    Stats jitter;
};

inline constexpr double kHandoverGuardMs = 100.0;

/// Per handover: DL losses and the largest jitter sample inside
/// [start - 1 TTI, max(end, resume) + guard]. The TTI before start is
/// included because the source cell flushes HARQ at the detach boundary.
inline HandoverTable handover_kpis(const sim::EventLog& log, double guard_ms = kHandoverGuardMs) {
    HandoverTable t;
    const auto hos = log.handovers();
    if (hos.empty()) {
        return t;
    }
    std::vector<RtpRecord> dl;
    for (const auto& [ts, a] : log.of<sim::ArrivalEvent>()) {
        if (a->rec.stream_id == 1) {
            dl.push_back(a->rec);
        }
    }
    const auto jit = relative_jitter(dl);
    const auto arrived = arrivals_in_order(dl);
    const auto losses = log.of<sim::LossEvent>();

    std::vector<double> lost_v;
    std::vector<double> jit_v;
    for (const auto& h : hos) {
        HandoverRow row;
        row.start_ms = h.start_ms;
        row.end_ms = h.end_ms;
        const double lo = h.start_ms - 1.0;
        const double hi = std::max(h.end_ms, h.resume_ms) + guard_ms;
        for (const auto& [ts, l] : losses) {
            const double t = us_to_ms(ts);
            if (l->stream_id == 1 && t >= lo && t <= hi) {
                ++row.packets_lost;
            }
        }
        for (const auto& j : jit) {
            if (j.arrival_ms >= h.start_ms && j.arrival_ms <= hi) {
                row.max_jitter_ms = std::max(row.max_jitter_ms.value_or(j.value), j.value);
            }
        }
        std::optional<double> before;
        for (const auto& a : arrived) {
            if (*a.arrival_ms < h.start_ms) {
                before = *a.arrival_ms;
            } else {
                if (before) {
                    row.first_gap_ms = *a.arrival_ms - *before;
                }
                break;
            }
        }
        lost_v.push_back(static_cast<double>(row.packets_lost));
        if (row.max_jitter_ms) {
            jit_v.push_back(*row.max_jitter_ms);
        }
        t.rows.push_back(row);
    }
    t.lost = stats_of(lost_v);
    t.jitter = stats_of(jit_v);
    return t;
}

// ---- scheduler statistics ----

struct SchedulerTable {
    std::size_t voice_grants = 0;
    /// TTIs with any DL transmission over all TTIs, percent.
    double sched_rate_pct = 0.0;
    double avg_tbs_bits = 0.0;
    double avg_prb = 0.0;
    double avg_padding_bits = 0.0;
    double mux_pct = 0.0;
    double rank2_pct = 0.0;
    /// Mean spacing between consecutive new voice grants.
    double voice_inter_tti_ms = 0.0;
    /// ACKed DL transport block bits over the run.
    double bitrate_kbps = 0.0;
    double first_tx_bler = 0.0;
};

/// DL grant statistics. Per-grant averages cover first transmissions
/// that carry voice.
inline SchedulerTable scheduler_stats(const sim::EventLog& log) {
    SchedulerTable t;
    if (!(log.duration_ms > 0.0)) {
        return t;
    }
    std::set<std::int64_t> ttis;
    double tbs = 0;
    double prb = 0;
    double pad = 0;
    std::size_t mux = 0;
    std::size_t rank2 = 0;
    double acked_bits = 0;
    std::size_t first_tx = 0;
    std::size_t first_fail = 0;
    std::optional<std::int64_t> prev_voice;
    double gap_sum = 0;
    std::size_t gaps = 0;
    for (const auto& [ts, g] : log.of<sim::GrantEvent>()) {
        if (g->dir != sim::Direction::DL) {
            continue;
        }
        if (us_to_ms(ts) < log.duration_ms) {
            ttis.insert(g->grant.tti_index);
        }
        if (g->crc_ok) {
            acked_bits += g->grant.tbs_bits;
        }
        if (g->harq_attempt != 1) {
            continue;
        }
        ++first_tx;
        first_fail += g->crc_ok ? 0 : 1;
        if (!g->grant.carries_voice) {
            continue;
        }
        ++t.voice_grants;
        tbs += g->grant.tbs_bits;
        prb += g->grant.prb_count;
        pad += g->grant.padding_bits;
        mux += g->grant.carries_data ? 1 : 0;
        rank2 += g->grant.mimo_rank == 2 ? 1 : 0;
        if (prev_voice) {
            gap_sum += static_cast<double>(g->grant.tti_index - *prev_voice);
            ++gaps;
        }
        prev_voice = g->grant.tti_index;
    }
    t.sched_rate_pct = 100.0 * static_cast<double>(ttis.size()) / std::floor(log.duration_ms);
    if (t.voice_grants) {
        const auto n = static_cast<double>(t.voice_grants);
        t.avg_tbs_bits = tbs / n;
        t.avg_prb = prb / n;
        t.avg_padding_bits = pad / n;
        t.mux_pct = 100.0 * static_cast<double>(mux) / n;
        t.rank2_pct = 100.0 * static_cast<double>(rank2) / n;
    }
    t.voice_inter_tti_ms = gaps ? gap_sum / static_cast<double>(gaps) : 0.0;
    t.bitrate_kbps = acked_bits / log.duration_ms;
    t.first_tx_bler = first_tx ? static_cast<double>(first_fail) / static_cast<double>(first_tx) : 0.0;
    return t;
}

// ---- MOS surrogate ----

/// Equipment impairment of a codec mode and its packet-loss robustness.
struct CodecImpairment {
    double ie = 13.0;
    double bpl = 10.0;
};

/// Wideband mode table: the higher rate starts cleaner but degrades faster
/// with loss.
inline CodecImpairment codec_impairment(double codec_rate_kbps) {
    if (codec_rate_kbps >= 20.0) {
        return {8.0, 4.3};
    }
    return {13.0, 10.0};
}

inline constexpr double kR0 = 93.2;

inline double r_to_mos(double r) {
    if (r <= 0.0) {
        return 1.0;
    }
    if (r >= 100.0) {
        return 4.5;
    }
    // The cubic dips just below 1 for small R; hold the floor so MOS stays monotone.
    return std::max(1.0, 1.0 + 0.035 * r + 7.0e-6 * r * (r - 60.0) * (100.0 - r));
}

inline double delay_impairment(double one_way_ms) {
    const double d = std::max(0.0, one_way_ms);
    return 0.024 * d + (d > 177.3 ? 0.11 * (d - 177.3) : 0.0);
}

inline double effective_equipment_impairment(double loss_fraction, const CodecImpairment& c) {
    const double p = 100.0 * std::clamp(loss_fraction, 0.0, 1.0);
    return c.ie + (95.0 - c.ie) * p / (p + c.bpl);
}

inline double r_factor(double loss_fraction, double one_way_ms, double codec_rate_kbps) {
    return kR0 - delay_impairment(one_way_ms) -
           effective_equipment_impairment(loss_fraction, codec_impairment(codec_rate_kbps));
}

/// Parametric MOS in [1, 4.5].
inline double mos_estimate(double loss_fraction, double mean_one_way_delay_ms, double codec_rate_kbps) {
    if (!(loss_fraction >= 0.0 && loss_fraction <= 1.0)) {
        throw std::invalid_argument("loss_fraction must be in [0,1]");
    }
    if (!(mean_one_way_delay_ms >= 0.0)) {
        throw std::invalid_argument("delay must be >= 0");
    }
    return r_to_mos(r_factor(loss_fraction, mean_one_way_delay_ms, codec_rate_kbps));
}

}  // namespace volte::kpi

#endif  // VOLTE_KPI_ANALYZER_HPP
