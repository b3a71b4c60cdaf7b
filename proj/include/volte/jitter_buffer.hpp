// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_JITTER_BUFFER_HPP
#define VOLTE_JITTER_BUFFER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "volte/codec_model.hpp"

namespace volte::sim {

struct JitterBufferConfig {
    double min_depth_ms = 20.0;
    double max_depth_ms = 200.0;
    double initial_depth_ms = 40.0;
    /// Depth target = this percentile of recent transit variation.
    double percentile = 0.95;
    std::size_t history_packets = 100;
    /// Consecutive late packets that force a re-anchor of the playout clock.
    int resync_after_late = 3;

    void validate() const {
        if (!(min_depth_ms >= 0.0 && min_depth_ms <= max_depth_ms)) {
            throw std::invalid_argument("jitter buffer needs 0 <= min_depth <= max_depth");
        }
        if (!(percentile > 0.0 && percentile <= 1.0)) {
            throw std::invalid_argument("jitter buffer percentile must be in (0,1]");
        }
        if (history_packets == 0) {
            throw std::invalid_argument("jitter buffer history must be > 0");
        }
        if (resync_after_late < 1) {
            throw std::invalid_argument("resync_after_late must be >= 1");
        }
    }
};

/// Adaptive buffer state: the playout clock is anchored at talkspurt starts
/// (and on resync) and advances in media time in between.
struct JitterBufferState {
    double target_depth_ms = 40.0;
    std::optional<double> anchor_media_ts_ms;
    double anchor_playout_ms = 0.0;
    std::optional<std::int64_t> last_played_seq;
    std::optional<double> last_played_ts_ms;
    double last_playout_ms = -INFINITY;
    std::deque<double> transit_history;
    int late_run = 0;
};

struct Playout {
    std::int64_t seq;
    double arrival_ms;
    double playout_ms;
    double departure_ms;
};

struct Discard {
    enum class Reason { Late, OutOfOrder };
    std::int64_t seq;
    double arrival_ms;
    double playout_ms;
    Reason reason;
};

struct PlayoutResult {
    std::vector<Playout> played;
    std::vector<Discard> discarded;
    /// Depth target after each processed arrival.
    std::vector<double> depth_ms;
    JitterBufferState final_state;
};

/// Arrivals before the history is trusted; initial_depth_ms is a floor until then.
inline constexpr std::size_t kWarmupPackets = 10;

namespace detail {

inline double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
    return v[std::min(idx, v.size() - 1)];
}

}  // namespace detail

/// Turns asynchronous arrivals into a fixed-cadence playout schedule.
/// Arrivals must be ordered by arrival time; lost packets are skipped.
inline PlayoutResult jitter_buffer_playout(const JitterBufferConfig& cfg, JitterBufferState state,
                                           std::span<const codec::RtpRecord> arrivals) {
    cfg.validate();
    PlayoutResult res;
    double prev_arrival = -INFINITY;
    for (const auto& p : arrivals) {
        if (!p.arrival_ms) {
            continue;
        }
        const double arr = *p.arrival_ms;
        if (arr < prev_arrival) {
            throw std::invalid_argument("jitter buffer arrivals must be time-ordered");
        }
        prev_arrival = arr;

        state.transit_history.push_back(arr - p.media_ts_ms);
        if (state.transit_history.size() > cfg.history_packets) {
            state.transit_history.pop_front();
        }
        const double min_transit =
            *std::min_element(state.transit_history.begin(), state.transit_history.end());
        std::vector<double> variation;
        variation.reserve(state.transit_history.size());
        for (double t : state.transit_history) {
            variation.push_back(t - min_transit);
        }
        double depth = detail::quantile(std::move(variation), cfg.percentile);
        if (state.transit_history.size() < kWarmupPackets) {
            depth = std::max(depth, cfg.initial_depth_ms);
        }
        state.target_depth_ms = std::clamp(depth, cfg.min_depth_ms, cfg.max_depth_ms);

        const bool reanchor = !state.anchor_media_ts_ms || p.talkspurt_start ||
                              state.late_run >= cfg.resync_after_late;
        if (reanchor && !(state.last_played_ts_ms && p.media_ts_ms <= *state.last_played_ts_ms)) {
            // Playout instants never run backwards across an anchor change.
            state.anchor_media_ts_ms = p.media_ts_ms;
            state.anchor_playout_ms = std::max(arr + state.target_depth_ms, state.last_playout_ms);
            state.late_run = 0;
        }

        const double playout = state.anchor_playout_ms + (p.media_ts_ms - *state.anchor_media_ts_ms);
        if (state.last_played_ts_ms && p.media_ts_ms <= *state.last_played_ts_ms) {
            res.discarded.push_back({p.seq, arr, playout, Discard::Reason::OutOfOrder});
        } else if (arr > playout) {
            res.discarded.push_back({p.seq, arr, playout, Discard::Reason::Late});
            ++state.late_run;
        } else {
            res.played.push_back({p.seq, arr, playout, p.departure_ms});
            state.last_played_seq = p.seq;
            state.last_played_ts_ms = p.media_ts_ms;
            state.last_playout_ms = playout;
            state.late_run = 0;
        }
        res.depth_ms.push_back(state.target_depth_ms);
    }
    res.final_state = std::move(state);
    return res;
}

inline PlayoutResult jitter_buffer_playout(const JitterBufferConfig& cfg,
                                           std::span<const codec::RtpRecord> arrivals) {
    JitterBufferState s;
    s.target_depth_ms = std::clamp(cfg.initial_depth_ms, cfg.min_depth_ms, cfg.max_depth_ms);
    return jitter_buffer_playout(cfg, std::move(s), arrivals);
}

}  // namespace volte::sim

#endif  // VOLTE_JITTER_BUFFER_HPP
