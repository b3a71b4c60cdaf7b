// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "volte/jitter_buffer.hpp"

using namespace volte;
using codec::RtpRecord;
using sim::JitterBufferConfig;

namespace {

std::vector<RtpRecord> cadence(int n, double latency) {
    std::vector<RtpRecord> out;
    for (int i = 0; i < n; ++i) {
        RtpRecord r;
        r.seq = i;
        r.media_ts_ms = 20.0 * i;
        r.departure_ms = r.media_ts_ms;
        r.arrival_ms = r.media_ts_ms + latency;
        r.talkspurt_start = i == 0;
        out.push_back(r);
    }
    return out;
}

}  // namespace

TEST(Playout, ZeroJitterShrinksToMin) {
    JitterBufferConfig cfg;
    const auto res = sim::jitter_buffer_playout(cfg, cadence(200, 50.0));
    EXPECT_TRUE(res.discarded.empty());
    EXPECT_EQ(res.played.size(), 200u);
    EXPECT_DOUBLE_EQ(res.depth_ms.back(), cfg.min_depth_ms);
}

TEST(Playout, FixedCadenceWithinTalkspurt) {
    JitterBufferConfig cfg;
    auto tr = cadence(100, 50.0);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        *tr[i].arrival_ms += static_cast<double>((i * 7) % 5);
    }
    const auto res = sim::jitter_buffer_playout(cfg, tr);
    for (std::size_t i = 1; i < res.played.size(); ++i) {
        const auto& a = res.played[i - 1];
        const auto& b = res.played[i];
        EXPECT_DOUBLE_EQ(b.playout_ms - a.playout_ms, 20.0 * static_cast<double>(b.seq - a.seq));
    }
}

TEST(Playout, VeryLatePacketDiscarded) {
    JitterBufferConfig cfg;
    cfg.max_depth_ms = 100.0;
    auto tr = cadence(60, 50.0);
    *tr[40].arrival_ms += 200.0;
    std::stable_sort(tr.begin(), tr.end(),
                     [](const RtpRecord& a, const RtpRecord& b) { return *a.arrival_ms < *b.arrival_ms; });
    const auto res = sim::jitter_buffer_playout(cfg, tr);
    ASSERT_EQ(res.discarded.size(), 1u);
    EXPECT_EQ(res.discarded[0].seq, 40);
    EXPECT_EQ(res.played.size(), 59u);
}

TEST(Playout, DepthStaysInBounds) {
    JitterBufferConfig cfg;
    cfg.min_depth_ms = 30;
    cfg.max_depth_ms = 90;
    auto tr = cadence(500, 40.0);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        *tr[i].arrival_ms += static_cast<double>((i * 37) % 150);
    }
    std::stable_sort(tr.begin(), tr.end(),
                     [](const RtpRecord& a, const RtpRecord& b) { return *a.arrival_ms < *b.arrival_ms; });
    const auto res = sim::jitter_buffer_playout(cfg, tr);
    for (double d : res.depth_ms) {
        EXPECT_GE(d, cfg.min_depth_ms);
        EXPECT_LE(d, cfg.max_depth_ms);
    }
    // Playout order follows media order; every packet is played or discarded.
    for (std::size_t i = 1; i < res.played.size(); ++i) {
        EXPECT_GT(res.played[i].seq, res.played[i - 1].seq);
        EXPECT_GE(res.played[i].playout_ms, res.played[i].arrival_ms);
    }
    EXPECT_EQ(res.played.size() + res.discarded.size(), tr.size());
}

TEST(Playout, SpikeDoesNotShrinkDepth) {
    JitterBufferConfig cfg;
    auto tr = cadence(300, 50.0);
    for (std::size_t i = 200; i < 205; ++i) {
        *tr[i].arrival_ms = *tr[199].arrival_ms + 75.0 + static_cast<double>(i - 200);
    }
    const auto res = sim::jitter_buffer_playout(cfg, tr);
    EXPECT_GE(res.depth_ms[205], res.depth_ms[199]);
}

TEST(Playout, RejectsUnorderedArrivals) {
    auto tr = cadence(10, 50.0);
    std::swap(tr[3], tr[4]);
    EXPECT_THROW(sim::jitter_buffer_playout(JitterBufferConfig{}, tr), std::invalid_argument);
}

TEST(Playout, LostPacketsSkipped) {
    auto tr = cadence(50, 50.0);
    tr[10].arrival_ms.reset();
    const auto res = sim::jitter_buffer_playout(JitterBufferConfig{}, tr);
    EXPECT_EQ(res.played.size(), 49u);
    EXPECT_TRUE(res.discarded.empty());
}
