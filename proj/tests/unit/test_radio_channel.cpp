// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "volte/dl_scheduler.hpp"
#include "volte/radio_channel.hpp"

using namespace volte;
using namespace volte::radio;

namespace {

struct FixedGrant {
    std::int64_t tti_index;
    int mcs;
};

}  // namespace

TEST(DriveTrace, FlatNoShadowIsConstant) {
    RouteParams p;
    p.flat = true;
    p.shadow_sigma_db = 0.0;
    p.duration_ms = 10000.0;
    const auto tr = synth_drive_trace(p, 1);
    ASSERT_GT(tr.size(), 50u);
    for (const auto& s : tr.samples()) {
        EXPECT_DOUBLE_EQ(s.rsrp_dbm, p.rsrp_mean_dbm);
    }
}

TEST(DriveTrace, DefaultMeanRsrpNearCalibration) {
    RouteParams p;
    double sum = 0;
    std::size_t n = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto tr = synth_drive_trace(p, seed);
        for (const auto& s : tr.samples()) {
            sum += s.rsrp_dbm;
            ++n;
        }
    }
    EXPECT_NEAR(sum / static_cast<double>(n), -83.8, 1.0);
}

TEST(DriveTrace, SameSeedIdentical) {
    RouteParams p;
    p.duration_ms = 30000.0;
    std::ostringstream a;
    std::ostringstream b;
    write_radio_csv(a, synth_drive_trace(p, 9));
    write_radio_csv(b, synth_drive_trace(p, 9));
    EXPECT_EQ(a.str(), b.str());
    std::ostringstream c;
    write_radio_csv(c, synth_drive_trace(p, 10));
    EXPECT_NE(a.str(), c.str());
}

TEST(DriveTrace, CsvRoundTrip) {
    RouteParams p;
    p.duration_ms = 5000.0;
    const auto tr = synth_drive_trace(p, 4);
    std::stringstream ss;
    write_radio_csv(ss, tr);
    const auto back = read_radio_csv(ss);
    ASSERT_EQ(back.size(), tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        EXPECT_EQ(back.samples()[i].sinr_db, tr.samples()[i].sinr_db);
    }
}

TEST(DriveTrace, RejectsNonIncreasingTime) {
    std::istringstream in("t_ms,rsrp_dbm,rsrq_db,sinr_db\n0,-80,-10,10\n0,-80,-10,10\n");
    EXPECT_THROW(read_radio_csv(in), InputError);
}

TEST(DriveTrace, LookupHoldsLatestSample) {
    RadioTrace tr({{0, -80, -10, 5}, {100, -90, -11, 3}});
    EXPECT_DOUBLE_EQ(tr.at(99).rsrp_dbm, -80);
    EXPECT_DOUBLE_EQ(tr.at(100).rsrp_dbm, -90);
    EXPECT_DOUBLE_EQ(tr.nearest(60).rsrp_dbm, -90);
    EXPECT_DOUBLE_EQ(tr.nearest(40).rsrp_dbm, -80);
}

TEST(Bler, MidpointAndAsymptotes) {
    const auto m = LinkModel::standard();
    for (int mcs = 0; mcs <= m.max_mcs(); ++mcs) {
        EXPECT_DOUBLE_EQ(bler(m.sinr50_db[static_cast<std::size_t>(mcs)], mcs, m), 0.5);
    }
    EXPECT_LT(bler(200.0, 5, m), 1e-12);
    EXPECT_GT(bler(-200.0, 5, m), 1.0 - 1e-12);
    EXPECT_LT(bler(10.0, 5, m), bler(10.0, 20, m));
    EXPECT_THROW(bler(0.0, 29, m), std::out_of_range);
}

TEST(Bler, MonotoneInSinr) {
    const auto m = LinkModel::standard();
    for (int mcs : {0, 7, 15, 28}) {
        double prev = 1.0;
        for (double s = -20; s <= 40; s += 0.25) {
            const double b = bler(s, mcs, m);
            EXPECT_LE(b, prev);
            prev = b;
        }
    }
}

TEST(Harq, CleanChannelOneAttempt) {
    const auto m = LinkModel::standard();
    const auto r = harq_transmit(FixedGrant{0, 5}, 100.0, m, 1);
    EXPECT_TRUE(r.delivered);
    EXPECT_EQ(r.attempts, 1);
    EXPECT_DOUBLE_EQ(r.airtime_ms, 1.0);
}

TEST(Harq, HopelessChannelExhausts) {
    auto m = LinkModel::standard();
    m.harq_combining_gain_db = 0.0;
    const auto r = harq_transmit(FixedGrant{0, 28}, -100.0, m, 1);
    EXPECT_FALSE(r.delivered);
    EXPECT_EQ(r.attempts, m.max_harq_tx);
    EXPECT_DOUBLE_EQ(r.airtime_ms, 1.0 + 3 * 8.0);
}

TEST(Harq, ResidualLossMatchesClosedForm) {
    auto m = LinkModel::standard();
    m.harq_combining_gain_db = 0.0;
    // SINR where the per-attempt BLER is exactly 0.1.
    const int mcs = 10;
    const double sinr = m.sinr50_db[mcs] + std::log(9.0) / m.slope_per_db;
    ASSERT_NEAR(bler(sinr, mcs, m), 0.1, 1e-12);
    const int n = 2'000'000;
    int lost = 0;
    for (int i = 0; i < n; ++i) {
        lost += harq_transmit(FixedGrant{i, mcs}, sinr, m, 77).delivered ? 0 : 1;
    }
    const double p = 1e-4;
    const double sigma = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(static_cast<double>(lost) / n, p, 4 * sigma);
}

TEST(Harq, FirstAttemptErrorMatchesBler) {
    const auto m = LinkModel::standard();
    const int n = 200'000;
    for (double sinr : {2.0, 6.0, 9.0}) {
        const int mcs = 12;
        const double p = bler(sinr, mcs, m);
        int fails = 0;
        for (int i = 0; i < n; ++i) {
            fails += harq_transmit(FixedGrant{i, mcs}, sinr, m, 5).attempts > 1 ? 1 : 0;
        }
        const double sigma = std::sqrt(p * (1 - p) / n);
        EXPECT_NEAR(static_cast<double>(fails) / n, p, 3 * sigma + 1e-12) << sinr;
    }
}

TEST(Harq, AirtimeGrowsWithAttempts) {
    const auto m = LinkModel::standard();
    for (int i = 0; i < 5000; ++i) {
        const auto r = harq_transmit(FixedGrant{i, 15}, 6.0, m, 3);
        EXPECT_LE(r.attempts, m.max_harq_tx);
        EXPECT_DOUBLE_EQ(r.airtime_ms, 1.0 + (r.attempts - 1) * m.harq_rtt_ms);
    }
}

TEST(Rsrq, FallsWithLoad) {
    EXPECT_GT(rsrq_from(10.0, 0.2), rsrq_from(10.0, 0.9));
    EXPECT_GT(rsrq_from(15.0, 0.5), rsrq_from(0.0, 0.5));
}
