// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_DL_SCHEDULER_HPP
#define VOLTE_DL_SCHEDULER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "volte/common.hpp"
#include "volte/radio_channel.hpp"

namespace volte::sched {

/// Transport block size lookup tbs(mcs, prb).
///
/// The built-in table is linear in PRB count with a per-MCS bits-per-PRB
/// efficiency shaped after the 36.213 tables; MCS 10 on 3 PRBs gives the
/// 504-bit bundling limit. A CSV table (mcs,prb,tbs_bits) overrides it.
class TbsTable {
public:
    static constexpr int kMaxMcs = 28;
    static constexpr int kMaxPrb = 100;

    TbsTable() {
        for (int m = 0; m <= kMaxMcs; ++m) {
            for (int p = 1; p <= kMaxPrb; ++p) {
                const int bits = (p * kBitsPerPrb[static_cast<std::size_t>(m)]) / 8 * 8;
                set(m, p, std::max(bits, 16));
            }
        }
    }

    int tbs(int mcs, int prb) const {
        check(mcs, prb);
        return table_[index(mcs, prb)];
    }

    /// Smallest PRB count whose TBS covers `bits`, or nullopt if even
    /// max_prb falls short.
    std::optional<int> min_prb_for(int mcs, std::int64_t bits, int max_prb = kMaxPrb) const {
        max_prb = std::clamp(max_prb, 1, kMaxPrb);
        for (int p = 1; p <= max_prb; ++p) {
            if (tbs(mcs, p) >= bits) {
                return p;
            }
        }
        return std::nullopt;
    }

    /// Replaces entries from CSV rows `mcs,prb,tbs_bits`. The resulting
    /// table must stay nondecreasing in both MCS and PRB.
    static TbsTable from_csv(std::istream& is) {
        TbsTable t;
        std::string line;
        std::getline(is, line);
        if (line != "mcs,prb,tbs_bits") {
            throw InputError("tbs table: header must be 'mcs,prb,tbs_bits' (row 1)");
        }
        std::size_t row = 1;
        while (std::getline(is, line)) {
            ++row;
            if (line.empty()) {
                continue;
            }
            std::istringstream ls(line);
            int m = 0, p = 0, b = 0;
            char c1 = 0, c2 = 0;
            if (!(ls >> m >> c1 >> p >> c2 >> b) || c1 != ',' || c2 != ',' || m < 0 || m > kMaxMcs ||
                p < 1 || p > kMaxPrb || b <= 0) {
                throw InputError("tbs table: bad row " + std::to_string(row));
            }
            t.set(m, p, b);
        }
        for (int m = 0; m <= kMaxMcs; ++m) {
            for (int p = 1; p <= kMaxPrb; ++p) {
                if ((p > 1 && t.tbs(m, p) < t.tbs(m, p - 1)) || (m > 0 && t.tbs(m, p) < t.tbs(m - 1, p))) {
                    throw InputError("tbs table: not monotone at mcs " + std::to_string(m) + ", prb " +
                                     std::to_string(p));
                }
            }
        }
        return t;
    }

    static TbsTable load_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw InputError("tbs table not found: " + path);
        }
        return from_csv(in);
    }

private:
    static constexpr std::array<int, kMaxMcs + 1> kBitsPerPrb = {
        26,  34,  42,  56,  70,  87,  103, 122, 138, 154, 168, 182, 200, 222, 248,
        266, 284, 300, 312, 350, 376, 400, 440, 478, 516, 554, 599, 620, 712};

    static std::size_t index(int mcs, int prb) {
        return static_cast<std::size_t>(mcs) * kMaxPrb + static_cast<std::size_t>(prb - 1);
    }
    static void check(int mcs, int prb) {
        if (mcs < 0 || mcs > kMaxMcs) {
            throw std::out_of_range("mcs out of range: " + std::to_string(mcs));
        }
        if (prb < 1 || prb > kMaxPrb) {
            throw std::out_of_range("prb out of range: " + std::to_string(prb));
        }
    }
    void set(int mcs, int prb, int bits) { table_[index(mcs, prb)] = bits; }

    std::array<int, (kMaxMcs + 1) * kMaxPrb> table_{};
};

struct ScheduleGrant {
    std::int64_t tti_index = 0;
    int tbs_bits = 0;
    int mcs = 0;
    int prb_count = 0;
    bool carries_voice = false;
    bool carries_data = false;
    int mimo_rank = 1;
    int padding_bits = 0;
    std::int64_t voice_bits = 0;
    std::int64_t data_bits = 0;
};

struct SpsConfig {
    int period_subframes = 20;
    int release_empty_count = 4;

    static bool allowed_period(int p) {
        static constexpr std::array<int, 10> kAllowed = {10, 20, 32, 40, 64, 80, 128, 160, 320, 640};
        return std::find(kAllowed.begin(), kAllowed.end(), p) != kAllowed.end();
    }

    void validate() const {
        if (!allowed_period(period_subframes)) {
            throw std::invalid_argument("SPS period must be one of 10,20,32,40,64,80,128,160,320,640");
        }
        if (release_empty_count < 1) {
            throw std::invalid_argument("SPS release_empty_count must be >= 1");
        }
    }
};

struct DrxConfig {
    double long_cycle_ms = 40.0;
    double on_duration_ms = 10.0;

    void validate() const {
        if (!(long_cycle_ms > 0.0) || !(on_duration_ms > 0.0) || !(on_duration_ms < long_cycle_ms)) {
            throw std::invalid_argument("DRX needs 0 < on_duration < long_cycle");
        }
    }
};

struct SchedulerPolicy {
    bool multiplex_voice_data = false;
    bool allow_rank2_voice_split = false;
    /// Chance of a rank-2 codeword split when rank 2 is available.
    double rank2_probability = 0.1;
    double rank2_min_sinr_db = 15.0;
    /// QCI -> priority, lower value served first.
    std::map<int, int> qci_priority = {{1, 2}, {5, 1}, {9, 9}};
    double target_bler = 0.1;
    /// Upper bound on PRBs for a voice-only grant; larger PDUs are segmented.
    int max_voice_prb = 12;
    /// Non-multiplexing schedulers arbitrate whole TTIs between the voice
    /// and data bearers. With data backlogged, voice wins a TTI with
    /// probability (hol_delay_ms + 1) / window, so voice waits at most this long.
    double voice_tdm_window_ms = 80.0;
    std::optional<SpsConfig> sps;
    std::optional<DrxConfig> drx;

    void validate() const {
        if (!(target_bler > 0.0 && target_bler < 1.0)) {
            throw std::invalid_argument("target_bler must be in (0,1)");
        }
        if (max_voice_prb < 1 || max_voice_prb > TbsTable::kMaxPrb) {
            throw std::invalid_argument("max_voice_prb must be in [1,100]");
        }
        if (!(voice_tdm_window_ms >= 1.0)) {
            throw std::invalid_argument("voice_tdm_window_ms must be >= 1");
        }
        if (!(rank2_probability >= 0.0 && rank2_probability <= 1.0)) {
            throw std::invalid_argument("rank2_probability must be in [0,1]");
        }
        if (qci_priority.count(1) && qci_priority.count(9) && qci_priority.at(1) >= qci_priority.at(9)) {
            throw std::invalid_argument("QCI 1 must outrank QCI 9");
        }
        if (sps) {
            sps->validate();
        }
        if (drx) {
            drx->validate();
        }
    }
};

/// Resources a grant is built from.
struct GrantContext {
    const TbsTable& tbs;
    const radio::LinkModel& link;
    int total_prb = 100;
};

/// Link adaptation: highest MCS whose predicted BLER at the effective SINR
/// stays within target; MCS 0 when none does.
inline int select_mcs(double eff_sinr_db, double target_bler, const radio::LinkModel& link) {
    int best = 0;
    for (int m = 0; m <= link.max_mcs(); ++m) {
        if (radio::bler(eff_sinr_db, m, link) <= target_bler) {
            best = m;
        }
    }
    return std::min(best, TbsTable::kMaxMcs);
}

/// Builds the grant for one TTI from the bearer queues.
///
/// Voice (QCI 1) is always placed first. A non-multiplexing policy sends
/// voice alone whenever voice is queued; a multiplexing policy fills the
/// rest of the voice TB with data. Voice-only grants use the fewest PRBs
/// that cover the queue (capped at max_voice_prb), so padding stays below
/// one PRB step of the TBS table.
inline std::optional<ScheduleGrant> select_grant(std::int64_t voice_queue_bits,
                                                 std::int64_t data_queue_bits, double eff_sinr_db,
                                                 const SchedulerPolicy& policy, const GrantContext& ctx) {
    if (voice_queue_bits < 0 || data_queue_bits < 0) {
        throw std::invalid_argument("queue sizes must be >= 0");
    }
    if (voice_queue_bits == 0 && data_queue_bits == 0) {
        return std::nullopt;
    }
    ScheduleGrant g;
    g.mcs = select_mcs(eff_sinr_db, policy.target_bler, ctx.link);
    const int total_prb = std::clamp(ctx.total_prb, 1, TbsTable::kMaxPrb);

    const bool send_voice = voice_queue_bits > 0;
    const bool send_data = data_queue_bits > 0 && (!send_voice || policy.multiplex_voice_data);

    if (send_voice && !send_data) {
        const int cap = std::min(policy.max_voice_prb, total_prb);
        g.prb_count = ctx.tbs.min_prb_for(g.mcs, voice_queue_bits, cap).value_or(cap);
        g.tbs_bits = ctx.tbs.tbs(g.mcs, g.prb_count);
        g.voice_bits = std::min<std::int64_t>(voice_queue_bits, g.tbs_bits);
    } else {
        const std::int64_t want = voice_queue_bits + data_queue_bits;
        g.prb_count = ctx.tbs.min_prb_for(g.mcs, want, total_prb).value_or(total_prb);
        g.tbs_bits = ctx.tbs.tbs(g.mcs, g.prb_count);
        g.voice_bits = std::min<std::int64_t>(voice_queue_bits, g.tbs_bits);
        g.data_bits = std::min<std::int64_t>(data_queue_bits, g.tbs_bits - g.voice_bits);
    }
    g.carries_voice = g.voice_bits > 0;
    g.carries_data = g.data_bits > 0;
    g.padding_bits = static_cast<int>(g.tbs_bits - g.voice_bits - g.data_bits);
    return g;
}

/// Rank-2 transmission: a second codeword doubles the TB and the voice
/// PDU is split across both codewords.
inline void apply_rank2(ScheduleGrant& g, std::int64_t voice_queue_bits, std::int64_t data_queue_bits) {
    const std::int64_t cap = 2LL * g.tbs_bits;
    g.mimo_rank = 2;
    g.tbs_bits = static_cast<int>(cap);
    g.voice_bits = std::min<std::int64_t>(voice_queue_bits, cap);
    g.data_bits = g.carries_data ? std::min<std::int64_t>(data_queue_bits, cap - g.voice_bits) : 0;
    g.carries_voice = g.voice_bits > 0;
    g.carries_data = g.data_bits > 0;
    g.padding_bits = static_cast<int>(cap - g.voice_bits - g.data_bits);
}

// ---- outer-loop link adaptation ----

struct OllaState {
    double offset_db = 0.0;
    double step_down_db = 0.5;
    double floor_db = -10.0;
    double cap_db = 10.0;
};

/// One OLLA update. NACK steps down by step_down; ACK steps up by
/// step_down * target / (1 - target), so the NACK fraction settles at target.
inline OllaState olla_step(OllaState s, bool crc_ok, double target_bler) {
    if (!(target_bler > 0.0 && target_bler < 1.0)) {
        throw std::invalid_argument("target_bler must be in (0,1)");
    }
    if (crc_ok) {
        s.offset_db += s.step_down_db * target_bler / (1.0 - target_bler);
    } else {
        s.offset_db -= s.step_down_db;
    }
    s.offset_db = std::clamp(s.offset_db, s.floor_db, s.cap_db);
    return s;
}

// ---- semi-persistent scheduling ----

enum class SpsStatus { ACTIVE, RELEASED };

struct SpsState {
    SpsStatus status = SpsStatus::ACTIVE;
    std::int64_t activation_tti = 0;
    int empty_run = 0;
    std::int64_t occasions = 0;
};

inline bool sps_is_occasion(const SpsState& s, const SpsConfig& cfg, std::int64_t tti_index) {
    return s.status == SpsStatus::ACTIVE && tti_index >= s.activation_tti &&
           (tti_index - s.activation_tti) % cfg.period_subframes == 0;
}

/// Registers one SPS occasion. The configured grant recurs with no PDCCH
/// message; after release_empty_count consecutive empty occasions it is released.
inline SpsStatus sps_update(SpsState& s, const SpsConfig& cfg, std::int64_t /*tti_index*/,
                            bool had_payload) {
    if (s.status == SpsStatus::RELEASED) {
        return s.status;
    }
    ++s.occasions;
    s.empty_run = had_payload ? 0 : s.empty_run + 1;
    if (s.empty_run >= cfg.release_empty_count) {
        s.status = SpsStatus::RELEASED;
    }
    return s.status;
}

// ---- RLC segmentation ----

struct RlcSegmentation {
    std::int64_t segments = 0;
    std::int64_t overhead_bits = 0;
};

inline RlcSegmentation rlc_segment(std::int64_t pdu_bits, std::int64_t grant_payload_bits,
                                   std::int64_t overhead_bits_per_extra_segment = 0) {
    if (grant_payload_bits <= 0) {
        throw std::invalid_argument("grant_payload_bits must be > 0");
    }
    if (pdu_bits < 0) {
        throw std::invalid_argument("pdu_bits must be >= 0");
    }
    RlcSegmentation r;
    r.segments = std::max<std::int64_t>(1, (pdu_bits + grant_payload_bits - 1) / grant_payload_bits);
    r.overhead_bits = (r.segments - 1) * overhead_bits_per_extra_segment;
    return r;
}

// ---- connected-mode DRX ----

/// Earliest time the UE is awake at or after arrival_ms. On-durations open
/// at multiples of the long cycle.
inline double drx_gate(double arrival_ms, const DrxConfig& drx) {
    const double cycles = std::floor(arrival_ms / drx.long_cycle_ms);
    const double start = cycles * drx.long_cycle_ms;
    if (arrival_ms < start + drx.on_duration_ms) {
        return arrival_ms;
    }
    return start + drx.long_cycle_ms;
}

}  // namespace volte::sched

#endif  // VOLTE_DL_SCHEDULER_HPP
