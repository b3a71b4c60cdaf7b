// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_UL_TTI_BUNDLING_HPP
#define VOLTE_UL_TTI_BUNDLING_HPP

#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace volte::bundling {

struct BundlingConfig {
    int bundle_size = 4;
    int max_tbs_bits = 504;
    int max_prb = 3;
    int max_mcs = 10;
    /// Bundling switches on below trigger and off above release.
    double trigger_sinr_db = -2.0;
    double release_sinr_db = 1.0;
    double bundle_harq_rtt_ms = 16.0;
    /// Effective SINR bonus while bundling is on.
    double coverage_gain_db = 4.0;
    int segment_overhead_bits = 16;

    void validate() const {
        if (bundle_size < 1) {
            throw std::invalid_argument("bundle_size must be >= 1");
        }
        if (max_tbs_bits <= 0 || max_prb < 1 || max_mcs < 0) {
            throw std::invalid_argument("bundling grant limits must be positive");
        }
        if (!(release_sinr_db > trigger_sinr_db)) {
            throw std::invalid_argument("release_sinr_db must exceed trigger_sinr_db");
        }
        if (!(bundle_harq_rtt_ms > 0.0)) {
            throw std::invalid_argument("bundle_harq_rtt_ms must be > 0");
        }
    }
};

/// Hysteresis switch on measured uplink SINR. prb_usage above 1.0 (the UE
/// would need more PRBs than a bundled grant allows at its current MCS)
/// also turns bundling on when SINR sits inside the hysteresis band.
inline bool should_bundle(double sinr_db, double prb_usage, const BundlingConfig& cfg, bool currently_on) {
    if (sinr_db < cfg.trigger_sinr_db) {
        return true;
    }
    if (sinr_db > cfg.release_sinr_db) {
        return false;
    }
    return currently_on || prb_usage > 1.0;
}

inline std::int64_t bundles_needed(std::int64_t pdu_bits, const BundlingConfig& cfg) {
    if (pdu_bits <= 0) {
        throw std::invalid_argument("pdu_bits must be > 0");
    }
    return (pdu_bits + cfg.max_tbs_bits - 1) / cfg.max_tbs_bits;
}

/// Bundles go out back to back, each spanning bundle_size 1 ms TTIs;
/// every HARQ retransmission of a bundle costs one bundle RTT.
inline double bundle_delay_ms(std::int64_t bundle_count, int harq_retx, const BundlingConfig& cfg) {
    if (bundle_count < 1) {
        throw std::invalid_argument("bundle_count must be >= 1");
    }
    if (harq_retx < 0) {
        throw std::invalid_argument("harq_retx must be >= 0");
    }
    return static_cast<double>(bundle_count * cfg.bundle_size) + harq_retx * cfg.bundle_harq_rtt_ms;
}

enum class Violation { MCS, PRB };

inline std::string_view to_string(Violation v) {
    return v == Violation::MCS ? "MCS" : "PRB";
}

/// Bundled grants are limited to QPSK (MCS <= max_mcs) on at most max_prb PRBs.
/// Empty result means the grant is valid.
inline std::vector<Violation> validate_bundle_grant(int mcs, int prb, const BundlingConfig& cfg) {
    std::vector<Violation> v;
    if (mcs > cfg.max_mcs) {
        v.push_back(Violation::MCS);
    }
    if (prb > cfg.max_prb) {
        v.push_back(Violation::PRB);
    }
    return v;
}

/// Uplink air delay for one RTP packet at the cell edge with no HARQ
/// retransmissions.
inline double edge_packet_delay_ms(std::int64_t pdu_bits, const BundlingConfig& cfg) {
    return bundle_delay_ms(bundles_needed(pdu_bits, cfg), 0, cfg);
}

}  // namespace volte::bundling

#endif  // VOLTE_UL_TTI_BUNDLING_HPP
