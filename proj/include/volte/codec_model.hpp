// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_CODEC_MODEL_HPP
#define VOLTE_CODEC_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "volte/common.hpp"

namespace volte::codec {

/// AMR mode descriptor. Bit-level fields feed the RTP packet size budget;
/// amr_payload_bytes is the octet-aligned frame actually carried on air.
struct CodecConfig {
    double codec_rate_kbps = 12.65;
    double frame_interval_ms = 20.0;
    int amr_header_bits = 11;
    int rtp_header_bits = 96;
    int proto_header_bits = 64;
    int amr_payload_bytes = 33;

    void validate() const {
        if (!(codec_rate_kbps >= 0.0)) {
            throw std::invalid_argument("codec_rate_kbps must be >= 0");
        }
        if (!(frame_interval_ms > 0.0)) {
            throw std::invalid_argument("frame_interval_ms must be > 0");
        }
        if (amr_header_bits < 0 || rtp_header_bits < 0 || proto_header_bits < 0 ||
            amr_payload_bytes < 0) {
            throw std::invalid_argument("codec header and payload sizes must be >= 0");
        }
    }

    static CodecConfig amr_wb_12_65() { return {}; }

    static CodecConfig amr_wb_23_85() {
        CodecConfig c;
        c.codec_rate_kbps = 23.85;
        c.amr_payload_bytes = 61;
        return c;
    }
};

/// Total RTP packet size for one voice frame: payload bits plus AMR, RTP
/// and transport header bits, rounded up to a whole bit.
inline std::int64_t rtp_total_packet_bits(const CodecConfig& cfg) {
    cfg.validate();
    const double payload = cfg.codec_rate_kbps * cfg.frame_interval_ms;
    const double total =
        payload + cfg.amr_header_bits + cfg.rtp_header_bits + cfg.proto_header_bits;
    // kbps * ms is exact in decimal; absorb binary representation error before ceil.
    return static_cast<std::int64_t>(std::ceil(total - 1e-9));
}

struct RtpRecord {
    std::uint32_t stream_id = 1;
    std::int64_t seq = 0;
    double media_ts_ms = 0.0;
    double departure_ms = 0.0;
    std::optional<double> arrival_ms;
    int payload_bytes = 0;
    bool talkspurt_start = false;

    bool received() const { return arrival_ms.has_value(); }
};

struct ActivityModel {
    enum class Kind { Continuous, OnOff };
    Kind kind = Kind::Continuous;
    double mean_talkspurt_ms = 3000.0;
    double mean_silence_ms = 1500.0;

    void validate() const {
        if (kind == Kind::OnOff && !(mean_talkspurt_ms > 0.0 && mean_silence_ms > 0.0)) {
            throw std::invalid_argument("on/off activity requires positive talkspurt and silence means");
        }
    }
};

/// Half-open silence interval [start_ms, end_ms).
struct Silence {
    double start_ms;
    double end_ms;
};

/// Expands an activity model into explicit silence intervals over [0, duration).
/// Talkspurt and silence durations are exponential; the call opens talking.
inline std::vector<Silence> activity_schedule(const ActivityModel& activity, double duration_ms,
                                              std::uint64_t seed) {
    activity.validate();
    std::vector<Silence> out;
    if (activity.kind == ActivityModel::Kind::Continuous) {
        return out;
    }
    rng::Stream draw(seed, "activity");
    double t = draw.exponential(activity.mean_talkspurt_ms);
    while (t < duration_ms) {
        const double len = draw.exponential(activity.mean_silence_ms);
        out.push_back({t, t + len});
        t += len + draw.exponential(activity.mean_talkspurt_ms);
    }
    return out;
}

/// Departure-side RTP stream on a fixed frame grid. A slot at k * interval
/// emits a packet unless it falls inside a silence interval.
inline std::vector<RtpRecord> generate_stream(const CodecConfig& cfg, double duration_ms,
                                              const std::vector<Silence>& silences,
                                              std::uint32_t stream_id = 1) {
    cfg.validate();
    if (!(duration_ms > 0.0)) {
        throw std::invalid_argument("duration_ms must be > 0");
    }
    std::vector<RtpRecord> out;
    std::size_t si = 0;
    std::int64_t seq = 0;
    std::optional<double> prev_ts;
    for (std::int64_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * cfg.frame_interval_ms;
        if (t >= duration_ms) {
            break;
        }
        while (si < silences.size() && silences[si].end_ms <= t) {
            ++si;
        }
        if (si < silences.size() && silences[si].start_ms <= t) {
            continue;
        }
        RtpRecord r;
        r.stream_id = stream_id;
        r.seq = seq++;
        r.media_ts_ms = t;
        r.departure_ms = t;
        r.payload_bytes = cfg.amr_payload_bytes;
        r.talkspurt_start = !prev_ts || (t - *prev_ts) > 2.0 * cfg.frame_interval_ms;
        prev_ts = t;
        out.push_back(r);
    }
    return out;
}

inline std::vector<RtpRecord> generate_stream(const CodecConfig& cfg, double duration_ms,
                                              const ActivityModel& activity, std::uint64_t seed,
                                              std::uint32_t stream_id = 1) {
    if (!(duration_ms > 0.0)) {
        throw std::invalid_argument("duration_ms must be > 0");
    }
    return generate_stream(cfg, duration_ms, activity_schedule(activity, duration_ms, seed),
                           stream_id);
}

}  // namespace volte::codec

#endif  // VOLTE_CODEC_MODEL_HPP
