// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_ROHC_ENGINE_HPP
#define VOLTE_ROHC_ENGINE_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "volte/common.hpp"

namespace volte::rohc {

enum class Mode { U, O, R };
enum class State { IR, FO, SO };

/// Kind of compressed packet on the wire. An FO packet may be sent from
/// the SO state when the dynamic header part changes irregularly.
enum class PacketKind { IR, FO, SO };

enum class Outcome { OK, FAIL };

inline std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::U: return "U";
        case Mode::O: return "O";
        case Mode::R: return "R";
    }
    return "?";
}

inline std::string_view to_string(PacketKind k) {
    switch (k) {
        case PacketKind::IR: return "IR";
        case PacketKind::FO: return "FO";
        case PacketKind::SO: return "SO";
    }
    return "?";
}

/// Per-state compressed header sizes. IPv6 is modelled by full_header_bytes = 60.
struct HeaderSizeModel {
    double full_header_bytes = 40.0;
    double ir_overhead_bytes = 3.0;
    double fo_header_bytes = 12.0;
    double so_header_bytes = 1.0;

    void validate() const {
        if (!(so_header_bytes >= 1.0)) {
            throw std::invalid_argument("so_header_bytes must be >= 1");
        }
        if (!(so_header_bytes <= fo_header_bytes)) {
            throw std::invalid_argument("so_header_bytes must not exceed fo_header_bytes");
        }
        if (!(fo_header_bytes <= full_header_bytes + ir_overhead_bytes)) {
            throw std::invalid_argument("fo_header_bytes must not exceed the IR header size");
        }
        if (full_header_bytes < 0 || ir_overhead_bytes < 0) {
            throw std::invalid_argument("header sizes must be >= 0");
        }
    }

    double bytes_for(PacketKind k) const {
        switch (k) {
            case PacketKind::IR: return full_header_bytes + ir_overhead_bytes;
            case PacketKind::FO: return fo_header_bytes;
            case PacketKind::SO: return so_header_bytes;
        }
        return full_header_bytes;
    }
};

struct RohcConfig {
    Mode mode = Mode::O;
    HeaderSizeModel sizes;
    /// U-mode: sends in a state before moving up one level.
    int optimistic_repeats = 3;
    /// U-mode: periodic fall-back to IR, in packets.
    int ir_refresh_period = 100;
    /// Chance that an SO-state packet carries an irregular dynamic change
    /// and must be sent as FO.
    double dynamic_change_prob = 0.25;
    double feedback_delay_ms = 20.0;
    std::uint64_t seed = 0;

    void validate() const {
        sizes.validate();
        if (optimistic_repeats < 1) {
            throw std::invalid_argument("optimistic_repeats must be >= 1");
        }
        if (ir_refresh_period < 1) {
            throw std::invalid_argument("ir_refresh_period must be >= 1");
        }
        if (!(dynamic_change_prob >= 0.0 && dynamic_change_prob <= 1.0)) {
            throw std::invalid_argument("dynamic_change_prob must be in [0,1]");
        }
        if (!(feedback_delay_ms >= 0.0)) {
            throw std::invalid_argument("feedback_delay_ms must be >= 0");
        }
    }
};

struct Feedback {
    enum class Type { Ack, Nack };
    Type type;
    PacketKind acked_kind = PacketKind::IR;
};

/// Compressor side of a context.
struct RohcContext {
    Mode mode = Mode::O;
    State state = State::IR;
    std::uint32_t cid = 0;
    /// Sends in the current state (U-mode optimistic counter).
    int optimistic_count = 0;
    /// Context-updating packets sent and not yet acknowledged.
    int pending_acks = 0;
    /// Set from the most recent decompressor outcome seen via feedback.
    bool last_decomp_ok = true;

    std::int64_t packets_since_ir = 0;
    std::int64_t acks_received = 0;
    std::int64_t nacks_received = 0;
    std::int64_t feedback_consumed = 0;
};

struct Compressed {
    double header_bytes;
    PacketKind kind;
};

/// Emits one packet from the current context and advances the state machine.
inline Compressed compress(RohcContext& ctx, const RohcConfig& cfg, std::int64_t pkt_index) {
    if (ctx.mode == Mode::U && ctx.state != State::IR &&
        ctx.packets_since_ir >= cfg.ir_refresh_period) {
        ctx.state = State::IR;
        ctx.optimistic_count = 0;
    }

    PacketKind kind = PacketKind::IR;
    switch (ctx.state) {
        case State::IR: kind = PacketKind::IR; break;
        case State::FO: kind = PacketKind::FO; break;
        case State::SO: {
            const rng::Keyed draw(cfg.seed, "rohc-dynamic");
            kind = draw.uniform(ctx.cid, pkt_index) < cfg.dynamic_change_prob ? PacketKind::FO
                                                                             : PacketKind::SO;
            break;
        }
    }

    ctx.packets_since_ir = (kind == PacketKind::IR) ? 0 : ctx.packets_since_ir + 1;
    ++ctx.optimistic_count;
    if (ctx.mode != Mode::U && kind != PacketKind::SO) {
        ++ctx.pending_acks;
    }
    if (ctx.mode == Mode::U && ctx.optimistic_count >= cfg.optimistic_repeats) {
        if (ctx.state == State::IR) {
            ctx.state = State::FO;
            ctx.optimistic_count = 0;
        } else if (ctx.state == State::FO) {
            ctx.state = State::SO;
            ctx.optimistic_count = 0;
        }
    }
    return {cfg.sizes.bytes_for(kind), kind};
}

/// Applies decompressor feedback. U-mode has no feedback channel and drops it.
inline void on_feedback(RohcContext& ctx, const Feedback& fb) {
    if (ctx.mode == Mode::U) {
        return;
    }
    ++ctx.feedback_consumed;
    if (fb.type == Feedback::Type::Nack) {
        ++ctx.nacks_received;
        ctx.last_decomp_ok = false;
        ctx.state = State::IR;
        ctx.optimistic_count = 0;
        ctx.pending_acks = 0;
        return;
    }
    ++ctx.acks_received;
    ctx.last_decomp_ok = true;
    if (ctx.pending_acks > 0) {
        --ctx.pending_acks;
    }
    if (ctx.state == State::IR && fb.acked_kind == PacketKind::IR) {
        ctx.state = State::FO;
        ctx.optimistic_count = 0;
    } else if (ctx.state == State::FO && fb.acked_kind == PacketKind::FO) {
        ctx.state = State::SO;
        ctx.optimistic_count = 0;
    }
}

/// Decompressor side of a context.
struct DecompressorContext {
    Mode mode = Mode::O;
    bool static_ok = false;
    bool dynamic_ok = false;
    bool last_decomp_ok = true;
    std::int64_t failures = 0;
};

struct DecompressResult {
    Outcome outcome;
    std::optional<Feedback> feedback;
};

/// Decompresses one packet (or registers its loss on the link).
///
/// Losing a context-updating packet (IR or FO) damages the dynamic context
/// in U and O modes; every later FO/SO packet then fails until an IR gets
/// through. R-mode compressors reference only acknowledged context, so a
/// lost update does not damage it.
inline DecompressResult decompress(DecompressorContext& ctx, PacketKind kind, bool link_delivered) {
    const bool feedback_mode = ctx.mode != Mode::U;
    if (!link_delivered) {
        if (kind != PacketKind::SO && ctx.mode != Mode::R) {
            ctx.dynamic_ok = false;
        }
        return {Outcome::FAIL, std::nullopt};
    }
    if (kind == PacketKind::IR) {
        ctx.static_ok = true;
        ctx.dynamic_ok = true;
        ctx.last_decomp_ok = true;
        if (feedback_mode) {
            return {Outcome::OK, Feedback{Feedback::Type::Ack, PacketKind::IR}};
        }
        return {Outcome::OK, std::nullopt};
    }
    if (ctx.static_ok && ctx.dynamic_ok) {
        ctx.last_decomp_ok = true;
        if (feedback_mode && kind == PacketKind::FO) {
            return {Outcome::OK, Feedback{Feedback::Type::Ack, PacketKind::FO}};
        }
        return {Outcome::OK, std::nullopt};
    }
    ctx.last_decomp_ok = false;
    ++ctx.failures;
    if (feedback_mode) {
        return {Outcome::FAIL, Feedback{Feedback::Type::Nack, kind}};
    }
    return {Outcome::FAIL, std::nullopt};
}

/// Compressor and decompressor joined by a feedback channel with a fixed
/// delay. Calls must be made in nondecreasing time order.
class RohcLink {
public:
    explicit RohcLink(const RohcConfig& cfg, std::uint32_t cid = 0) : cfg_(cfg) {
        cfg_.validate();
        comp_.mode = cfg_.mode;
        comp_.cid = cid;
        decomp_.mode = cfg_.mode;
    }

    Compressed compress(Micros now, std::int64_t pkt_index) {
        deliver_feedback(now);
        return volte::rohc::compress(comp_, cfg_, pkt_index);
    }

    Outcome decompress(Micros now, PacketKind kind, bool delivered) {
        auto res = volte::rohc::decompress(decomp_, kind, delivered);
        if (res.feedback) {
            in_flight_.push_back({now + ms_to_us(cfg_.feedback_delay_ms), *res.feedback});
        }
        return res.outcome;
    }

    const RohcContext& compressor() const { return comp_; }
    const DecompressorContext& decompressor() const { return decomp_; }
    const RohcConfig& config() const { return cfg_; }

private:
    struct Pending {
        Micros due;
        Feedback fb;
    };

    void deliver_feedback(Micros now) {
        while (!in_flight_.empty() && in_flight_.front().due <= now) {
            on_feedback(comp_, in_flight_.front().fb);
            in_flight_.pop_front();
        }
    }

    RohcConfig cfg_;
    RohcContext comp_;
    DecompressorContext decomp_;
    std::deque<Pending> in_flight_;
};

/// Inputs to the air-interface rate arithmetic.
struct RateInputs {
    double payload_bytes = 33.0;
    double header_bytes = 40.0;
    double overhead_bytes = 8.0;
    double interval_ms = 20.0;
};

/// Physical channel rate in kbps for one packet of (P + H + O) bytes every I ms.
inline double required_channel_rate(const RateInputs& r) {
    if (!(r.interval_ms > 0.0)) {
        throw std::invalid_argument("interval_ms must be > 0");
    }
    if (r.payload_bytes < 0 || r.header_bytes < 0 || r.overhead_bytes < 0) {
        throw std::invalid_argument("rate inputs must be >= 0");
    }
    return (r.payload_bytes + r.header_bytes + r.overhead_bytes) * 8.0 / r.interval_ms;
}

/// Header compression efficiency in percent.
inline double compression_efficiency(double original_bytes, double compressed_bytes) {
    if (!(original_bytes > 0.0)) {
        throw std::invalid_argument("original_bytes must be > 0");
    }
    return 100.0 * (1.0 - compressed_bytes / original_bytes);
}

}  // namespace volte::rohc

#endif  // VOLTE_ROHC_ENGINE_HPP
