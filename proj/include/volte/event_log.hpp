// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_EVENT_LOG_HPP
#define VOLTE_EVENT_LOG_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "volte/codec_model.hpp"
#include "volte/common.hpp"
#include "volte/dl_scheduler.hpp"

namespace volte::sim {

enum class Direction { DL, UL };

inline std::string_view to_string(Direction d) {
    return d == Direction::DL ? "DL" : "UL";
}

enum class LossReason { HarqExhausted, RohcFail, PdcpDiscard, HandoverFlush };

inline std::string_view to_string(LossReason r) {
    switch (r) {
        case LossReason::HarqExhausted: return "harq_exhausted";
        case LossReason::RohcFail: return "rohc_fail";
        case LossReason::PdcpDiscard: return "pdcp_discard";
        case LossReason::HandoverFlush: return "handover_flush";
    }
    return "?";
}

struct DepartureEvent {
    codec::RtpRecord rec;
};

/// One transmission attempt in one TTI (first transmission or HARQ retx).
struct GrantEvent {
    Direction dir = Direction::DL;
    sched::ScheduleGrant grant;
    int harq_attempt = 1;
    bool crc_ok = true;
    bool bundled = false;
    bool sps = false;
};

struct HandoverEvent {
    double start_ms = 0.0;
    double end_ms = 0.0;
    /// First TTI the target cell schedules downlink again.
    double resume_ms = 0.0;
};

struct ArrivalEvent {
    codec::RtpRecord rec;
};

struct LossEvent {
    std::uint32_t stream_id = 0;
    std::int64_t seq = 0;
    LossReason reason = LossReason::HarqExhausted;
};

struct JbDiscardEvent {
    std::uint32_t stream_id = 0;
    std::int64_t seq = 0;
    bool late = true;
    double playout_ms = 0.0;
};

struct CallDropEvent {
    double last_arrival_ms = 0.0;
};

using EventBody = std::variant<DepartureEvent, GrantEvent, HandoverEvent, ArrivalEvent, LossEvent,
                               JbDiscardEvent, CallDropEvent>;

struct Event {
    Micros t_us = 0;
    EventBody body;

    double t_ms() const { return us_to_ms(t_us); }
};

inline std::string_view type_name(const EventBody& b) {
    static constexpr std::string_view kNames[] = {"departure", "grant",      "handover", "arrival",
                                                  "loss",      "jb_discard", "call_drop"};
    return kNames[b.index()];
}

/// Time-ordered record of one run.
struct EventLog {
    std::string scenario;
    std::uint64_t seed = 0;
    double duration_ms = 0.0;
    std::vector<Event> events;

    void add(Micros t, EventBody body) { events.push_back({t, std::move(body)}); }

    /// Stable by insertion order for equal timestamps.
    void finalize() {
        std::stable_sort(events.begin(), events.end(),
                         [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
    }

    template <typename T>
    std::vector<std::pair<Micros, const T*>> of() const {
        std::vector<std::pair<Micros, const T*>> out;
        for (const auto& e : events) {
            if (const auto* p = std::get_if<T>(&e.body)) {
                out.emplace_back(e.t_us, p);
            }
        }
        return out;
    }

    std::vector<HandoverEvent> handovers() const {
        std::vector<HandoverEvent> out;
        for (const auto& [t, h] : of<HandoverEvent>()) {
            out.push_back(*h);
        }
        return out;
    }

    std::vector<GrantEvent> grants(Direction dir) const {
        std::vector<GrantEvent> out;
        for (const auto& [t, g] : of<GrantEvent>()) {
            if (g->dir == dir) {
                out.push_back(*g);
            }
        }
        return out;
    }

    std::size_t call_drops() const { return of<CallDropEvent>().size(); }
};

}  // namespace volte::sim

#endif  // VOLTE_EVENT_LOG_HPP
