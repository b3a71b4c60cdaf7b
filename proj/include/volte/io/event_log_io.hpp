// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_IO_EVENT_LOG_IO_HPP
#define VOLTE_IO_EVENT_LOG_IO_HPP

#include <ostream>
#include <string>
#include <type_traits>
#include <variant>

#include <json.hpp>

#include "volte/event_log.hpp"
#include "volte/io/format.hpp"

namespace volte::io {

inline constexpr std::string_view kEventCsvHeader =
    "t_ms,type,dir,stream_id,seq,tti,tbs_bits,mcs,prb,rank,voice_bits,data_bits,padding_bits,"
    "harq_attempt,crc_ok,bundled,sps,start_ms,end_ms,resume_ms,media_ts_ms,departure_ms,arrival_ms,"
    "reason,playout_ms";

namespace detail {

struct EventRow {
    std::string f[25];
};

inline void fill_rec(EventRow& r, const codec::RtpRecord& rec) {
    r.f[3] = std::to_string(rec.stream_id);
    r.f[4] = std::to_string(rec.seq);
    r.f[20] = num(rec.media_ts_ms);
    r.f[21] = num(rec.departure_ms);
    if (rec.arrival_ms) {
        r.f[22] = num(*rec.arrival_ms);
    }
}

inline EventRow to_row(const sim::Event& e) {
    EventRow r;
    r.f[0] = num(e.t_ms());
    r.f[1] = std::string(sim::type_name(e.body));
    std::visit(
        [&](const auto& ev) {
            using T = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<T, sim::DepartureEvent> || std::is_same_v<T, sim::ArrivalEvent>) {
                fill_rec(r, ev.rec);
            } else if constexpr (std::is_same_v<T, sim::GrantEvent>) {
                const auto& g = ev.grant;
                r.f[2] = std::string(sim::to_string(ev.dir));
                r.f[5] = std::to_string(g.tti_index);
                r.f[6] = std::to_string(g.tbs_bits);
                r.f[7] = std::to_string(g.mcs);
                r.f[8] = std::to_string(g.prb_count);
                r.f[9] = std::to_string(g.mimo_rank);
                r.f[10] = std::to_string(g.voice_bits);
                r.f[11] = std::to_string(g.data_bits);
                r.f[12] = std::to_string(g.padding_bits);
                r.f[13] = std::to_string(ev.harq_attempt);
                r.f[14] = ev.crc_ok ? "1" : "0";
                r.f[15] = ev.bundled ? "1" : "0";
                r.f[16] = ev.sps ? "1" : "0";
            } else if constexpr (std::is_same_v<T, sim::HandoverEvent>) {
                r.f[17] = num(ev.start_ms);
                r.f[18] = num(ev.end_ms);
                r.f[19] = num(ev.resume_ms);
            } else if constexpr (std::is_same_v<T, sim::LossEvent>) {
                r.f[3] = std::to_string(ev.stream_id);
                r.f[4] = std::to_string(ev.seq);
                r.f[23] = std::string(sim::to_string(ev.reason));
            } else if constexpr (std::is_same_v<T, sim::JbDiscardEvent>) {
                r.f[3] = std::to_string(ev.stream_id);
                r.f[4] = std::to_string(ev.seq);
                r.f[23] = ev.late ? "late" : "out_of_order";
                r.f[24] = num(ev.playout_ms);
            } else if constexpr (std::is_same_v<T, sim::CallDropEvent>) {
                r.f[22] = num(ev.last_arrival_ms);
                r.f[23] = "rtp_timeout";
            }
        },
        e.body);
    return r;
}

inline nlohmann::ordered_json rec_json(const codec::RtpRecord& rec) {
    nlohmann::ordered_json j;
    j["stream_id"] = rec.stream_id;
    j["seq"] = rec.seq;
    j["media_ts_ms"] = rec.media_ts_ms;
    j["departure_ms"] = rec.departure_ms;
    j["arrival_ms"] = rec.arrival_ms ? nlohmann::ordered_json(*rec.arrival_ms) : nlohmann::ordered_json();
    j["payload_bytes"] = rec.payload_bytes;
    j["talkspurt_start"] = rec.talkspurt_start;
    return j;
}

}  // namespace detail

inline void write_event_log_csv(std::ostream& os, const sim::EventLog& log) {
    os << kEventCsvHeader << '\n';
    for (const auto& e : log.events) {
        const auto row = detail::to_row(e);
        for (std::size_t i = 0; i < 25; ++i) {
            if (i) {
                os << ',';
            }
            os << row.f[i];
        }
        os << '\n';
    }
}

inline nlohmann::ordered_json event_log_json(const sim::EventLog& log) {
    nlohmann::ordered_json root;
    root["scenario"] = log.scenario;
    root["seed"] = log.seed;
    root["duration_ms"] = log.duration_ms;
    auto& arr = root["events"] = nlohmann::ordered_json::array();
    for (const auto& e : log.events) {
        nlohmann::ordered_json j;
        j["t_ms"] = e.t_ms();
        j["type"] = sim::type_name(e.body);
        std::visit(
            [&](const auto& ev) {
                using T = std::decay_t<decltype(ev)>;
                if constexpr (std::is_same_v<T, sim::DepartureEvent> ||
                              std::is_same_v<T, sim::ArrivalEvent>) {
                    j["record"] = detail::rec_json(ev.rec);
                } else if constexpr (std::is_same_v<T, sim::GrantEvent>) {
                    const auto& g = ev.grant;
                    j["dir"] = sim::to_string(ev.dir);
                    j["tti"] = g.tti_index;
                    j["tbs_bits"] = g.tbs_bits;
                    j["mcs"] = g.mcs;
                    j["prb"] = g.prb_count;
                    j["rank"] = g.mimo_rank;
                    j["voice_bits"] = g.voice_bits;
                    j["data_bits"] = g.data_bits;
                    j["padding_bits"] = g.padding_bits;
                    j["harq_attempt"] = ev.harq_attempt;
                    j["crc_ok"] = ev.crc_ok;
                    j["bundled"] = ev.bundled;
                    j["sps"] = ev.sps;
                } else if constexpr (std::is_same_v<T, sim::HandoverEvent>) {
                    j["start_ms"] = ev.start_ms;
                    j["end_ms"] = ev.end_ms;
                    j["resume_ms"] = ev.resume_ms;
                } else if constexpr (std::is_same_v<T, sim::LossEvent>) {
                    j["stream_id"] = ev.stream_id;
                    j["seq"] = ev.seq;
                    j["reason"] = sim::to_string(ev.reason);
                } else if constexpr (std::is_same_v<T, sim::JbDiscardEvent>) {
                    j["stream_id"] = ev.stream_id;
                    j["seq"] = ev.seq;
                    j["reason"] = ev.late ? "late" : "out_of_order";
                    j["playout_ms"] = ev.playout_ms;
                } else if constexpr (std::is_same_v<T, sim::CallDropEvent>) {
                    j["last_arrival_ms"] = ev.last_arrival_ms;
                }
            },
            e.body);
        arr.push_back(std::move(j));
    }
    return root;
}

}  // namespace volte::io

#endif  // VOLTE_IO_EVENT_LOG_IO_HPP
