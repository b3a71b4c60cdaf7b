// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_SIM_PIPELINE_HPP
#define VOLTE_SIM_PIPELINE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "volte/codec_model.hpp"
#include "volte/common.hpp"
#include "volte/dl_scheduler.hpp"
#include "volte/event_log.hpp"
#include "volte/jitter_buffer.hpp"
#include "volte/radio_channel.hpp"
#include "volte/rohc_engine.hpp"
#include "volte/ul_tti_bundling.hpp"

namespace volte::sim {

inline constexpr std::uint32_t kDownlinkStream = 1;
inline constexpr std::uint32_t kUplinkStream = 2;

/// One-way core/transport delay: constant base plus an exponential tail.
struct DelayModel {
    double base_ms = 30.0;
    double tail_mean_ms = 1.5;
};

struct HandoverModel {
    std::optional<double> periodic_ms;
    double periodic_offset_ms = 0.0;
    /// Handover when serving RSRP drops through this level.
    std::optional<double> rsrp_crossing_dbm;
    double min_spacing_ms = 5000.0;
    std::vector<double> inject_at_ms;
    double interruption_mean_ms = 75.0;
    /// Interruption is drawn uniformly in mean +/- jitter.
    double interruption_jitter_ms = 0.0;
    double extra_sched_delay_ms = 40.0;
    /// The target cell has no CQI history: its link adaptation starts
    /// from this OLLA offset.
    double target_olla_offset_db = -6.0;
};

struct Outage {
    double start_ms = 0.0;
    double end_ms = 0.0;
};

struct RadioSource {
    /// CSV trace; empty means synthesize from route.
    std::string trace_path;
    radio::RouteParams route;
    std::vector<Outage> outages;
    double outage_sinr_db = -40.0;
};

/// Channel detail the scheduler does not see.
struct ChannelEffects {
    /// Per-TTI fast fading, AR(1) in dB.
    double fading_sigma_db = 2.0;
    double fading_rho = 0.7;
    /// Larger transport blocks decode worse: this many dB per doubling
    /// of TBS above size_ref_bits.
    double size_penalty_db = 0.75;
    double size_ref_bits = 256.0;
    /// Effective SINR loss per codeword on a rank-2 transmission.
    double rank2_penalty_db = 3.0;
};

struct UplinkConfig {
    bool enabled = true;
    double sinr_offset_db = -3.0;
    int max_prb = 6;
    /// SR/BSR to first grant.
    double sched_delay_ms = 5.0;
};

struct ScenarioConfig {
    std::string name = "custom";
    codec::CodecConfig codec;
    codec::ActivityModel activity;
    bool rohc_enabled = true;
    rohc::RohcConfig rohc;
    bool concurrent_data = false;
    sched::SchedulerPolicy policy;
    radio::LinkModel link = radio::LinkModel::standard();
    std::string tbs_table_path;
    int available_prb = 50;
    std::optional<bundling::BundlingConfig> bundling;
    RadioSource radio_source;
    ChannelEffects channel;
    HandoverModel handover;
    DelayModel core_delay;
    JitterBufferConfig jitter_buffer;
    UplinkConfig uplink;
    /// L2 (PDCP/RLC/MAC) bytes added to every voice packet.
    double l2_overhead_bytes = 8.0;
    int rlc_segment_overhead_bits = 16;
    /// eNB PDCP discard for voice PDUs that never reached the air.
    double pdcp_discard_ms = 150.0;
    double rtp_timeout_ms = 10000.0;
    double duration_ms = 60000.0;
    std::uint64_t seed = 1;

    /// Throws ConfigError naming the offending field.
    void validate() const {
        auto need = [](bool ok, const std::string& field, const std::string& what) {
            if (!ok) {
                throw ConfigError(field + ": " + what);
            }
        };
        auto wrap = [](const std::string& field, auto&& fn) {
            try {
                fn();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(field + ": " + e.what());
            }
        };
        need(duration_ms > 0.0, "duration_ms", "must be > 0");
        wrap("codec", [&] { codec.validate(); });
        wrap("activity", [&] { activity.validate(); });
        wrap("rohc", [&] { rohc.validate(); });
        wrap("policy", [&] { policy.validate(); });
        wrap("link", [&] { link.validate(); });
        if (bundling) {
            wrap("bundling", [&] { bundling->validate(); });
        }
        if (radio_source.trace_path.empty()) {
            wrap("radio", [&] { radio_source.route.validate(); });
        }
        for (const auto& o : radio_source.outages) {
            need(o.end_ms > o.start_ms && o.start_ms >= 0.0, "radio.outages", "need 0 <= start < end");
        }
        wrap("jitter_buffer", [&] { jitter_buffer.validate(); });
        need(available_prb >= 1 && available_prb <= sched::TbsTable::kMaxPrb, "available_prb",
             "must be in [1,100]");
        need(handover.interruption_mean_ms >= 0.0, "handover.interruption_mean_ms", "must be >= 0");
        need(handover.interruption_jitter_ms >= 0.0, "handover.interruption_jitter_ms", "must be >= 0");
        need(handover.extra_sched_delay_ms >= 0.0, "handover.extra_sched_delay_ms", "must be >= 0");
        need(std::isfinite(handover.target_olla_offset_db), "handover.target_olla_offset_db", "must be finite");
        need(!handover.periodic_ms || *handover.periodic_ms > 0.0, "handover.periodic_ms", "must be > 0");
        need(handover.min_spacing_ms >= 0.0, "handover.min_spacing_ms", "must be >= 0");
        need(core_delay.base_ms >= 0.0, "core_delay.base_ms", "must be >= 0");
        need(core_delay.tail_mean_ms >= 0.0, "core_delay.tail_mean_ms", "must be >= 0");
        need(channel.fading_sigma_db >= 0.0, "channel.fading_sigma_db", "must be >= 0");
        need(channel.fading_rho >= 0.0 && channel.fading_rho < 1.0, "channel.fading_rho", "must be in [0,1)");
        need(channel.size_penalty_db >= 0.0, "channel.size_penalty_db", "must be >= 0");
        need(channel.size_ref_bits > 0.0, "channel.size_ref_bits", "must be > 0");
        need(uplink.max_prb >= 1 && uplink.max_prb <= sched::TbsTable::kMaxPrb, "uplink.max_prb",
             "must be in [1,100]");
        need(uplink.sched_delay_ms >= 0.0, "uplink.sched_delay_ms", "must be >= 0");
        need(l2_overhead_bytes >= 0.0, "l2_overhead_bytes", "must be >= 0");
        need(rlc_segment_overhead_bits >= 0, "rlc_segment_overhead_bits", "must be >= 0");
        need(pdcp_discard_ms > 0.0, "pdcp_discard_ms", "must be > 0");
        need(rtp_timeout_ms > 0.0, "rtp_timeout_ms", "must be > 0");
    }
};

struct StreamCounters {
    std::int64_t departures = 0;
    std::int64_t arrivals = 0;
    std::int64_t losses = 0;
    std::int64_t in_flight = 0;
    double air_bytes_total = 0.0;
    std::int64_t air_packets = 0;

    double mean_air_bytes() const {
        return air_packets ? air_bytes_total / static_cast<double>(air_packets) : 0.0;
    }
};

struct SimResult {
    EventLog log;
    /// RTP traces by stream; arrival empty for lost or in-flight packets.
    std::vector<codec::RtpRecord> downlink;
    std::vector<codec::RtpRecord> uplink;
    radio::RadioTrace radio;
    PlayoutResult playout;
    StreamCounters dl;
    StreamCounters ul;
    std::int64_t pdcch_grants = 0;
    std::int64_t sps_activations = 0;
    std::int64_t bundled_grants = 0;
    bool call_dropped = false;
    /// Simulated span; shorter than configured after a call drop.
    double duration_ms = 0.0;
};

namespace detail {

struct VoicePdu {
    std::size_t rec = 0;
    Micros enq_us = 0;
    double eligible_ms = 0.0;
    std::int64_t unsent_bits = 0;
    int segments_in_air = 0;
    rohc::PacketKind kind = rohc::PacketKind::SO;
    bool touched = false;
    bool resolved = false;
    bool lost = false;
    LossReason reason = LossReason::HarqExhausted;
    Micros resolved_us = 0;
};

struct TransportBlock {
    std::int64_t id = 0;
    sched::ScheduleGrant grant;
    std::vector<std::pair<std::size_t, std::int64_t>> pieces;
    int attempt = 0;
    std::int64_t next_tx_tti = 0;
};

struct HarqProcess {
    std::optional<TransportBlock> tb;
    std::int64_t busy_until_tti = 0;
};

struct HandoverPlan {
    double start_ms;
    double interruption_ms;
    double extra_ms;
};

inline std::vector<HandoverPlan> plan_handovers(const HandoverModel& m, const radio::RadioTrace& trace,
                                                double duration_ms, std::uint64_t seed) {
    std::vector<double> starts = m.inject_at_ms;
    if (m.periodic_ms) {
        for (double t = m.periodic_offset_ms; t < duration_ms; t += *m.periodic_ms) {
            starts.push_back(t);
        }
    }
    if (m.rsrp_crossing_dbm) {
        double last = -INFINITY;
        const auto& s = trace.samples();
        for (std::size_t i = 1; i < s.size() && s[i].t_ms < duration_ms; ++i) {
            if (s[i - 1].rsrp_dbm >= *m.rsrp_crossing_dbm && s[i].rsrp_dbm < *m.rsrp_crossing_dbm &&
                s[i].t_ms - last >= m.min_spacing_ms) {
                starts.push_back(s[i].t_ms);
                last = s[i].t_ms;
            }
        }
    }
    std::vector<double> tti_starts;
    for (double t : starts) {
        if (t >= 0.0 && t < duration_ms) {
            tti_starts.push_back(std::ceil(t));
        }
    }
    std::sort(tti_starts.begin(), tti_starts.end());
    tti_starts.erase(std::unique(tti_starts.begin(), tti_starts.end()), tti_starts.end());

    const rng::Keyed draw(seed, "handover");
    std::vector<HandoverPlan> out;
    for (std::size_t i = 0; i < tti_starts.size(); ++i) {
        const double u = draw.uniform(i, 0);
        const double interruption =
            std::max(0.0, std::round(m.interruption_mean_ms + m.interruption_jitter_ms * (2.0 * u - 1.0)));
        const double extra = std::floor(draw.uniform(i, 1) * std::round(m.extra_sched_delay_ms));
        if (!out.empty() && tti_starts[i] < out.back().start_ms + out.back().interruption_ms + out.back().extra_ms) {
            continue;
        }
        out.push_back({tti_starts[i], interruption, extra});
    }
    return out;
}

inline double size_penalty_db(int tbs_bits, const ChannelEffects& ch) {
    if (tbs_bits <= ch.size_ref_bits) {
        return 0.0;
    }
    return ch.size_penalty_db * std::log2(tbs_bits / ch.size_ref_bits);
}

}  // namespace detail

/// Runs one call end to end. DL is simulated TTI by TTI (scheduler, HARQ
/// processes, RLC in-order delivery, ROHC); UL packets are carried one at a
/// time over dynamic or bundled grants.
inline SimResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    using namespace detail;

    SimResult res;
    res.log.scenario = cfg.name;
    res.log.seed = cfg.seed;

    const std::uint64_t seed = cfg.seed;
    const double drain_ms = 1000.0;
    const std::int64_t end_tti = static_cast<std::int64_t>(std::ceil(cfg.duration_ms + drain_ms));

    // ---- inputs ----
    if (cfg.radio_source.trace_path.empty()) {
        radio::RouteParams route = cfg.radio_source.route;
        route.duration_ms = std::max(route.duration_ms, cfg.duration_ms + drain_ms);
        res.radio = radio::synth_drive_trace(route, seed);
    } else {
        res.radio = radio::load_radio_csv(cfg.radio_source.trace_path);
        if (res.radio.empty()) {
            throw InputError("radio trace has no samples: " + cfg.radio_source.trace_path);
        }
    }
    const sched::TbsTable tbs_table =
        cfg.tbs_table_path.empty() ? sched::TbsTable{} : sched::TbsTable::load_csv(cfg.tbs_table_path);

    auto in_outage = [&](double t_ms) {
        for (const auto& o : cfg.radio_source.outages) {
            if (t_ms >= o.start_ms && t_ms < o.end_ms) {
                return true;
            }
        }
        return false;
    };

    std::vector<double> dl_sinr(static_cast<std::size_t>(end_tti));
    std::vector<double> fading(static_cast<std::size_t>(end_tti));
    {
        rng::Stream fd(seed, "fading");
        const double rho = cfg.channel.fading_rho;
        const double innov = std::sqrt(1.0 - rho * rho);
        double f = cfg.channel.fading_sigma_db * fd.normal();
        for (std::int64_t n = 0; n < end_tti; ++n) {
            if (n > 0) {
                f = rho * f + innov * cfg.channel.fading_sigma_db * fd.normal();
            }
            const double t = static_cast<double>(n);
            fading[static_cast<std::size_t>(n)] = f;
            dl_sinr[static_cast<std::size_t>(n)] =
                in_outage(t) ? cfg.radio_source.outage_sinr_db : res.radio.at(t).sinr_db;
        }
    }

    res.downlink = codec::generate_stream(cfg.codec, cfg.duration_ms, cfg.activity,
                                          rng::mix(seed, rng::tag("dl")), kDownlinkStream);
    res.uplink = codec::generate_stream(cfg.codec, cfg.duration_ms, cfg.activity,
                                        rng::mix(seed, rng::tag("ul")), kUplinkStream);

    const auto plans = plan_handovers(cfg.handover, res.radio, cfg.duration_ms, seed);

    const rng::Keyed core_draw(seed, "core");
    auto core_delay_ms = [&](std::uint32_t stream, std::int64_t seq) {
        const double tail =
            cfg.core_delay.tail_mean_ms > 0.0 ? core_draw.exponential(cfg.core_delay.tail_mean_ms, stream, seq) : 0.0;
        return cfg.core_delay.base_ms + tail;
    };

    const double header_full = cfg.rohc.sizes.full_header_bytes;
    auto air_bits = [&](double header_bytes) {
        const double bytes = cfg.codec.amr_payload_bytes + header_bytes + cfg.l2_overhead_bytes;
        return static_cast<std::int64_t>(std::ceil(bytes * 8.0 - 1e-9));
    };

    // ---- downlink ----
    std::vector<VoicePdu> pdus(res.downlink.size());
    std::vector<Micros> enb_arrival(res.downlink.size());
    std::vector<std::size_t> pdcp_order(res.downlink.size());
    for (std::size_t i = 0; i < res.downlink.size(); ++i) {
        const auto& r = res.downlink[i];
        enb_arrival[i] = ms_to_us(r.departure_ms + core_delay_ms(kDownlinkStream, r.seq));
        pdcp_order[i] = i;
    }
    std::stable_sort(pdcp_order.begin(), pdcp_order.end(),
                     [&](std::size_t a, std::size_t b) { return enb_arrival[a] < enb_arrival[b]; });

    rohc::RohcConfig rohc_cfg = cfg.rohc;
    rohc_cfg.seed = rng::mix(seed, rng::tag("rohc-dl"));
    rohc::RohcLink dl_rohc(rohc_cfg, 0);

    std::vector<HarqProcess> harq(8);
    std::vector<std::size_t> queue;  // PDU indices in PDCP order, not yet fully sent
    sched::OllaState olla;
    sched::SpsState sps;
    sps.status = sched::SpsStatus::RELEASED;
    const rng::Keyed harq_draw(seed, "harq-dl");
    const rng::Keyed tdm_draw(seed, "scheduler");
    const rng::Keyed rank_draw(seed, "rank2");
    const sched::GrantContext gctx{tbs_table, cfg.link, cfg.available_prb};

    std::size_t next_ingress = 0;
    std::size_t release_cursor = 0;
    Micros last_release_us = 0;
    std::optional<std::size_t> last_arrived;
    double last_arrival_ms = 0.0;
    std::size_t next_plan = 0;
    std::optional<std::size_t> active_plan;
    double resume_ms = -1.0;
    std::int64_t stop_tti = end_tti;

    auto resolve = [&](std::size_t idx, bool lost, LossReason reason, Micros t) {
        auto& p = pdus[idx];
        if (p.resolved) {
            return;
        }
        p.resolved = true;
        p.lost = lost;
        p.reason = reason;
        p.resolved_us = t;
        p.unsent_bits = 0;
    };

    auto release_in_order = [&]() {
        while (release_cursor < pdcp_order.size()) {
            const std::size_t idx = pdcp_order[release_cursor];
            if (release_cursor >= next_ingress || !pdus[idx].resolved) {
                break;
            }
            auto& p = pdus[idx];
            const Micros t = std::max(p.resolved_us, last_release_us);
            last_release_us = t;
            auto& rec = res.downlink[idx];
            if (p.lost) {
                if (cfg.rohc_enabled) {
                    dl_rohc.decompress(t, p.kind, false);
                }
                res.log.add(t, LossEvent{kDownlinkStream, rec.seq, p.reason});
                ++res.dl.losses;
            } else {
                const bool ok = !cfg.rohc_enabled || dl_rohc.decompress(t, p.kind, true) == rohc::Outcome::OK;
                if (ok) {
                    rec.arrival_ms = us_to_ms(t);
                    res.log.add(t, ArrivalEvent{rec});
                    ++res.dl.arrivals;
                    last_arrived = idx;
                    last_arrival_ms = us_to_ms(t);
                } else {
                    p.lost = true;
                    p.reason = LossReason::RohcFail;
                    res.log.add(t, LossEvent{kDownlinkStream, rec.seq, LossReason::RohcFail});
                    ++res.dl.losses;
                }
            }
            ++release_cursor;
        }
    };

    auto transmit = [&](TransportBlock& tb, std::int64_t n, bool via_sps) {
        ++tb.attempt;
        tb.grant.tti_index = n;
        const std::size_t ni = static_cast<std::size_t>(n);
        double sinr = dl_sinr[ni] + fading[ni] + cfg.link.harq_combining_gain_db * (tb.attempt - 1) -
                      size_penalty_db(tb.grant.tbs_bits / tb.grant.mimo_rank, cfg.channel);
        if (tb.grant.mimo_rank == 2) {
            sinr -= cfg.channel.rank2_penalty_db;
        }
        const double p = radio::bler(sinr, tb.grant.mcs, cfg.link);
        const bool ok = harq_draw.uniform(tb.id, tb.attempt) >= p;
        res.log.add(n * kTtiUs, GrantEvent{Direction::DL, tb.grant, tb.attempt, ok, false, via_sps});
        if (tb.attempt == 1) {
            olla = sched::olla_step(olla, ok, cfg.policy.target_bler);
        }
        return ok;
    };

    auto finish_tb = [&](TransportBlock& tb, bool ok, std::int64_t n) {
        const Micros t = n * kTtiUs;
        for (const auto& [idx, bits] : tb.pieces) {
            auto& p = pdus[idx];
            --p.segments_in_air;
            if (!ok) {
                resolve(idx, true, LossReason::HarqExhausted, t);
            } else if (!p.resolved && p.unsent_bits == 0 && p.segments_in_air == 0) {
                resolve(idx, false, LossReason::HarqExhausted, t);
            }
        }
    };

    const double rtt = cfg.link.harq_rtt_ms;
    const auto rtt_tti = static_cast<std::int64_t>(std::llround(rtt));

    for (std::int64_t n = 0; n < end_tti; ++n) {
        const Micros now = n * kTtiUs;
        const double t_ms = static_cast<double>(n);

        // RTP inactivity timer runs while the far end is talking.
        if (t_ms < cfg.duration_ms) {
            const std::size_t next_idx = last_arrived ? *last_arrived + 1 : 0;
            if (next_idx < res.downlink.size() && res.downlink[next_idx].departure_ms <= t_ms) {
                const double ref = std::max(last_arrived ? last_arrival_ms : 0.0,
                                            res.downlink[next_idx].departure_ms);
                if (t_ms - ref >= cfg.rtp_timeout_ms) {
                    res.log.add(now, CallDropEvent{last_arrival_ms});
                    res.call_dropped = true;
                    stop_tti = n;
                    break;
                }
            }
        }

        // PDCP ingress and header compression.
        while (next_ingress < pdcp_order.size() && enb_arrival[pdcp_order[next_ingress]] <= now) {
            const std::size_t idx = pdcp_order[next_ingress];
            auto& p = pdus[idx];
            p.rec = idx;
            p.enq_us = enb_arrival[idx];
            double header = header_full;
            if (cfg.rohc_enabled) {
                const auto c = dl_rohc.compress(p.enq_us, res.downlink[idx].seq);
                header = c.header_bytes;
                p.kind = c.kind;
            }
            p.unsent_bits = air_bits(header);
            res.dl.air_bytes_total += static_cast<double>(p.unsent_bits) / 8.0;
            ++res.dl.air_packets;
            const double enq_ms = us_to_ms(p.enq_us);
            p.eligible_ms = cfg.policy.drx ? sched::drx_gate(enq_ms, *cfg.policy.drx) : enq_ms;
            queue.push_back(idx);
            ++next_ingress;
        }

        // PDCP discard of PDUs that never reached the air.
        for (std::size_t q : queue) {
            auto& p = pdus[q];
            if (!p.touched && !p.resolved && now - p.enq_us > ms_to_us(cfg.pdcp_discard_ms)) {
                resolve(q, true, LossReason::PdcpDiscard, now);
            }
        }
        std::erase_if(queue, [&](std::size_t q) { return pdus[q].resolved || pdus[q].unsent_bits == 0; });

        // Handover execution.
        if (next_plan < plans.size() && t_ms >= plans[next_plan].start_ms) {
            const auto& hp = plans[next_plan];
            const double pre = last_arrived ? last_arrival_ms : hp.start_ms;
            resume_ms = std::max(hp.start_ms + hp.interruption_ms, pre + hp.interruption_ms + hp.extra_ms);
            resume_ms = std::ceil(resume_ms);
            res.log.add(now, HandoverEvent{hp.start_ms, hp.start_ms + hp.interruption_ms, resume_ms});
            active_plan = next_plan;
            ++next_plan;
            sps.status = sched::SpsStatus::RELEASED;
            olla.offset_db = std::clamp(cfg.handover.target_olla_offset_db, olla.floor_db, olla.cap_db);
        }
        const bool in_ho = active_plan && t_ms < resume_ms;

        if (!in_ho) {
            // Voice available this TTI.
            std::int64_t voice_bits = 0;
            double hol_ms = 0.0;
            bool have_hol = false;
            for (std::size_t q : queue) {
                const auto& p = pdus[q];
                if (p.eligible_ms <= t_ms) {
                    if (!have_hol) {
                        hol_ms = t_ms - p.eligible_ms;
                        have_hol = true;
                    }
                    voice_bits += p.unsent_bits;
                }
            }
            const std::int64_t data_bits = cfg.concurrent_data ? (std::int64_t{1} << 40) : 0;

            bool sps_tx = false;
            if (cfg.policy.sps) {
                if (sps.status == sched::SpsStatus::RELEASED && voice_bits > 0) {
                    sps.status = sched::SpsStatus::ACTIVE;
                    sps.activation_tti = n;
                    sps.empty_run = 0;
                    ++res.sps_activations;
                    ++res.pdcch_grants;
                }
                if (sps.status == sched::SpsStatus::ACTIVE) {
                    if (sched::sps_is_occasion(sps, *cfg.policy.sps, n)) {
                        sched::sps_update(sps, *cfg.policy.sps, n, voice_bits > 0);
                        sps_tx = voice_bits > 0 && n != sps.activation_tti;
                    } else {
                        voice_bits = 0;
                    }
                }
            } else if (voice_bits > 0 && data_bits > 0 && !cfg.policy.multiplex_voice_data) {
                const double p_voice = std::min(1.0, (hol_ms + 1.0) / cfg.policy.voice_tdm_window_ms);
                if (tdm_draw.uniform(n) >= p_voice) {
                    voice_bits = 0;
                }
            }

            // HARQ retransmissions first, one TB per TTI; a voice SPS occasion
            // pushes a pending retransmission back one TTI.
            HarqProcess* retx = nullptr;
            for (auto& h : harq) {
                if (h.tb && h.tb->next_tx_tti <= n) {
                    if (!retx || h.tb->id < retx->tb->id) {
                        retx = &h;
                    }
                }
            }
            if (retx && sps_tx) {
                retx->tb->next_tx_tti = n + 1;
                retx = nullptr;
            }
            if (retx) {
                for (auto& h : harq) {
                    if (&h != retx && h.tb && h.tb->next_tx_tti <= n) {
                        h.tb->next_tx_tti = n + 1;
                    }
                }
                auto& tb = *retx->tb;
                ++res.pdcch_grants;
                const bool ok = transmit(tb, n, false);
                retx->busy_until_tti = n + rtt_tti;
                if (ok || tb.attempt >= cfg.link.max_harq_tx) {
                    finish_tb(tb, ok, n);
                    retx->tb.reset();
                } else {
                    tb.next_tx_tti = n + rtt_tti;
                }
            } else {
                HarqProcess* free_proc = nullptr;
                for (auto& h : harq) {
                    if (!h.tb && h.busy_until_tti <= n) {
                        free_proc = &h;
                        break;
                    }
                }
                const std::int64_t data_now = sps_tx ? 0 : data_bits;
                if (free_proc && (voice_bits > 0 || data_now > 0)) {
                    const double eff = dl_sinr[static_cast<std::size_t>(n)] + olla.offset_db;
                    auto g = sched::select_grant(voice_bits, data_now, eff, cfg.policy, gctx);
                    if (g) {
                        if (cfg.policy.allow_rank2_voice_split && g->carries_voice &&
                            dl_sinr[static_cast<std::size_t>(n)] >= cfg.policy.rank2_min_sinr_db &&
                            rank_draw.uniform(n) < cfg.policy.rank2_probability) {
                            sched::apply_rank2(*g, voice_bits, data_now);
                        }
                        TransportBlock tb;
                        tb.id = n;
                        tb.grant = *g;
                        std::int64_t left = g->voice_bits;
                        for (std::size_t q : queue) {
                            if (left <= 0) {
                                break;
                            }
                            auto& p = pdus[q];
                            if (p.eligible_ms > t_ms || p.unsent_bits == 0) {
                                continue;
                            }
                            const std::int64_t piece = std::min(left, p.unsent_bits);
                            left -= piece;
                            p.unsent_bits -= piece;
                            p.touched = true;
                            ++p.segments_in_air;
                            if (p.unsent_bits > 0) {
                                p.unsent_bits += cfg.rlc_segment_overhead_bits;
                            }
                            tb.pieces.emplace_back(q, piece);
                        }
                        if (!sps_tx) {
                            ++res.pdcch_grants;
                        }
                        const bool ok = transmit(tb, n, sps_tx);
                        free_proc->busy_until_tti = n + rtt_tti;
                        if (ok || tb.attempt >= cfg.link.max_harq_tx) {
                            finish_tb(tb, ok, n);
                        } else {
                            tb.next_tx_tti = n + rtt_tti;
                            free_proc->tb = std::move(tb);
                        }
                    }
                }
            }
            std::erase_if(queue, [&](std::size_t q) { return pdus[q].resolved || pdus[q].unsent_bits == 0; });
        }

        // The UE detaches at the next TTI boundary: pending HARQ data of the
        // source cell is flushed.
        if (next_plan < plans.size() && t_ms + 1.0 >= plans[next_plan].start_ms &&
            plans[next_plan].interruption_ms > 0.0) {
            for (auto& h : harq) {
                if (h.tb) {
                    for (const auto& [idx, bits] : h.tb->pieces) {
                        resolve(idx, true, LossReason::HandoverFlush, now);
                    }
                    h.tb.reset();
                }
                h.busy_until_tti = 0;
            }
            std::erase_if(queue, [&](std::size_t q) { return pdus[q].resolved; });
        }

        release_in_order();
    }

    const double end_ms = res.call_dropped ? static_cast<double>(stop_tti) : cfg.duration_ms;
    res.duration_ms = end_ms;
    res.log.duration_ms = end_ms;

    // Packets sent after the call ended never existed.
    if (res.call_dropped) {
        std::vector<codec::RtpRecord> kept;
        for (const auto& r : res.downlink) {
            if (r.departure_ms <= end_ms) {
                kept.push_back(r);
            }
        }
        res.downlink = std::move(kept);
    }
    for (const auto& r : res.downlink) {
        res.log.add(ms_to_us(r.departure_ms), DepartureEvent{r});
    }
    res.dl.departures = static_cast<std::int64_t>(res.downlink.size());
    res.dl.in_flight = res.dl.departures - res.dl.arrivals - res.dl.losses;

    // ---- uplink ----
    if (cfg.uplink.enabled) {
        rohc::RohcConfig ul_rohc_cfg = cfg.rohc;
        ul_rohc_cfg.seed = rng::mix(seed, rng::tag("rohc-ul"));
        rohc::RohcLink ul_rohc(ul_rohc_cfg, 1);
        const rng::Keyed ul_harq(seed, "harq-ul");
        bool bundling_on = false;
        double prev_finish = 0.0;
        std::vector<codec::RtpRecord> kept;
        for (auto& rec : res.uplink) {
            if (rec.departure_ms > end_ms) {
                break;
            }
            double start = std::ceil(std::max(rec.departure_ms + cfg.uplink.sched_delay_ms, prev_finish));
            for (const auto& hp : plans) {
                if (start >= hp.start_ms && start < hp.start_ms + hp.interruption_ms) {
                    start = hp.start_ms + hp.interruption_ms;
                }
            }
            double header = header_full;
            rohc::PacketKind kind = rohc::PacketKind::SO;
            if (cfg.rohc_enabled) {
                const auto c = ul_rohc.compress(ms_to_us(start), rec.seq);
                header = c.header_bytes;
                kind = c.kind;
            }
            const std::int64_t bits = air_bits(header);
            res.ul.air_bytes_total += static_cast<double>(bits) / 8.0;
            ++res.ul.air_packets;

            const double sinr =
                (in_outage(start) ? cfg.radio_source.outage_sinr_db : res.radio.at(start).sinr_db) +
                cfg.uplink.sinr_offset_db;
            int mcs = sched::select_mcs(sinr, cfg.policy.target_bler, cfg.link);
            int prb = 0;
            int tbs = 0;
            double gain = 0.0;
            int tx_span = 1;
            double retx_rtt = rtt;
            if (cfg.bundling) {
                const auto& b = *cfg.bundling;
                const int need = tbs_table.min_prb_for(mcs, bits).value_or(sched::TbsTable::kMaxPrb);
                const double usage = static_cast<double>(need) / cfg.uplink.max_prb;
                bundling_on = bundling::should_bundle(sinr, usage, b, bundling_on);
            }
            if (bundling_on) {
                const auto& b = *cfg.bundling;
                gain = b.coverage_gain_db;
                mcs = std::min(sched::select_mcs(sinr + gain, cfg.policy.target_bler, cfg.link), b.max_mcs);
                prb = tbs_table.min_prb_for(mcs, bits, b.max_prb).value_or(b.max_prb);
                tbs = std::min(tbs_table.tbs(mcs, prb), b.max_tbs_bits);
                tx_span = b.bundle_size;
                retx_rtt = b.bundle_harq_rtt_ms;
            } else {
                prb = tbs_table.min_prb_for(mcs, bits, cfg.uplink.max_prb).value_or(cfg.uplink.max_prb);
                tbs = tbs_table.tbs(mcs, prb);
            }
            const std::int64_t seg_overhead = cfg.bundling ? cfg.bundling->segment_overhead_bits : cfg.rlc_segment_overhead_bits;
            std::int64_t remaining = bits;
            double t = start;
            bool lost = false;
            int seg = 0;
            while (remaining > 0 && !lost) {
                const std::int64_t piece = std::min<std::int64_t>(remaining, tbs);
                remaining -= piece;
                if (remaining > 0) {
                    remaining += seg_overhead;
                }
                bool ok = false;
                for (int a = 1; a <= cfg.link.max_harq_tx; ++a) {
                    const double eff = sinr + gain + cfg.link.harq_combining_gain_db * (a - 1);
                    ok = ul_harq.uniform(rec.seq, seg, a) >= radio::bler(eff, mcs, cfg.link);
                    sched::ScheduleGrant g;
                    g.tti_index = static_cast<std::int64_t>(t);
                    g.tbs_bits = tbs;
                    g.mcs = mcs;
                    g.prb_count = prb;
                    g.carries_voice = true;
                    g.voice_bits = piece;
                    g.padding_bits = static_cast<int>(tbs - piece);
                    if (t <= end_ms) {
                        res.log.add(ms_to_us(t), GrantEvent{Direction::UL, g, a, ok, bundling_on, false});
                        if (bundling_on) {
                            ++res.bundled_grants;
                        }
                    }
                    if (ok) {
                        t += tx_span;
                        break;
                    }
                    t += (a < cfg.link.max_harq_tx) ? retx_rtt : tx_span;
                }
                lost = !ok;
                ++seg;
            }
            prev_finish = t;
            const Micros done = ms_to_us(t);
            bool delivered = !lost;
            if (cfg.rohc_enabled) {
                delivered = ul_rohc.decompress(done, kind, !lost) == rohc::Outcome::OK && delivered;
            }
            const double arrival = t + core_delay_ms(kUplinkStream, rec.seq);
            if (delivered && arrival <= end_ms + drain_ms && !(res.call_dropped && arrival > end_ms)) {
                rec.arrival_ms = arrival;
                res.log.add(ms_to_us(arrival), ArrivalEvent{rec});
                ++res.ul.arrivals;
            } else if (!delivered && t <= end_ms) {
                res.log.add(done, LossEvent{kUplinkStream, rec.seq,
                                            lost ? LossReason::HarqExhausted : LossReason::RohcFail});
                ++res.ul.losses;
            }
            res.log.add(ms_to_us(rec.departure_ms), DepartureEvent{rec});
            kept.push_back(rec);
        }
        res.uplink = std::move(kept);
        res.ul.departures = static_cast<std::int64_t>(res.uplink.size());
        res.ul.in_flight = res.ul.departures - res.ul.arrivals - res.ul.losses;
    } else {
        res.uplink.clear();
    }

    // ---- receive-side playout ----
    std::vector<codec::RtpRecord> arrived;
    for (const auto& r : res.downlink) {
        if (r.arrival_ms) {
            arrived.push_back(r);
        }
    }
    std::stable_sort(arrived.begin(), arrived.end(),
                     [](const auto& a, const auto& b) { return *a.arrival_ms < *b.arrival_ms; });
    res.playout = jitter_buffer_playout(cfg.jitter_buffer, arrived);
    for (const auto& d : res.playout.discarded) {
        res.log.add(ms_to_us(d.arrival_ms),
                    JbDiscardEvent{kDownlinkStream, d.seq, d.reason == Discard::Reason::Late, d.playout_ms});
    }

    res.log.finalize();
    return res;
}

}  // namespace volte::sim

#endif  // VOLTE_SIM_PIPELINE_HPP
