// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_RADIO_CHANNEL_HPP
#define VOLTE_RADIO_CHANNEL_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "volte/common.hpp"

namespace volte::radio {

struct RadioSample {
    double t_ms = 0.0;
    double rsrp_dbm = 0.0;
    double rsrq_db = 0.0;
    double sinr_db = 0.0;
};

/// Time-ordered RF samples. Lookups hold the latest sample at or before t.
class RadioTrace {
public:
    RadioTrace() = default;

    explicit RadioTrace(std::vector<RadioSample> samples) : samples_(std::move(samples)) {
        for (std::size_t i = 1; i < samples_.size(); ++i) {
            if (!(samples_[i].t_ms > samples_[i - 1].t_ms)) {
                throw InputError("radio trace: t_ms must be strictly increasing (row " +
                                 std::to_string(i + 2) + ")");
            }
        }
    }

    const std::vector<RadioSample>& samples() const { return samples_; }
    bool empty() const { return samples_.empty(); }
    std::size_t size() const { return samples_.size(); }

    const RadioSample& at(double t_ms) const {
        if (samples_.empty()) {
            throw std::logic_error("radio trace is empty");
        }
        auto it = std::upper_bound(samples_.begin(), samples_.end(), t_ms,
                                   [](double t, const RadioSample& s) { return t < s.t_ms; });
        if (it == samples_.begin()) {
            return samples_.front();
        }
        return *std::prev(it);
    }

    const RadioSample& nearest(double t_ms) const {
        if (samples_.empty()) {
            throw std::logic_error("radio trace is empty");
        }
        auto it = std::lower_bound(samples_.begin(), samples_.end(), t_ms,
                                   [](const RadioSample& s, double t) { return s.t_ms < t; });
        if (it == samples_.end()) {
            return samples_.back();
        }
        if (it == samples_.begin()) {
            return *it;
        }
        auto before = std::prev(it);
        return (t_ms - before->t_ms) <= (it->t_ms - t_ms) ? *before : *it;
    }

private:
    std::vector<RadioSample> samples_;
};

/// Drive route: a straight road past a row of sites with log-distance
/// pathloss and Gudmundson-correlated lognormal shadowing. Defaults land
/// on the reference drive's averages.
struct RouteParams {
    double duration_ms = 600000.0;
    double sample_period_ms = 100.0;
    double speed_kmh = 80.0;
    double site_spacing_m = 600.0;
    double road_offset_m = 60.0;
    double pathloss_exponent = 3.5;
    /// Geometry off: RSRP is the configured mean plus shadowing only.
    bool flat = false;
    double rsrp_mean_dbm = -83.8;
    double shadow_sigma_db = 6.0;
    double shadow_decorrelation_m = 50.0;
    double sinr_mean_db = 20.2;
    /// dB of SINR change per dB of RSRP change (interference-limited cells track RSRP).
    double sinr_rsrp_coupling = 1.0;
    double sinr_noise_sigma_db = 1.5;
    /// Fraction of occupied REs in the serving cell; drives RSRQ.
    double cell_load = 0.55;

    void validate() const {
        if (!(duration_ms > 0.0)) {
            throw std::invalid_argument("route duration_ms must be > 0");
        }
        if (!(sample_period_ms > 0.0)) {
            throw std::invalid_argument("route sample_period_ms must be > 0");
        }
        if (!(speed_kmh >= 0.0) || !(site_spacing_m > 0.0) || !(road_offset_m > 0.0)) {
            throw std::invalid_argument("route geometry must be positive");
        }
        if (shadow_sigma_db < 0 || sinr_noise_sigma_db < 0 || shadow_decorrelation_m <= 0) {
            throw std::invalid_argument("route shadowing parameters invalid");
        }
        if (!(cell_load > 0.0 && cell_load <= 1.0)) {
            throw std::invalid_argument("cell_load must be in (0,1]");
        }
    }
};

namespace detail {

inline double route_gain_db(const RouteParams& p, double x_m) {
    const double u = std::fmod(x_m, p.site_spacing_m);
    const double along = std::min(u, p.site_spacing_m - u);
    const double d = std::hypot(p.road_offset_m, along);
    return -10.0 * p.pathloss_exponent * std::log10(d);
}

/// Mean of route_gain_db over one site spacing (midpoint rule).
inline double route_gain_mean_db(const RouteParams& p) {
    constexpr int kSteps = 4096;
    double acc = 0.0;
    for (int i = 0; i < kSteps; ++i) {
        acc += route_gain_db(p, (i + 0.5) * p.site_spacing_m / kSteps);
    }
    return acc / kSteps;
}

}  // namespace detail

/// RSRQ from the serving-cell load and SINR: N*RSRP/RSSI with RSSI summed
/// over 12 subcarriers per RB.
inline double rsrq_from(double sinr_db, double cell_load) {
    const double inv_sinr = std::pow(10.0, -sinr_db / 10.0);
    return -10.0 * std::log10(12.0 * (cell_load + inv_sinr));
}

inline RadioTrace synth_drive_trace(const RouteParams& p, std::uint64_t seed) {
    p.validate();
    rng::Stream draw(seed, "channel");
    const double mps = p.speed_kmh / 3.6;
    const double gain_mean = p.flat ? 0.0 : detail::route_gain_mean_db(p);
    const double step_m = mps * p.sample_period_ms / 1000.0;
    const double rho = std::exp(-step_m / p.shadow_decorrelation_m);
    const double innov = std::sqrt(std::max(0.0, 1.0 - rho * rho));

    std::vector<RadioSample> out;
    out.reserve(static_cast<std::size_t>(p.duration_ms / p.sample_period_ms) + 1);
    double shadow = p.shadow_sigma_db * draw.normal();
    for (std::int64_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * p.sample_period_ms;
        if (t >= p.duration_ms) {
            break;
        }
        if (i > 0) {
            shadow = rho * shadow + innov * p.shadow_sigma_db * draw.normal();
        }
        const double x = mps * t / 1000.0;
        const double geo = p.flat ? 0.0 : detail::route_gain_db(p, x) - gain_mean;
        const double dev = geo + shadow;
        RadioSample s;
        s.t_ms = t;
        s.rsrp_dbm = p.rsrp_mean_dbm + dev;
        s.sinr_db = p.sinr_mean_db + p.sinr_rsrp_coupling * dev + p.sinr_noise_sigma_db * draw.normal();
        s.rsrq_db = rsrq_from(s.sinr_db, p.cell_load);
        out.push_back(s);
    }
    return RadioTrace(std::move(out));
}

/// Parametric SINR to BLER mapping with HARQ settings.
struct LinkModel {
    /// Midpoint SINR per MCS index (BLER = 0.5 there); strictly increasing.
    std::vector<double> sinr50_db;
    double slope_per_db = 1.5;
    int max_harq_tx = 4;
    double harq_rtt_ms = 8.0;
    /// Effective SINR gain per retransmission from soft combining.
    double harq_combining_gain_db = 1.5;

    static LinkModel standard() {
        LinkModel m;
        m.sinr50_db.reserve(29);
        for (int mcs = 0; mcs <= 28; ++mcs) {
            m.sinr50_db.push_back(-7.0 + 1.05 * mcs);
        }
        return m;
    }

    int max_mcs() const { return static_cast<int>(sinr50_db.size()) - 1; }

    void validate() const {
        if (sinr50_db.empty()) {
            throw std::invalid_argument("link model needs at least one MCS");
        }
        for (std::size_t i = 1; i < sinr50_db.size(); ++i) {
            if (!(sinr50_db[i] > sinr50_db[i - 1])) {
                throw std::invalid_argument("sinr50 must be strictly increasing with MCS");
            }
        }
        if (!(slope_per_db > 0.0)) {
            throw std::invalid_argument("slope must be > 0");
        }
        if (max_harq_tx < 1) {
            throw std::invalid_argument("max_harq_tx must be >= 1");
        }
        if (!(harq_rtt_ms > 0.0)) {
            throw std::invalid_argument("harq_rtt_ms must be > 0");
        }
    }
};

inline double bler(double sinr_db, int mcs, const LinkModel& model) {
    if (mcs < 0 || mcs > model.max_mcs()) {
        throw std::out_of_range("unknown MCS index " + std::to_string(mcs));
    }
    const double x = model.slope_per_db * (sinr_db - model.sinr50_db[static_cast<std::size_t>(mcs)]);
    // Logistic written to stay inside (0,1) without overflow.
    if (x >= 0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

struct HarqResult {
    int attempts = 0;
    bool delivered = false;
    double airtime_ms = 0.0;
};

/// Transmits one transport block with HARQ at a fixed channel SINR. Each
/// retransmission gains harq_combining_gain_db of effective SINR.
/// Airtime runs from the first TTI start to the end of the last attempt.
template <typename Grant>
HarqResult harq_transmit(const Grant& grant, double sinr_db, const LinkModel& model,
                         std::uint64_t seed) {
    const rng::Keyed draw(seed, "harq");
    HarqResult r;
    for (int a = 1; a <= model.max_harq_tx; ++a) {
        r.attempts = a;
        const double eff = sinr_db + model.harq_combining_gain_db * (a - 1);
        if (draw.uniform(grant.tti_index, a) >= bler(eff, grant.mcs, model)) {
            r.delivered = true;
            break;
        }
    }
    r.airtime_ms = 1.0 + (r.attempts - 1) * model.harq_rtt_ms;
    return r;
}

// ---- radio trace CSV: t_ms,rsrp_dbm,rsrq_db,sinr_db ----

inline constexpr const char* kRadioCsvHeader = "t_ms,rsrp_dbm,rsrq_db,sinr_db";

inline void write_radio_csv(std::ostream& os, const RadioTrace& trace) {
    auto put = [&os](double v, char end) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        os.write(buf, res.ptr - buf);
        os.put(end);
    };
    os << kRadioCsvHeader << '\n';
    for (const auto& s : trace.samples()) {
        put(s.t_ms, ',');
        put(s.rsrp_dbm, ',');
        put(s.rsrq_db, ',');
        put(s.sinr_db, '\n');
    }
}

inline RadioTrace read_radio_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw InputError("radio trace: empty file");
    }
    if (!line.empty() && line.back() == '\r') {
        throw InputError("radio trace: CRLF line endings are not accepted (row 1)");
    }
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
        line.erase(0, 3);
    }
    if (line != kRadioCsvHeader) {
        throw InputError(std::string("radio trace: header must be '") + kRadioCsvHeader + "' (row 1)");
    }
    std::vector<RadioSample> out;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::string cell;
        double v[4];
        for (int i = 0; i < 4; ++i) {
            if (!std::getline(ls, cell, ',')) {
                throw InputError("radio trace: expected 4 columns (row " + std::to_string(row) + ")");
            }
            try {
                std::size_t used = 0;
                v[i] = std::stod(cell, &used);
                if (used != cell.size()) {
                    throw std::invalid_argument(cell);
                }
            } catch (const std::exception&) {
                throw InputError("radio trace: bad number '" + cell + "' (row " + std::to_string(row) + ")");
            }
        }
        if (std::getline(ls, cell, ',')) {
            throw InputError("radio trace: expected 4 columns (row " + std::to_string(row) + ")");
        }
        out.push_back({v[0], v[1], v[2], v[3]});
    }
    return RadioTrace(std::move(out));
}

inline RadioTrace load_radio_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("radio trace not found: " + path);
    }
    return read_radio_csv(in);
}

}  // namespace volte::radio

#endif  // VOLTE_RADIO_CHANNEL_HPP
