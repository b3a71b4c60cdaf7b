// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_COMMON_HPP
#define VOLTE_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace volte {

/// Simulation time base. Every scheduled event is an integer number of
/// microseconds so runs are reproducible bit-for-bit across platforms.
using Micros = std::int64_t;

inline constexpr Micros kMicrosPerMs = 1000;
inline constexpr Micros kTtiUs = 1000;

constexpr Micros ms_to_us(double ms) {
    return static_cast<Micros>(ms * 1000.0 + (ms >= 0 ? 0.5 : -0.5));
}

constexpr double us_to_ms(Micros us) {
    return static_cast<double>(us) / 1000.0;
}

/// Malformed or inconsistent scenario configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data (trace files, reports) that does not match its schema.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a; used to turn sub-stream names into tags at compile time.
constexpr std::uint64_t tag(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t a) {
    return splitmix64(seed ^ splitmix64(a));
}

template <typename... Rest>
constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t a, Rest... rest) {
    return mix(mix(seed, a), static_cast<std::uint64_t>(rest)...);
}

/// Maps 64 random bits onto [0, 1) with 53-bit resolution.
constexpr double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential generator. The stdlib distributions are implementation
/// defined, so the few we need are written out here.
class Stream {
public:
    Stream(std::uint64_t seed, std::string_view name) : state_(mix(seed, tag(name))) {}
    explicit Stream(std::uint64_t state) : state_(state) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return to_unit(next()); }

    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < std::numeric_limits<double>::min()) {
            u1 = std::numeric_limits<double>::min();
        }
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Counter-based draws keyed by event identity. Toggling one feature of a
/// scenario never shifts the draws seen by another.
class Keyed {
public:
    Keyed(std::uint64_t seed, std::string_view name) : base_(mix(seed, tag(name))) {}

    template <typename... Keys>
    double uniform(Keys... keys) const {
        return to_unit(mix(base_, static_cast<std::uint64_t>(keys)...));
    }

    template <typename... Keys>
    double exponential(double mean, Keys... keys) const {
        return -mean * std::log1p(-uniform(keys...));
    }

    std::uint64_t base() const { return base_; }

private:
    std::uint64_t base_;
};

}  // namespace rng
}  // namespace volte

#endif  // VOLTE_COMMON_HPP
