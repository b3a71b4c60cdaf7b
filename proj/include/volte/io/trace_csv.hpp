// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_IO_TRACE_CSV_HPP
#define VOLTE_IO_TRACE_CSV_HPP

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "volte/codec_model.hpp"
#include "volte/common.hpp"
#include "volte/io/format.hpp"

namespace volte::io {

inline constexpr std::string_view kTraceCsvHeader =
    "stream_id,seq,media_ts_ms,departure_ms,arrival_ms,payload_bytes,talkspurt_start";

inline void write_trace_csv(std::ostream& os, std::span<const codec::RtpRecord> trace) {
    os << kTraceCsvHeader << '\n';
    for (const auto& r : trace) {
        os << r.stream_id << ',' << r.seq << ',' << num(r.media_ts_ms) << ',' << num(r.departure_ms) << ','
           << (r.arrival_ms ? num(*r.arrival_ms) : std::string{}) << ',' << r.payload_bytes << ','
           << (r.talkspurt_start ? 1 : 0) << '\n';
    }
}

namespace detail {

template <typename T>
T parse_field(std::string_view s, std::size_t row, std::string_view column) {
    T v{};
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end) {
        throw InputError("trace row " + std::to_string(row) + ": bad " + std::string(column) + " '" +
                         std::string(s) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

}  // namespace detail

/// Reads the RTP trace schema. Row numbers in errors count the header as row 1.
inline std::vector<codec::RtpRecord> read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw InputError("trace: empty file");
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    if (!line.empty() && line.back() == '\r') {
        throw InputError("trace row 1: CRLF line endings are not supported");
    }
    if (line != kTraceCsvHeader) {
        throw InputError("trace row 1: expected header '" + std::string(kTraceCsvHeader) + "'");
    }
    std::vector<codec::RtpRecord> out;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        if (line.back() == '\r') {
            throw InputError("trace row " + std::to_string(row) + ": CRLF line endings are not supported");
        }
        const auto f = detail::split_commas(line);
        if (f.size() != 7) {
            throw InputError("trace row " + std::to_string(row) + ": expected 7 fields, got " +
                             std::to_string(f.size()));
        }
        codec::RtpRecord r;
        r.stream_id = detail::parse_field<std::uint32_t>(f[0], row, "stream_id");
        r.seq = detail::parse_field<std::int64_t>(f[1], row, "seq");
        r.media_ts_ms = detail::parse_field<double>(f[2], row, "media_ts_ms");
        r.departure_ms = detail::parse_field<double>(f[3], row, "departure_ms");
        if (!f[4].empty()) {
            r.arrival_ms = detail::parse_field<double>(f[4], row, "arrival_ms");
        }
        r.payload_bytes = detail::parse_field<int>(f[5], row, "payload_bytes");
        if (f[6] != "0" && f[6] != "1") {
            throw InputError("trace row " + std::to_string(row) + ": talkspurt_start must be 0 or 1");
        }
        r.talkspurt_start = f[6] == "1";
        if (r.seq < 0) {
            throw InputError("trace row " + std::to_string(row) + ": seq must be >= 0");
        }
        if (r.payload_bytes < 0) {
            throw InputError("trace row " + std::to_string(row) + ": payload_bytes must be >= 0");
        }
        out.push_back(r);
    }
    return out;
}

inline std::vector<codec::RtpRecord> load_trace_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("trace not found: " + path);
    }
    return read_trace_csv(in);
}

}  // namespace volte::io

#endif  // VOLTE_IO_TRACE_CSV_HPP
