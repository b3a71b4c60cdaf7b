// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_IO_FORMAT_HPP
#define VOLTE_IO_FORMAT_HPP

#include <charconv>
#include <cmath>
#include <string>

namespace volte::io {

/// Shortest round-trip decimal form; identical on every platform.
inline std::string num(double v) {
    if (v == 0.0) {
        return "0";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace volte::io

#endif  // VOLTE_IO_FORMAT_HPP
