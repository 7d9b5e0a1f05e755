#pragma once

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

#include "lmcar/errors.hpp"

namespace lmcar {

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Hex-float encoding; lossless for binary64 round trips.
inline std::string format_double_hex(double v) {
    char buf[64];
    int n = std::snprintf(buf, sizeof(buf), "%a", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

/// Parses decimal or 0x-prefixed hex floats; throws on trailing garbage.
inline double parse_double(std::string_view s) {
    std::string tmp(s);
    char* end = nullptr;
    double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || tmp.empty()) {
        throw ValidationError("cannot parse number '" + tmp + "'");
    }
    return v;
}

} // namespace lmcar
