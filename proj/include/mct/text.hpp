#pragma once

#include <charconv>
#include <string>

namespace mct {

// Shortest round-trip decimal form; locale independent, so CSV bytes depend
// only on the values.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

// Fixed-precision variant for human-facing tables.
inline std::string format_fixed(double v, int precision) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
    return {buf, res.ptr};
}

}  // namespace mct
