#ifndef FURNACE_FORMAT_HPP
#define FURNACE_FORMAT_HPP

#include <charconv>
#include <string>

namespace furnace {

/// Shortest decimal form that round-trips to the same double. Used for every
/// CSV/report number so repeated runs emit byte-identical artifacts and
/// re-parsed values compare exactly against their JSON counterparts.
inline std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace furnace

#endif
