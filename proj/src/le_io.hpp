#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace sgrd::detail {

inline double to_little_endian(double x) {
    if constexpr (std::endian::native == std::endian::little) {
        return x;
    } else {
        std::array<unsigned char, sizeof(double)> b{};
        std::memcpy(b.data(), &x, sizeof x);
        std::reverse(b.begin(), b.end());
        std::memcpy(&x, b.data(), sizeof x);
        return x;
    }
}

inline void put_f64(std::ostream& out, double x) {
    x = to_little_endian(x);
    out.write(reinterpret_cast<const char*>(&x), sizeof x);
}

/// Returns false on a short read.
inline bool get_f64(std::istream& in, double& x) {
    in.read(reinterpret_cast<char*>(&x), sizeof x);
    if (!in) return false;
    x = to_little_endian(x);
    return true;
}

}  // namespace sgrd::detail
