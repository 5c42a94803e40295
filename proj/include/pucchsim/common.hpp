// SPDX-License-Identifier: Apache-2.0
//
// pucchsim: link-level simulator for the 5G NR uplink control channel.
// Shared scalar/vector types used across the library.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pucchsim {

using cd    = std::complex<double>;
using cvec  = std::vector<cd>;
using dvec  = std::vector<double>;
using bitvec = std::vector<uint8_t>;  // one bit per entry, value 0 or 1

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Subcarriers per physical resource block.
inline constexpr int k_sc_per_prb = 12;
// OFDM symbols per slot (normal cyclic prefix).
inline constexpr int k_symbols_per_slot = 14;

inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

inline cd expj(double theta) { return {std::cos(theta), std::sin(theta)}; }

// <a, b> = sum a_i * conj(b_i)
inline cd inner_product(const cvec& a, const cvec& b) {
    require(a.size() == b.size(), "inner_product: size mismatch");
    cd acc{0.0, 0.0};
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * std::conj(b[i]);
    return acc;
}

inline double energy(const cvec& a) {
    double acc = 0.0;
    for (const cd& x : a) acc += std::norm(x);
    return acc;
}

}  // namespace pucchsim
