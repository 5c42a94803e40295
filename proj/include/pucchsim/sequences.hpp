// SPDX-License-Identifier: Apache-2.0
//
// Deterministic sequence material: length-12 low-PAPR base sequences,
// cyclic shifts, DFT orthogonal cover codes and Gold scrambling bits.

#pragma once

#include <array>
#include <cstdint>

#include "pucchsim/common.hpp"

namespace pucchsim {

// Length-12 computer-generated low-PAPR sequence, r(n) = exp(j*phi(n)*pi/4).
struct BaseSequence {
    int group_index = 0;  // 0..29
    cvec samples;         // 12 unit-modulus samples
};

// Orthogonal cover code vector (DFT basis), unit-modulus samples.
struct OccVector {
    int index = 0;
    int length = 0;
    cvec samples;
};

namespace detail {

// Phase tables phi(n) for the 30 sequence groups of the length-12
// low-PAPR computer-generated family (TS 38.211 clause 5.2.2.2 style:
// QPSK phases, PAPR under 3 dB, bounded cross-correlation). Deployments
// that need bit-exact certified values can override the table via
// set_base_sequence_table() or the JSON hook in the CLI.
inline constexpr std::array<std::array<int, 12>, 30> k_cgs_phase_table = {{
    {-3,  1, -3, -3, -3,  3, -3, -1,  1,  1,  1, -3},
    {-3,  3,  1, -3,  1,  3, -1, -1,  1,  3,  3,  3},
    {-3,  3,  3,  1, -3,  3, -1,  1,  3, -3,  3, -3},
    {-3, -3, -1,  3,  3,  3, -3,  3, -3,  1, -1, -3},
    {-3, -1, -1,  1,  3,  1,  1, -1,  1, -1, -3,  1},
    {-3, -3,  3,  1, -3, -3, -3, -1,  3, -1,  1,  3},
    { 1, -1,  3, -1, -1, -1, -3, -1,  1,  1,  1, -3},
    {-1, -3,  3, -1, -3, -3, -3, -1,  1, -1,  1, -3},
    {-3, -1,  3,  1, -3, -1, -3,  3,  1,  3,  3,  1},
    { 1, -1, -3, -3, -1, -3,  3, -1,  1, -1,  1,  3},
    {-3,  1, -1, -3, -3,  1, -1, -1, -1, -1,  3, -3},
    {-3, -3, -1, -1, -1,  3, -3,  1,  1, -3,  1, -1},
    {-1, -1, -3,  3,  1,  3, -3,  3, -1,  3,  3, -3},
    {-3,  3,  1,  3,  1, -1,  1,  3,  1,  3, -3, -3},
    {-3, -3,  3, -3, -1,  3,  3,  3, -1, -3,  1, -3},
    { 3,  1,  3,  1,  3, -3, -1,  1,  3,  1, -1, -3},
    {-3,  3,  1,  3, -3,  1,  1,  1,  1,  3, -3,  3},
    {-3,  3,  3,  3, -1, -3, -3, -1, -3,  1,  3, -3},
    { 3, -1, -3,  3, -3, -1,  3,  3,  3, -3, -1, -3},
    {-3, -1,  1, -3,  1,  3,  3,  3, -1, -3,  3,  3},
    {-3,  3,  1, -1,  3,  3, -3,  1, -1,  1, -1,  1},
    {-1,  1,  3, -3,  1, -1,  1, -1, -1, -3,  1, -1},
    {-3, -3,  3,  3,  3, -3, -1,  1, -3,  3,  1, -3},
    {-3, -1, -1,  1, -3, -1, -3,  1, -1, -3,  3,  3},
    {-3,  3, -3,  3, -1, -3,  3,  1,  1,  3, -3, -1},
    { 1, -1,  1, -3,  1,  3,  3, -1, -1,  1,  1, -1},
    {-3, -1,  3, -3, -3, -1, -3,  1, -1, -3,  3,  3},
    {-3,  1, -1, -1,  3,  3, -3, -1, -1, -3, -1, -3},
    { 1,  3, -3,  1,  3,  3,  3,  1, -1,  1, -1,  3},
    {-3,  1,  3, -1, -1, -3, -3, -1, -1,  3,  1, -3},
}};

inline std::array<std::array<int, 12>, 30>& base_sequence_phases() {
    static std::array<std::array<int, 12>, 30> table = k_cgs_phase_table;
    return table;
}

}  // namespace detail

// Replace the embedded phase table (e.g. from a JSON file). Must be called
// before any worker threads start. Verifies shape implicitly and that every
// resulting sample is unit-modulus.
inline void set_base_sequence_table(const std::array<std::array<int, 12>, 30>& phases) {
    detail::base_sequence_phases() = phases;
}

inline BaseSequence generate_base_sequence(int group_index) {
    require(group_index >= 0 && group_index <= 29,
            "generate_base_sequence: group_index out of [0, 29]");
    const auto& phi = detail::base_sequence_phases()[group_index];
    BaseSequence seq;
    seq.group_index = group_index;
    seq.samples.resize(k_sc_per_prb);
    for (int n = 0; n < k_sc_per_prb; ++n) {
        seq.samples[n] = expj(phi[n] * pi / 4.0);
        require(std::abs(std::abs(seq.samples[n]) - 1.0) < 1e-12,
                "base sequence sample is not unit modulus");
    }
    return seq;
}

// r_alpha(n) = r(n) * exp(j*2*pi*alpha*n/12)
inline cvec apply_cyclic_shift(const BaseSequence& seq, int alpha) {
    require(alpha >= 0 && alpha <= 11, "apply_cyclic_shift: alpha out of [0, 11]");
    cvec out(k_sc_per_prb);
    for (int n = 0; n < k_sc_per_prb; ++n)
        out[n] = seq.samples[n] * expj(two_pi * alpha * n / 12.0);
    return out;
}

namespace detail {

// DFT-basis spreading vector without the public length cap (the PF1
// puncturing arrangement needs length 8 at n = 14).
inline OccVector dft_occ(int index, int length) {
    require(length >= 1, "occ: length must be positive");
    require(index >= 0 && index < length, "occ: index must be < length");
    OccVector occ;
    occ.index = index;
    occ.length = length;
    occ.samples.resize(length);
    for (int m = 0; m < length; ++m)
        occ.samples[m] = expj(-two_pi * index * m / length);
    return occ;
}

}  // namespace detail

// Time-domain cover code, DFT basis: w(m) = exp(-j*2*pi*index*m/length).
inline OccVector time_occ(int index, int length) {
    require(length >= 1 && length <= 7, "time_occ: length out of [1, 7]");
    return detail::dft_occ(index, length);
}

// Block-spreading code applied before DFT precoding (PF4). Same DFT basis
// construction; only lengths 2 and 4 are defined.
inline OccVector pre_dft_occ(int index, int length) {
    require(length == 2 || length == 4, "pre_dft_occ: length must be 2 or 4");
    require(index >= 0 && index < length, "pre_dft_occ: index must be < length");
    OccVector occ = time_occ(index, length);
    return occ;
}

// Length-31 Gold sequence (dual LFSR, 1600-sample fast-forward). x1 feedback
// x^31+x^3+1 with fixed init; x2 feedback x^31+x^3+x^2+x+1 seeded by c_init.
inline bitvec gold_bits(uint32_t c_init, int count) {
    require(count >= 0, "gold_bits: count must be >= 0");
    bitvec out(count);
    if (count == 0) return out;

    constexpr int nc = 1600;
    const int total = nc + count;
    std::vector<uint8_t> x1(total + 31), x2(total + 31);
    x1[0] = 1;
    for (int i = 0; i < 31; ++i) x2[i] = (c_init >> i) & 1u;
    for (int i = 0; i < total; ++i) {
        x1[i + 31] = x1[i + 3] ^ x1[i];
        x2[i + 31] = x2[i + 3] ^ x2[i + 2] ^ x2[i + 1] ^ x2[i];
    }
    for (int i = 0; i < count; ++i) out[i] = x1[i + nc] ^ x2[i + nc];
    return out;
}

}  // namespace pucchsim
