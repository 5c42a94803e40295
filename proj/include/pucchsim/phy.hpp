// SPDX-License-Identifier: Apache-2.0
//
// Modulation mapping, DFT precoding and resource-grid construction for
// the allocated PUCCH region. The grid covers only the allocated
// symbols/PRBs; the simulation works entirely at resource-element level
// (per-RE channel response), no time-domain waveform synthesis.

#pragma once

#include <algorithm>
#include <ostream>
#include <utility>

#include "pucchsim/common.hpp"

namespace pucchsim {

enum class PucchFormat { PF0, PF1, PF2, PF3, PF4 };
enum class Modulation { BPSK, QPSK, PI2_BPSK };
enum class Pf0Structure { SEQUENCE, DMRS };
enum class Pf1Method { EXTENSION, PUNCTURING };
enum class Pf2Overhead { HALF, THIRD, QUARTER };

struct PreDftOcc {
    int length = 0;  // 0 = none; otherwise 2 or 4
    int index = 0;
};

struct PucchConfig {
    PucchFormat format = PucchFormat::PF0;
    int n_symbols = 1;
    int start_symbol = 0;
    int n_prb = 1;
    int prb_offset = 0;
    int group_index = 0;     // base sequence group, 0..29
    int cyclic_shift = 0;    // 0..11
    int time_occ_index = 0;  // PF1
    PreDftOcc pre_dft_occ;   // PF4
    Modulation modulation = Modulation::QPSK;

    // Per-format DMRS layout choice.
    Pf0Structure pf0_structure = Pf0Structure::SEQUENCE;
    Pf1Method pf1_method = Pf1Method::EXTENSION;
    Pf2Overhead pf2_overhead = Pf2Overhead::THIRD;
    int pf3_n_dmrs = 2;

    // Seeds for pseudo-random DMRS / scrambling.
    int slot_index = 0;
    int scrambling_id = 0;
    int rnti = 1;

    int n_subcarriers() const { return n_prb * k_sc_per_prb; }

    void validate() const {
        require(start_symbol >= 0 && start_symbol + n_symbols <= k_symbols_per_slot,
                "config: start_symbol + n_symbols must fit in a 14-symbol slot");
        require(group_index >= 0 && group_index <= 29, "config: group_index out of [0, 29]");
        require(cyclic_shift >= 0 && cyclic_shift <= 11, "config: cyclic_shift out of [0, 11]");
        switch (format) {
            case PucchFormat::PF0:
                require(n_symbols == 1 || n_symbols == 2, "config: PF0 spans 1-2 symbols");
                if (pf0_structure == Pf0Structure::SEQUENCE)
                    require(n_prb == 1, "config: sequence-based PF0 uses 1 PRB");
                else
                    // Study mode: the interleaved DMRS structure spans 2 PRBs.
                    require(n_prb == 2, "config: DMRS-based PF0 study mode uses 2 PRBs");
                break;
            case PucchFormat::PF1:
                require(n_symbols >= 4 && n_symbols <= 14, "config: PF1 spans 4-14 symbols");
                require(n_prb == 1, "config: PF1 uses 1 PRB");
                break;
            case PucchFormat::PF2: {
                require(n_symbols == 1 || n_symbols == 2, "config: PF2 spans 1-2 symbols");
                require(n_prb >= 1 && n_prb <= 16, "config: PF2 uses 1-16 PRBs");
                break;
            }
            case PucchFormat::PF3: {
                require(n_symbols >= 4 && n_symbols <= 14, "config: PF3 spans 4-14 symbols");
                const bool prb_ok = (n_prb >= 1 && n_prb <= 6) || (n_prb >= 8 && n_prb <= 10) ||
                                    n_prb == 12 || n_prb == 15 || n_prb == 16;
                require(prb_ok, "config: PF3 PRB count not an allowed value");
                break;
            }
            case PucchFormat::PF4:
                require(n_symbols >= 4 && n_symbols <= 14, "config: PF4 spans 4-14 symbols");
                require(n_prb == 1, "config: PF4 uses 1 PRB");
                require(pre_dft_occ.length == 2 || pre_dft_occ.length == 4,
                        "config: PF4 requires a pre-DFT OCC of length 2 or 4");
                require(pre_dft_occ.index >= 0 && pre_dft_occ.index < pre_dft_occ.length,
                        "config: pre-DFT OCC index out of range");
                break;
        }
    }
};

// Complex samples for the allocated region, one plane per antenna port,
// row-major (symbol, subcarrier).
struct ResourceGrid {
    int n_symbols = 0;
    int n_subcarriers = 0;
    std::vector<cvec> ports;

    ResourceGrid() = default;
    ResourceGrid(int symbols, int subcarriers, int n_ports = 1)
        : n_symbols(symbols), n_subcarriers(subcarriers),
          ports(n_ports, cvec(static_cast<size_t>(symbols) * subcarriers, cd{0.0, 0.0})) {}

    int n_ports() const { return static_cast<int>(ports.size()); }
    cd& at(int port, int symbol, int subcarrier) {
        return ports[port][static_cast<size_t>(symbol) * n_subcarriers + subcarrier];
    }
    const cd& at(int port, int symbol, int subcarrier) const {
        return ports[port][static_cast<size_t>(symbol) * n_subcarriers + subcarrier];
    }
};

// RE index lists (flattened symbol * n_subcarriers + subcarrier) for the
// UCI and DMRS portions of an allocation.
struct PucchLayout {
    std::vector<int> uci;
    std::vector<int> dmrs;
};

inline int re_index(int symbol, int subcarrier, int n_subcarriers) {
    return symbol * n_subcarriers + subcarrier;
}

// ---------------------------------------------------------------------------
// Modulation
// ---------------------------------------------------------------------------

// Bit-to-symbol conventions (unit average energy):
//   BPSK       b -> 1 - 2b                     (0 -> +1, 1 -> -1)
//   QPSK       (b0, b1) -> ((1-2b0) + j(1-2b1)) / sqrt(2)
//   pi/2-BPSK  BPSK with odd-indexed symbols rotated by +90 degrees
inline cvec modulate(const bitvec& bits, Modulation scheme) {
    cvec out;
    switch (scheme) {
        case Modulation::BPSK:
            out.reserve(bits.size());
            for (uint8_t b : bits) out.emplace_back(1.0 - 2.0 * b, 0.0);
            break;
        case Modulation::QPSK: {
            require(bits.size() % 2 == 0, "modulate: QPSK requires an even bit count");
            out.reserve(bits.size() / 2);
            const double s = 1.0 / std::sqrt(2.0);
            for (size_t i = 0; i < bits.size(); i += 2)
                out.emplace_back(s * (1.0 - 2.0 * bits[i]), s * (1.0 - 2.0 * bits[i + 1]));
            break;
        }
        case Modulation::PI2_BPSK:
            out.reserve(bits.size());
            for (size_t i = 0; i < bits.size(); ++i) {
                const cd rot = (i % 2) ? cd{0.0, 1.0} : cd{1.0, 0.0};
                out.push_back(rot * cd{1.0 - 2.0 * bits[i], 0.0});
            }
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// DFT precoding (unitary, per block of block_size samples)
// ---------------------------------------------------------------------------

namespace detail {

inline cvec dft_block(const cvec& x, size_t offset, int size, double sign) {
    cvec out(size, cd{0.0, 0.0});
    const double scale = 1.0 / std::sqrt(static_cast<double>(size));
    for (int k = 0; k < size; ++k) {
        cd acc{0.0, 0.0};
        for (int n = 0; n < size; ++n)
            acc += x[offset + n] * expj(sign * two_pi * k * n / size);
        out[k] = scale * acc;
    }
    return out;
}

inline cvec dft_precode_impl(const cvec& symbols, int block_size, double sign) {
    require(block_size >= 1, "dft_precode: block size must be positive");
    require(symbols.size() % block_size == 0,
            "dft_precode: input length not divisible by block size");
    cvec out;
    out.reserve(symbols.size());
    for (size_t off = 0; off < symbols.size(); off += block_size) {
        const cvec block = dft_block(symbols, off, block_size, sign);
        out.insert(out.end(), block.begin(), block.end());
    }
    return out;
}

}  // namespace detail

inline cvec dft_precode(const cvec& symbols, int block_size) {
    return detail::dft_precode_impl(symbols, block_size, -1.0);
}

inline cvec inverse_dft_precode(const cvec& symbols, int block_size) {
    return detail::dft_precode_impl(symbols, block_size, +1.0);
}

// ---------------------------------------------------------------------------
// Resource mapping
// ---------------------------------------------------------------------------

namespace detail {

inline void check_layout(const PucchLayout& layout, int n_res) {
    std::vector<int> all(layout.uci);
    all.insert(all.end(), layout.dmrs.begin(), layout.dmrs.end());
    std::sort(all.begin(), all.end());
    for (size_t i = 0; i < all.size(); ++i) {
        require(all[i] >= 0 && all[i] < n_res, "layout: RE index out of grid bounds");
        require(i == 0 || all[i] != all[i - 1], "layout: UCI/DMRS RE lists overlap");
    }
}

}  // namespace detail

// Fill the allocated region: every listed RE exactly once, others zero.
inline ResourceGrid map_pucch(const PucchConfig& cfg, const cvec& uci_res,
                              const cvec& dmrs_res, const PucchLayout& layout) {
    require(layout.uci.size() == uci_res.size(), "map_pucch: UCI count mismatch");
    require(layout.dmrs.size() == dmrs_res.size(), "map_pucch: DMRS count mismatch");
    ResourceGrid grid(cfg.n_symbols, cfg.n_subcarriers(), 1);
    detail::check_layout(layout, cfg.n_symbols * cfg.n_subcarriers());
    for (size_t i = 0; i < layout.uci.size(); ++i) grid.ports[0][layout.uci[i]] = uci_res[i];
    for (size_t i = 0; i < layout.dmrs.size(); ++i) grid.ports[0][layout.dmrs[i]] = dmrs_res[i];
    return grid;
}

// Exact inverse of map_pucch on the occupied REs (single port).
inline std::pair<cvec, cvec> extract_pucch(const ResourceGrid& grid, const PucchLayout& layout,
                                           int port = 0) {
    const int n_res = grid.n_symbols * grid.n_subcarriers;
    detail::check_layout(layout, n_res);
    cvec uci(layout.uci.size()), dmrs(layout.dmrs.size());
    for (size_t i = 0; i < layout.uci.size(); ++i) uci[i] = grid.ports[port][layout.uci[i]];
    for (size_t i = 0; i < layout.dmrs.size(); ++i) dmrs[i] = grid.ports[port][layout.dmrs[i]];
    return {uci, dmrs};
}

// Debug dump of one port, columns: symbol, subcarrier, re, im.
inline void dump_grid_csv(const ResourceGrid& grid, std::ostream& os, int port = 0) {
    os << "symbol,subcarrier,re,im\n";
    for (int s = 0; s < grid.n_symbols; ++s)
        for (int k = 0; k < grid.n_subcarriers; ++k) {
            const cd& v = grid.at(port, s, k);
            os << s << ',' << k << ',' << v.real() << ',' << v.imag() << '\n';
        }
}

}  // namespace pucchsim
