// SPDX-License-Identifier: Apache-2.0
//
// Transmit and receive chains for PUCCH formats 0-4: both PF0 candidate
// structures (sequence based and DMRS based), both PF1 arrangements
// (extension and puncturing), PF2, PF3 and PF4 (PF3 with pre-DFT block
// spreading). Receivers perform LS + Wiener channel estimation, MRC
// combining, coherent or energy detection and a DTX decision.

#pragma once

#include <optional>

#include "pucchsim/channel.hpp"
#include "pucchsim/estimation.hpp"
#include "pucchsim/fec.hpp"
#include "pucchsim/phy.hpp"
#include "pucchsim/sequences.hpp"

namespace pucchsim {

enum class UciKind { HARQ1, HARQ2, SR, PAYLOAD };
enum class TxState { PRESENT, DTX };

struct UciMessage {
    UciKind kind = UciKind::HARQ1;
    bitvec bits;
    TxState tx_state = TxState::PRESENT;
};

enum class DetectedState { DETECTED, DTX };

struct Decision {
    DetectedState detected_state = DetectedState::DTX;
    bitvec bits;          // empty when DTX
    double metric = 0.0;  // detection/confidence metric (noise-normalized)
    int crc_pass = -1;    // -1 = n/a, 0 = fail, 1 = pass
};

// Receiver-side knobs shared by all formats. Detection metrics are
// normalized by the noise variance, so one calibrated threshold serves
// every SNR point of a sweep.
struct RxParams {
    double noise_var = 1.0;
    double threshold = 0.0;          // DTX gate on the normalized metric
    double assumed_tau_max_s = 0.0;  // uniform-PDP span for the Wiener prior
    double scs_hz = 15e3;
    int list_size = 8;               // polar list decoder
    const ChannelRealization* genie = nullptr;  // ideal channel knowledge
};

// ---------------------------------------------------------------------------
// Layouts
// ---------------------------------------------------------------------------

// PF0 gray mapping of information bits onto extra cyclic shift. Four
// (or two) shifts at maximum mutual distance; adjacent candidates differ
// in one bit.
inline int pf0_extra_shift(const bitvec& bits) {
    require(bits.size() == 1 || bits.size() == 2, "PF0 carries 1 or 2 bits");
    if (bits.size() == 1) return bits[0] ? 6 : 0;
    const int idx = bits[0] * 2 + bits[1];  // b0 b1: 00, 01, 10, 11
    static constexpr int shift[4] = {0, 3, 9, 6};  // 00->0, 01->3, 11->6, 10->9
    return shift[idx];
}

inline std::vector<bitvec> pf0_candidates(int n_bits) {
    require(n_bits == 1 || n_bits == 2, "PF0 carries 1 or 2 bits");
    std::vector<bitvec> out;
    if (n_bits == 1) {
        out.push_back({0});
        out.push_back({1});
    } else {
        out.push_back({0, 0});
        out.push_back({0, 1});
        out.push_back({1, 1});
        out.push_back({1, 0});
    }
    return out;
}

// DMRS-based PF0: DMRS and UCI interleaved in frequency over 2 PRBs,
// DMRS on even subcarriers (overhead 1/2).
inline PucchLayout pf0_dmrs_layout(const PucchConfig& cfg) {
    PucchLayout layout;
    const int n_sc = cfg.n_subcarriers();
    for (int s = 0; s < cfg.n_symbols; ++s)
        for (int k = 0; k < n_sc; ++k)
            ((k % 2 == 0) ? layout.dmrs : layout.uci).push_back(re_index(s, k, n_sc));
    return layout;
}

// PF1 symbol split. Extension: DMRS at even symbol indices, floor(n/2)
// UCI symbols. Puncturing: ceil(n/2)-1 DMRS symbols bundled into the
// middle (centered on floor(n/2)), UCI at both ends.
inline std::pair<std::vector<int>, std::vector<int>> pf1_symbol_split(int n_symbols,
                                                                      Pf1Method method) {
    require(n_symbols >= 4 && n_symbols <= 14, "PF1 spans 4-14 symbols");
    std::vector<int> dmrs, uci;
    if (method == Pf1Method::EXTENSION) {
        for (int s = 0; s < n_symbols; ++s) ((s % 2 == 0) ? dmrs : uci).push_back(s);
    } else {
        const int n_dmrs = (n_symbols + 1) / 2 - 1;
        const int start = n_symbols / 2 - (n_dmrs - 1) / 2;
        for (int s = 0; s < n_symbols; ++s)
            ((s >= start && s < start + n_dmrs) ? dmrs : uci).push_back(s);
    }
    return {dmrs, uci};
}

inline PucchLayout pf1_layout(const PucchConfig& cfg) {
    const auto [dmrs_syms, uci_syms] = pf1_symbol_split(cfg.n_symbols, cfg.pf1_method);
    PucchLayout layout;
    for (int s : uci_syms)
        for (int k = 0; k < k_sc_per_prb; ++k) layout.uci.push_back(re_index(s, k, k_sc_per_prb));
    for (int s : dmrs_syms)
        for (int k = 0; k < k_sc_per_prb; ++k) layout.dmrs.push_back(re_index(s, k, k_sc_per_prb));
    return layout;
}

// PF2 DMRS subcarriers within each PRB (evenly distributed patterns).
inline std::vector<int> pf2_dmrs_subcarriers(Pf2Overhead overhead, int n_prb) {
    static constexpr int half[6] = {0, 2, 4, 6, 8, 10};
    static constexpr int third[4] = {1, 4, 7, 10};
    static constexpr int quarter[3] = {1, 5, 9};
    std::vector<int> out;
    for (int p = 0; p < n_prb; ++p) {
        if (overhead == Pf2Overhead::HALF)
            for (int k : half) out.push_back(p * k_sc_per_prb + k);
        else if (overhead == Pf2Overhead::THIRD)
            for (int k : third) out.push_back(p * k_sc_per_prb + k);
        else
            for (int k : quarter) out.push_back(p * k_sc_per_prb + k);
    }
    return out;
}

inline PucchLayout pf2_layout(const PucchConfig& cfg) {
    const auto dmrs_sc = pf2_dmrs_subcarriers(cfg.pf2_overhead, cfg.n_prb);
    std::vector<uint8_t> is_dmrs(cfg.n_subcarriers(), 0);
    for (int k : dmrs_sc) is_dmrs[k] = 1;
    PucchLayout layout;
    for (int s = 0; s < cfg.n_symbols; ++s)
        for (int k = 0; k < cfg.n_subcarriers(); ++k)
            (is_dmrs[k] ? layout.dmrs : layout.uci).push_back(re_index(s, k, cfg.n_subcarriers()));
    return layout;
}

// PF3/PF4 DMRS symbol positions (no-hopping placements of TS 38.211;
// roughly n/4 and 3n/4 for two symbols). One DMRS symbol is the reduced
// overhead option for n <= 9, four symbols the high-mobility option for
// n >= 10.
inline std::vector<int> pf3_dmrs_symbols(int n_symbols, int n_dmrs) {
    require(n_symbols >= 4 && n_symbols <= 14, "PF3 spans 4-14 symbols");
    static constexpr int two_dmrs[15][2] = {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0},
                                            {0, 3}, {1, 4}, {1, 4}, {1, 5}, {1, 6},
                                            {2, 7}, {2, 7}, {2, 8}, {2, 9}, {3, 10}};
    static constexpr int four_dmrs[15][4] = {
        {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0},
        {1, 3, 6, 8}, {1, 3, 6, 9}, {1, 4, 7, 10}, {1, 4, 7, 11}, {1, 5, 8, 12}};
    if (n_symbols == 4) {
        require(n_dmrs == 1, "PF3: length 4 uses exactly 1 DMRS symbol");
        return {1};
    }
    if (n_dmrs == 1) {
        require(n_symbols <= 9, "PF3: 1 DMRS symbol only for lengths 4-9");
        return {n_symbols / 4};
    }
    if (n_dmrs == 2) return {two_dmrs[n_symbols][0], two_dmrs[n_symbols][1]};
    if (n_dmrs == 4) {
        require(n_symbols >= 10, "PF3: 4 DMRS symbols only for lengths 10-14");
        const auto& row = four_dmrs[n_symbols];
        return {row[0], row[1], row[2], row[3]};
    }
    throw std::invalid_argument("PF3: unsupported DMRS symbol count");
}

inline PucchLayout pf3_layout(const PucchConfig& cfg) {
    const auto dmrs_syms = pf3_dmrs_symbols(cfg.n_symbols, cfg.pf3_n_dmrs);
    std::vector<uint8_t> is_dmrs(cfg.n_symbols, 0);
    for (int s : dmrs_syms) is_dmrs[s] = 1;
    PucchLayout layout;
    const int n_sc = cfg.n_subcarriers();
    for (int s = 0; s < cfg.n_symbols; ++s)
        for (int k = 0; k < n_sc; ++k)
            (is_dmrs[s] ? layout.dmrs : layout.uci).push_back(re_index(s, k, n_sc));
    return layout;
}

// ---------------------------------------------------------------------------
// Shared receiver pieces
// ---------------------------------------------------------------------------

namespace detail {

// Noise-normalized correlation energy: each term is |<rx, ref>|^2 over
// n_ref unit-modulus reference samples, so a noise-only term divided by
// (n_ref * noise_var) is Exp(1). The mean over terms keeps the metric
// distribution independent of the antenna/symbol counts.
class GateMetric {
public:
    explicit GateMetric(double noise_var) : noise_var_(noise_var) {}
    void add(const cd& corr, int n_ref) {
        sum_ += std::norm(corr) / (n_ref * noise_var_);
        ++terms_;
    }
    double value() const { return terms_ ? sum_ / terms_ : 0.0; }

private:
    double noise_var_;
    double sum_ = 0.0;
    int terms_ = 0;
};

inline bitvec slice_bits(const cd& z, int n_bits) {
    if (n_bits == 1) return {static_cast<uint8_t>(z.real() < 0.0)};
    return {static_cast<uint8_t>(z.real() < 0.0), static_cast<uint8_t>(z.imag() < 0.0)};
}

// NR-style pseudo-random DMRS seed for PF2.
inline uint32_t pf2_dmrs_cinit(int slot, int symbol_in_slot, int id) {
    const uint64_t v =
        (uint64_t(1) << 17) * (k_symbols_per_slot * uint64_t(slot) + symbol_in_slot + 1) *
            (2 * uint64_t(id) + 1) +
        2 * uint64_t(id);
    return static_cast<uint32_t>(v & 0x7fffffffu);
}

inline uint32_t pf3_scramble_cinit(int rnti, int id) {
    return static_cast<uint32_t>(((uint64_t(rnti) << 15) + uint64_t(id)) & 0x7fffffffu);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PF0, sequence based
// ---------------------------------------------------------------------------

inline ResourceGrid pf0_seq_tx(const UciMessage& msg, const PucchConfig& cfg) {
    cfg.validate();
    require(cfg.format == PucchFormat::PF0 && cfg.pf0_structure == Pf0Structure::SEQUENCE,
            "pf0_seq_tx: config is not sequence-based PF0");
    ResourceGrid grid(cfg.n_symbols, cfg.n_subcarriers(), 1);
    if (msg.tx_state == TxState::DTX) return grid;
    require(msg.bits.size() >= 1 && msg.bits.size() <= 2, "pf0_seq_tx: payload is 1-2 bits");
    const int alpha = (cfg.cyclic_shift + pf0_extra_shift(msg.bits)) % 12;
    const cvec seq = apply_cyclic_shift(generate_base_sequence(cfg.group_index), alpha);
    for (int s = 0; s < cfg.n_symbols; ++s)
        for (int k = 0; k < k_sc_per_prb; ++k) grid.at(0, s, k) = seq[k];
    return grid;
}

inline Decision pf0_seq_detect(const ResourceGrid& rx, const PucchConfig& cfg, int n_bits,
                               const RxParams& params) {
    const auto candidates = pf0_candidates(n_bits);
    const BaseSequence base = generate_base_sequence(cfg.group_index);

    double best_metric = -1.0;
    size_t best = 0;
    for (size_t c = 0; c < candidates.size(); ++c) {
        const int alpha = (cfg.cyclic_shift + pf0_extra_shift(candidates[c])) % 12;
        const cvec ref = apply_cyclic_shift(base, alpha);
        detail::GateMetric metric(params.noise_var);
        for (int a = 0; a < rx.n_ports(); ++a)
            for (int s = 0; s < rx.n_symbols; ++s) {
                cd corr{0.0, 0.0};
                for (int k = 0; k < k_sc_per_prb; ++k)
                    corr += rx.at(a, s, k) * std::conj(ref[k]);
                metric.add(corr, k_sc_per_prb);
            }
        if (metric.value() > best_metric) {
            best_metric = metric.value();
            best = c;
        }
    }
    Decision d;
    d.metric = best_metric;
    if (best_metric > params.threshold) {
        d.detected_state = DetectedState::DETECTED;
        d.bits = candidates[best];
    }
    return d;
}

// ---------------------------------------------------------------------------
// PF0, DMRS based (2 PRB study mode)
// ---------------------------------------------------------------------------

inline ResourceGrid pf0_dmrs_tx(const UciMessage& msg, const PucchConfig& cfg) {
    cfg.validate();
    require(cfg.format == PucchFormat::PF0 && cfg.pf0_structure == Pf0Structure::DMRS,
            "pf0_dmrs_tx: config is not DMRS-based PF0");
    const PucchLayout layout = pf0_dmrs_layout(cfg);
    if (msg.tx_state == TxState::DTX) return ResourceGrid(cfg.n_symbols, cfg.n_subcarriers(), 1);
    require(msg.bits.size() >= 1 && msg.bits.size() <= 2, "pf0_dmrs_tx: payload is 1-2 bits");

    const cvec seq = apply_cyclic_shift(generate_base_sequence(cfg.group_index), cfg.cyclic_shift);
    const cd d = modulate(msg.bits, msg.bits.size() == 1 ? Modulation::BPSK : Modulation::QPSK)[0];
    cvec uci_res, dmrs_res;
    for (int s = 0; s < cfg.n_symbols; ++s)
        for (int k = 0; k < k_sc_per_prb; ++k) {
            dmrs_res.push_back(seq[k]);
            uci_res.push_back(d * seq[k]);
        }
    return map_pucch(cfg, uci_res, dmrs_res, layout);
}

inline Decision pf0_dmrs_detect(const ResourceGrid& rx, const PucchConfig& cfg, int n_bits,
                                const RxParams& params) {
    const PucchLayout layout = pf0_dmrs_layout(cfg);
    const cvec seq = apply_cyclic_shift(generate_base_sequence(cfg.group_index), cfg.cyclic_shift);
    const int n_sc = cfg.n_subcarriers();

    std::vector<int> pilot_sc, uci_sc;
    for (int k = 0; k < n_sc; ++k) ((k % 2 == 0) ? pilot_sc : uci_sc).push_back(k);
    std::optional<WienerFilter> wiener;
    if (!params.genie)
        wiener.emplace(pilot_sc, n_sc, params.scs_hz, params.assumed_tau_max_s,
                       params.noise_var);

    detail::GateMetric gate(params.noise_var);
    cd z{0.0, 0.0};
    cvec ls(pilot_sc.size());
    for (int a = 0; a < rx.n_ports(); ++a)
        for (int s = 0; s < rx.n_symbols; ++s) {
            cd corr{0.0, 0.0};
            for (size_t i = 0; i < pilot_sc.size(); ++i) {
                const cd v = rx.at(a, s, pilot_sc[i]) * std::conj(seq[i % k_sc_per_prb]);
                ls[i] = v;
                corr += v;
            }
            gate.add(corr, static_cast<int>(pilot_sc.size()));
            cvec est;
            if (params.genie) {
                est.resize(n_sc);
                for (int k = 0; k < n_sc; ++k) est[k] = params.genie->at(a, s, k);
            } else {
                est = wiener->apply(ls);
            }
            // matched-filter accumulation of the spread UCI REs
            for (size_t i = 0; i < uci_sc.size(); ++i) {
                const int k = uci_sc[i];
                z += std::conj(est[k] * seq[i % k_sc_per_prb]) * rx.at(a, s, k);
            }
        }

    Decision d;
    d.metric = gate.value();
    if (d.metric > params.threshold) {
        d.detected_state = DetectedState::DETECTED;
        d.bits = detail::slice_bits(z, n_bits);
    }
    return d;
}

// ---------------------------------------------------------------------------
// PF1
// ---------------------------------------------------------------------------

inline ResourceGrid pf1_tx(const UciMessage& msg, const PucchConfig& cfg) {
    cfg.validate();
    require(cfg.format == PucchFormat::PF1, "pf1_tx: config is not PF1");
    ResourceGrid grid(cfg.n_symbols, k_sc_per_prb, 1);
    if (msg.tx_state == TxState::DTX) return grid;
    require(msg.bits.size() >= 1 && msg.bits.size() <= 2, "pf1_tx: payload is 1-2 bits");

    const auto [dmrs_syms, uci_syms] = pf1_symbol_split(cfg.n_symbols, cfg.pf1_method);
    const int n_uci = static_cast<int>(uci_syms.size());
    const int n_dmrs = static_cast<int>(dmrs_syms.size());
    require(cfg.time_occ_index < std::min(n_uci, n_dmrs),
            "pf1_tx: time OCC index exceeds the spreading length");
    const OccVector occ_u = detail::dft_occ(cfg.time_occ_index, n_uci);
    const OccVector occ_d = detail::dft_occ(cfg.time_occ_index, n_dmrs);
    const cvec seq = apply_cyclic_shift(generate_base_sequence(cfg.group_index), cfg.cyclic_shift);
    const cd d = modulate(msg.bits, msg.bits.size() == 1 ? Modulation::BPSK : Modulation::QPSK)[0];

    for (int m = 0; m < n_dmrs; ++m)
        for (int k = 0; k < k_sc_per_prb; ++k)
            grid.at(0, dmrs_syms[m], k) = occ_d.samples[m] * seq[k];
    for (int m = 0; m < n_uci; ++m)
        for (int k = 0; k < k_sc_per_prb; ++k)
            grid.at(0, uci_syms[m], k) = d * occ_u.samples[m] * seq[k];
    return grid;
}

inline Decision pf1_detect(const ResourceGrid& rx, const PucchConfig& cfg, int n_bits,
                           const RxParams& params) {
    const auto [dmrs_syms, uci_syms] = pf1_symbol_split(cfg.n_symbols, cfg.pf1_method);
    const int n_uci = static_cast<int>(uci_syms.size());
    const int n_dmrs = static_cast<int>(dmrs_syms.size());
    const OccVector occ_u = detail::dft_occ(cfg.time_occ_index, n_uci);
    const OccVector occ_d = detail::dft_occ(cfg.time_occ_index, n_dmrs);
    const cvec seq = apply_cyclic_shift(generate_base_sequence(cfg.group_index), cfg.cyclic_shift);

    std::vector<int> all_sc(k_sc_per_prb);
    for (int k = 0; k < k_sc_per_prb; ++k) all_sc[k] = k;
    std::optional<WienerFilter> wiener;
    if (!params.genie)
        wiener.emplace(all_sc, k_sc_per_prb, params.scs_hz, params.assumed_tau_max_s,
                       params.noise_var);

    detail::GateMetric gate(params.noise_var);
    cd z{0.0, 0.0};
    dvec dmrs_times(n_dmrs);
    for (int m = 0; m < n_dmrs; ++m) dmrs_times[m] = dmrs_syms[m];

    for (int a = 0; a < rx.n_ports(); ++a) {
        // per-DMRS-symbol LS (own OCC removed), then Wiener smoothing
        std::vector<cvec> est(n_dmrs);
        for (int m = 0; m < n_dmrs; ++m) {
            cvec ls(k_sc_per_prb);
            cd corr{0.0, 0.0};
            for (int k = 0; k < k_sc_per_prb; ++k) {
                ls[k] = rx.at(a, dmrs_syms[m], k) *
                        std::conj(seq[k] * occ_d.samples[m]);
                corr += ls[k];
            }
            gate.add(corr, k_sc_per_prb);
            if (params.genie) {
                est[m].resize(k_sc_per_prb);
                for (int k = 0; k < k_sc_per_prb; ++k)
                    est[m][k] = params.genie->at(a, dmrs_syms[m], k);
            } else {
                est[m] = wiener->apply(ls);
            }
        }

        // Channel at the UCI symbols: extension interpolates between the
        // neighboring DMRS symbols; puncturing extrapolates the central
        // block (block average, i.e. a static fit over the bundle).
        for (int m = 0; m < n_uci; ++m) {
            const int sym = uci_syms[m];
            cvec h_uci(k_sc_per_prb);
            if (params.genie) {
                for (int k = 0; k < k_sc_per_prb; ++k) h_uci[k] = params.genie->at(a, sym, k);
            } else if (cfg.pf1_method == Pf1Method::PUNCTURING) {
                for (int k = 0; k < k_sc_per_prb; ++k) {
                    cd acc{0.0, 0.0};
                    for (int i = 0; i < n_dmrs; ++i) acc += est[i][k];
                    h_uci[k] = acc / static_cast<double>(n_dmrs);
                }
            } else {
                cvec vals(n_dmrs);
                for (int k = 0; k < k_sc_per_prb; ++k) {
                    for (int i = 0; i < n_dmrs; ++i) vals[i] = est[i][k];
                    h_uci[k] = interp_time(dmrs_times, vals, sym);
                }
            }
            for (int k = 0; k < k_sc_per_prb; ++k)
                z += std::conj(h_uci[k] * seq[k] * occ_u.samples[m]) * rx.at(a, sym, k);
        }
    }

    Decision d;
    d.metric = gate.value();
    if (d.metric > params.threshold) {
        d.detected_state = DetectedState::DETECTED;
        d.bits = detail::slice_bits(z, n_bits);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Coding helpers shared by PF2/PF3/PF4
// ---------------------------------------------------------------------------

// Encode K payload bits into E rate-matched coded bits using the UCI
// coding split (Reed-Muller for 3-11 bits, CRC-aided polar for >= 12).
inline bitvec encode_uci_payload(const bitvec& bits, int target_bits) {
    const int k = static_cast<int>(bits.size());
    require(k >= 3, "UCI block coding requires more than 2 bits");
    if (k <= 11) return rate_match(rm32_encode(bits, k), target_bits);
    return polar_encode(crc_attach(bits, k), target_bits);
}

// Decode E LLRs back to K payload bits. Returns bits, a detection flag
// (CRC for the polar path, normalized-correlation confidence vs the
// threshold for the small-block path) and the confidence metric.
struct UciDecodeResult {
    bitvec bits;
    bool detected = false;
    int crc_pass = -1;
    double metric = 0.0;
};

inline UciDecodeResult decode_uci_payload(const dvec& llrs, int payload_bits,
                                          const RxParams& params) {
    UciDecodeResult out;
    if (payload_bits <= 11) {
        // fold repeated transmissions of the 32-bit codeword
        dvec folded(32, 0.0);
        for (size_t i = 0; i < llrs.size(); ++i) folded[i % 32] += llrs[i];
        auto [bits, conf] = rm32_decode_soft(folded, payload_bits);
        out.bits = std::move(bits);
        out.metric = conf;
        out.detected = conf > params.threshold;
    } else {
        auto [bits, crc] = polar_decode(llrs, payload_bits, params.list_size);
        out.bits = std::move(bits);
        out.crc_pass = crc ? 1 : 0;
        out.metric = crc ? 1.0 : 0.0;
        out.detected = crc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// PF2
// ---------------------------------------------------------------------------

// Rate-matched codeword size for one PF2 symbol (QPSK).
inline int pf2_codeword_bits(const PucchConfig& cfg) {
    const int n_dmrs_sc = static_cast<int>(pf2_dmrs_subcarriers(cfg.pf2_overhead, cfg.n_prb).size());
    return 2 * (cfg.n_subcarriers() - n_dmrs_sc);
}

inline cvec pf2_dmrs_values(const PucchConfig& cfg, int symbol) {
    const int n_dmrs_sc = static_cast<int>(pf2_dmrs_subcarriers(cfg.pf2_overhead, cfg.n_prb).size());
    const uint32_t cinit = detail::pf2_dmrs_cinit(cfg.slot_index, cfg.start_symbol + symbol,
                                                  cfg.scrambling_id);
    return modulate(gold_bits(cinit, 2 * n_dmrs_sc), Modulation::QPSK);
}

// Coded bits are QPSK mapped directly onto the UCI REs; a UE-specific
// pseudo-random DMRS is embedded per symbol. A second symbol repeats the
// UCI content with its own DMRS seed.
inline ResourceGrid pf2_tx(const UciMessage& msg, const PucchConfig& cfg) {
    cfg.validate();
    require(cfg.format == PucchFormat::PF2, "pf2_tx: config is not PF2");
    if (msg.tx_state == TxState::DTX) return ResourceGrid(cfg.n_symbols, cfg.n_subcarriers(), 1);
    require(msg.bits.size() > 2, "pf2_tx: PF2 carries more than 2 bits");

    const PucchLayout layout = pf2_layout(cfg);
    const int e_bits = pf2_codeword_bits(cfg);
    const cvec uci_syms = modulate(encode_uci_payload(msg.bits, e_bits), Modulation::QPSK);

    cvec uci_res, dmrs_res;
    for (int s = 0; s < cfg.n_symbols; ++s) {
        uci_res.insert(uci_res.end(), uci_syms.begin(), uci_syms.end());
        const cvec dmrs = pf2_dmrs_values(cfg, s);
        dmrs_res.insert(dmrs_res.end(), dmrs.begin(), dmrs.end());
    }
    return map_pucch(cfg, uci_res, dmrs_res, layout);
}

inline Decision pf2_decode(const ResourceGrid& rx, const PucchConfig& cfg, int payload_bits,
                           const RxParams& params) {
    const int n_sc = cfg.n_subcarriers();
    const auto pilot_sc = pf2_dmrs_subcarriers(cfg.pf2_overhead, cfg.n_prb);
    std::vector<int> uci_sc;
    {
        std::vector<uint8_t> is_dmrs(n_sc, 0);
        for (int k : pilot_sc) is_dmrs[k] = 1;
        for (int k = 0; k < n_sc; ++k)
            if (!is_dmrs[k]) uci_sc.push_back(k);
    }
    std::optional<WienerFilter> wiener;
    if (!params.genie)
        wiener.emplace(pilot_sc, n_sc, params.scs_hz, params.assumed_tau_max_s,
                       params.noise_var);

    const int e_bits = pf2_codeword_bits(cfg);
    dvec llrs(e_bits, 0.0);
    for (int s = 0; s < cfg.n_symbols; ++s) {
        const cvec dmrs = pf2_dmrs_values(cfg, s);
        std::vector<cvec> rx_uci(rx.n_ports(), cvec(uci_sc.size()));
        std::vector<cvec> h_uci(rx.n_ports(), cvec(uci_sc.size()));
        for (int a = 0; a < rx.n_ports(); ++a) {
            cvec est;
            if (params.genie) {
                est.resize(n_sc);
                for (int k = 0; k < n_sc; ++k) est[k] = params.genie->at(a, s, k);
            } else {
                cvec ls(pilot_sc.size());
                for (size_t i = 0; i < pilot_sc.size(); ++i)
                    ls[i] = rx.at(a, s, pilot_sc[i]) * std::conj(dmrs[i]);
                est = wiener->apply(ls);
            }
            for (size_t i = 0; i < uci_sc.size(); ++i) {
                rx_uci[a][i] = rx.at(a, s, uci_sc[i]);
                h_uci[a][i] = est[uci_sc[i]];
            }
        }
        auto [y, gain] = equalize_mrc(rx_uci, h_uci);
        const double s2 = std::sqrt(2.0);
        for (size_t i = 0; i < y.size(); ++i) {
            const double scale = 2.0 * s2 * gain[i] / params.noise_var;
            llrs[2 * i] += scale * y[i].real();
            llrs[2 * i + 1] += scale * y[i].imag();
        }
    }

    const UciDecodeResult res = decode_uci_payload(llrs, payload_bits, params);
    Decision d;
    d.metric = res.metric;
    d.crc_pass = res.crc_pass;
    if (res.detected) {
        d.detected_state = DetectedState::DETECTED;
        d.bits = res.bits;
    }
    return d;
}

// ---------------------------------------------------------------------------
// PF3 / PF4
// ---------------------------------------------------------------------------

// Modulation symbols carried per UCI OFDM symbol (after optional PF4
// block spreading).
inline int pf3_data_symbols_per_ofdm_symbol(const PucchConfig& cfg) {
    const int block = cfg.n_subcarriers();
    if (cfg.format == PucchFormat::PF4) return block / cfg.pre_dft_occ.length;
    return block;
}

inline int pf3_codeword_bits(const PucchConfig& cfg) {
    const int n_uci_syms =
        cfg.n_symbols - static_cast<int>(pf3_dmrs_symbols(cfg.n_symbols, cfg.pf3_n_dmrs).size());
    const int bits_per_sym = cfg.modulation == Modulation::PI2_BPSK ? 1 : 2;
    return bits_per_sym * pf3_data_symbols_per_ofdm_symbol(cfg) * n_uci_syms;
}

// DMRS cyclic shift; PF4 users move in steps of 12/L so their pilots
// stay orthogonal.
inline int pf3_dmrs_shift(const PucchConfig& cfg) {
    if (cfg.format == PucchFormat::PF4)
        return (cfg.cyclic_shift + cfg.pre_dft_occ.index * (12 / cfg.pre_dft_occ.length)) % 12;
    return cfg.cyclic_shift;
}

inline cvec pf3_dmrs_values(const PucchConfig& cfg) {
    const cvec seq =
        apply_cyclic_shift(generate_base_sequence(cfg.group_index), pf3_dmrs_shift(cfg));
    cvec out;
    out.reserve(cfg.n_subcarriers());
    for (int p = 0; p < cfg.n_prb; ++p) out.insert(out.end(), seq.begin(), seq.end());
    return out;
}

// Encode, scramble, modulate, block-spread (PF4) and DFT-precode the UCI
// bits; DMRS symbols carry the low-PAPR sequence.
inline ResourceGrid pf3_tx(const UciMessage& msg, const PucchConfig& cfg) {
    cfg.validate();
    require(cfg.format == PucchFormat::PF3 || cfg.format == PucchFormat::PF4,
            "pf3_tx: config is not PF3/PF4");
    require(cfg.modulation != Modulation::BPSK, "pf3_tx: modulation is QPSK or pi/2-BPSK");
    const int n_sc = cfg.n_subcarriers();
    if (msg.tx_state == TxState::DTX) return ResourceGrid(cfg.n_symbols, n_sc, 1);
    require(msg.bits.size() > 2, "pf3_tx: PF3/PF4 carry more than 2 bits");

    const auto dmrs_syms = pf3_dmrs_symbols(cfg.n_symbols, cfg.pf3_n_dmrs);
    const int e_bits = pf3_codeword_bits(cfg);
    bitvec coded = encode_uci_payload(msg.bits, e_bits);
    const bitvec scramble =
        gold_bits(detail::pf3_scramble_cinit(cfg.rnti, cfg.scrambling_id), e_bits);
    for (int i = 0; i < e_bits; ++i) coded[i] ^= scramble[i];
    const cvec data = modulate(coded, cfg.modulation);

    const cvec dmrs = pf3_dmrs_values(cfg);
    std::vector<uint8_t> is_dmrs(cfg.n_symbols, 0);
    for (int s : dmrs_syms) is_dmrs[s] = 1;

    ResourceGrid grid(cfg.n_symbols, n_sc, 1);
    const int n_data = pf3_data_symbols_per_ofdm_symbol(cfg);
    size_t pos = 0;
    for (int s = 0; s < cfg.n_symbols; ++s) {
        if (is_dmrs[s]) {
            for (int k = 0; k < n_sc; ++k) grid.at(0, s, k) = dmrs[k];
            continue;
        }
        cvec block(n_sc);
        if (cfg.format == PucchFormat::PF4) {
            const OccVector occ = pre_dft_occ(cfg.pre_dft_occ.index, cfg.pre_dft_occ.length);
            for (int b = 0; b < cfg.pre_dft_occ.length; ++b)
                for (int i = 0; i < n_data; ++i)
                    block[b * n_data + i] = occ.samples[b] * data[pos + i];
        } else {
            for (int i = 0; i < n_data; ++i) block[i] = data[pos + i];
        }
        pos += n_data;
        const cvec precoded = dft_precode(block, n_sc);
        for (int k = 0; k < n_sc; ++k) grid.at(0, s, k) = precoded[k];
    }
    return grid;
}

inline Decision pf3_decode(const ResourceGrid& rx, const PucchConfig& cfg, int payload_bits,
                           const RxParams& params) {
    const int n_sc = cfg.n_subcarriers();
    const auto dmrs_syms = pf3_dmrs_symbols(cfg.n_symbols, cfg.pf3_n_dmrs);
    const int n_dmrs = static_cast<int>(dmrs_syms.size());
    const cvec dmrs = pf3_dmrs_values(cfg);

    std::vector<int> all_sc(n_sc);
    for (int k = 0; k < n_sc; ++k) all_sc[k] = k;
    std::optional<WienerFilter> wiener;
    if (!params.genie)
        wiener.emplace(all_sc, n_sc, params.scs_hz, params.assumed_tau_max_s, params.noise_var);

    // channel estimates at the DMRS symbols, then time interpolation
    std::vector<std::vector<cvec>> est(rx.n_ports(), std::vector<cvec>(n_dmrs));
    dvec dmrs_times(n_dmrs);
    for (int m = 0; m < n_dmrs; ++m) dmrs_times[m] = dmrs_syms[m];
    for (int a = 0; a < rx.n_ports(); ++a)
        for (int m = 0; m < n_dmrs; ++m) {
            if (params.genie) {
                est[a][m].resize(n_sc);
                for (int k = 0; k < n_sc; ++k) est[a][m][k] = params.genie->at(a, dmrs_syms[m], k);
                continue;
            }
            cvec ls(n_sc);
            for (int k = 0; k < n_sc; ++k)
                ls[k] = rx.at(a, dmrs_syms[m], k) * std::conj(dmrs[k]);
            est[a][m] = wiener->apply(ls);
        }

    std::vector<uint8_t> is_dmrs(cfg.n_symbols, 0);
    for (int s : dmrs_syms) is_dmrs[s] = 1;
    const int n_data = pf3_data_symbols_per_ofdm_symbol(cfg);
    const int bits_per_sym = cfg.modulation == Modulation::PI2_BPSK ? 1 : 2;
    const int e_bits = pf3_codeword_bits(cfg);

    dvec llrs;
    llrs.reserve(e_bits);
    std::vector<cvec> rx_sym(rx.n_ports(), cvec(n_sc));
    std::vector<cvec> h_sym(rx.n_ports(), cvec(n_sc));
    for (int s = 0; s < cfg.n_symbols; ++s) {
        if (is_dmrs[s]) continue;
        for (int a = 0; a < rx.n_ports(); ++a) {
            cvec vals(n_dmrs);
            for (int k = 0; k < n_sc; ++k) {
                rx_sym[a][k] = rx.at(a, s, k);
                if (params.genie) {
                    h_sym[a][k] = params.genie->at(a, s, k);
                } else {
                    for (int m = 0; m < n_dmrs; ++m) vals[m] = est[a][m][k];
                    h_sym[a][k] = interp_time(dmrs_times, vals, s);
                }
            }
        }
        auto [y, gain] = equalize_mrc(rx_sym, h_sym);
        // post-combining noise variance, flat across the block after the
        // inverse transform
        double nu = 0.0;
        for (int k = 0; k < n_sc; ++k) nu += params.noise_var / std::max(gain[k], 1e-12);
        nu /= n_sc;

        cvec block = inverse_dft_precode(y, n_sc);
        cvec data(n_data);
        if (cfg.format == PucchFormat::PF4) {
            const OccVector occ = pre_dft_occ(cfg.pre_dft_occ.index, cfg.pre_dft_occ.length);
            const int len = cfg.pre_dft_occ.length;
            for (int i = 0; i < n_data; ++i) {
                cd acc{0.0, 0.0};
                for (int b = 0; b < len; ++b)
                    acc += std::conj(occ.samples[b]) * block[b * n_data + i];
                data[i] = acc / static_cast<double>(len);
            }
            nu /= len;
        } else {
            for (int i = 0; i < n_data; ++i) data[i] = block[i];
        }

        const size_t base = llrs.size();
        llrs.resize(base + static_cast<size_t>(bits_per_sym) * n_data);
        if (cfg.modulation == Modulation::PI2_BPSK) {
            for (int i = 0; i < n_data; ++i) {
                const size_t global = base / bits_per_sym + i;
                const cd rot = (global % 2) ? cd{0.0, 1.0} : cd{1.0, 0.0};
                llrs[base + i] = 4.0 * (data[i] * std::conj(rot)).real() / nu;
            }
        } else {
            const double scale = 2.0 * std::sqrt(2.0) / nu;
            for (int i = 0; i < n_data; ++i) {
                llrs[base + 2 * i] = scale * data[i].real();
                llrs[base + 2 * i + 1] = scale * data[i].imag();
            }
        }
    }

    // descramble: a set scrambling bit flips the LLR sign
    const bitvec scramble =
        gold_bits(detail::pf3_scramble_cinit(cfg.rnti, cfg.scrambling_id), e_bits);
    for (int i = 0; i < e_bits; ++i)
        if (scramble[i]) llrs[i] = -llrs[i];

    const UciDecodeResult res = decode_uci_payload(llrs, payload_bits, params);
    Decision d;
    d.metric = res.metric;
    d.crc_pass = res.crc_pass;
    if (res.detected) {
        d.detected_state = DetectedState::DETECTED;
        d.bits = res.bits;
    }
    return d;
}

}  // namespace pucchsim
