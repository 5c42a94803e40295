// SPDX-License-Identifier: Apache-2.0
//
// UCI channel coding for payloads above 2 bits: CRC attachment, the
// (32, K) Reed-Muller small-block code, a CRC-aided polar code with
// successive-cancellation list decoding, and rate matching.
//
// Code split follows the NR UCI coding chain: Reed-Muller for 3..11
// payload bits, CRC-aided polar for 12 and more. 1-2 bit payloads are
// carried by the short formats without block coding and never enter
// this module.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <utility>

#include "pucchsim/common.hpp"

namespace pucchsim {

enum class CodeKind { SmallBlock, Polar };

struct UciCodeword {
    bitvec payload_bits;
    bitvec coded_bits;  // rate-matched, length E
    CodeKind code_kind = CodeKind::SmallBlock;
};

// ---------------------------------------------------------------------------
// CRC (generator polynomials of TS 38.212: CRC6 = x^6+x^5+1,
// CRC11 = x^11+x^10+x^9+x^5+1; no init value, no output inversion)
// ---------------------------------------------------------------------------

inline int crc_len(int payload_bits) {
    if (payload_bits <= 11) return 0;
    return payload_bits <= 19 ? 6 : 11;
}

namespace detail {

inline const bitvec& crc_poly(int crc_bits) {
    static const bitvec g6{1, 1, 0, 0, 0, 0, 1};
    static const bitvec g11{1, 1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1};
    return crc_bits == 6 ? g6 : g11;
}

inline bitvec crc_remainder(const bitvec& bits, int crc_bits) {
    const bitvec& g = crc_poly(crc_bits);
    bitvec work(bits);
    work.resize(bits.size() + crc_bits, 0);
    for (size_t i = 0; i + crc_bits < work.size(); ++i) {
        if (!work[i]) continue;
        for (int j = 0; j <= crc_bits; ++j) work[i + j] ^= g[j];
    }
    return bitvec(work.end() - crc_bits, work.end());
}

}  // namespace detail

inline bitvec crc_attach(const bitvec& bits, int payload_bits) {
    require(static_cast<int>(bits.size()) == payload_bits, "crc_attach: K != len(bits)");
    require(payload_bits >= 12, "crc_attach: CRC is only attached for K >= 12");
    const int c = crc_len(payload_bits);
    bitvec out(bits);
    const bitvec rem = detail::crc_remainder(bits, c);
    out.insert(out.end(), rem.begin(), rem.end());
    return out;
}

inline bool crc_check(const bitvec& word, int payload_bits) {
    const int c = crc_len(payload_bits);
    require(static_cast<int>(word.size()) == payload_bits + c,
            "crc_check: word length != K + crc_len(K)");
    const bitvec payload(word.begin(), word.begin() + payload_bits);
    const bitvec rem = detail::crc_remainder(payload, c);
    return std::equal(rem.begin(), rem.end(), word.begin() + payload_bits);
}

// ---------------------------------------------------------------------------
// (32, K) Reed-Muller block code, basis sequences of TS 38.212
// Table 5.3.3.3-1
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr std::array<std::array<uint8_t, 11>, 32> k_rm_basis = {{
    {1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1},
    {1, 1, 1, 0, 0, 0, 0, 0, 0, 1, 1},
    {1, 0, 0, 1, 0, 0, 1, 0, 1, 1, 1},
    {1, 0, 1, 1, 0, 0, 0, 0, 1, 0, 1},
    {1, 1, 1, 1, 0, 0, 0, 1, 0, 0, 1},
    {1, 1, 0, 0, 1, 0, 1, 1, 1, 0, 1},
    {1, 0, 1, 0, 1, 0, 1, 0, 1, 1, 1},
    {1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 1},
    {1, 1, 0, 1, 1, 0, 0, 1, 0, 1, 1},
    {1, 0, 1, 1, 1, 0, 1, 0, 0, 1, 1},
    {1, 0, 1, 0, 0, 1, 1, 1, 0, 1, 1},
    {1, 1, 1, 0, 0, 1, 1, 0, 1, 0, 1},
    {1, 0, 0, 1, 0, 1, 0, 1, 1, 1, 1},
    {1, 1, 0, 1, 0, 1, 0, 1, 0, 1, 1},
    {1, 0, 0, 0, 1, 1, 0, 1, 0, 0, 1},
    {1, 1, 0, 0, 1, 1, 1, 1, 0, 1, 1},
    {1, 1, 1, 0, 1, 1, 1, 0, 0, 1, 0},
    {1, 0, 0, 1, 1, 1, 0, 0, 1, 0, 0},
    {1, 1, 0, 1, 1, 1, 1, 1, 0, 0, 0},
    {1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0},
    {1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1},
    {1, 1, 0, 1, 0, 0, 0, 0, 0, 1, 1},
    {1, 0, 0, 0, 1, 0, 0, 1, 1, 0, 1},
    {1, 1, 1, 0, 1, 0, 0, 0, 1, 1, 1},
    {1, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0},
    {1, 1, 0, 0, 0, 1, 1, 1, 0, 0, 1},
    {1, 0, 1, 1, 0, 1, 0, 0, 1, 1, 0},
    {1, 1, 1, 1, 0, 1, 0, 1, 1, 1, 0},
    {1, 0, 1, 0, 1, 1, 1, 0, 1, 0, 0},
    {1, 0, 1, 1, 1, 1, 1, 1, 1, 0, 0},
    {1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0},
    {1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
}};

}  // namespace detail

inline bitvec rm32_encode(const bitvec& bits, int payload_bits) {
    require(payload_bits >= 3 && payload_bits <= 11, "rm32_encode: K out of [3, 11]");
    require(static_cast<int>(bits.size()) == payload_bits, "rm32_encode: K != len(bits)");
    bitvec out(32, 0);
    for (int i = 0; i < 32; ++i) {
        uint8_t b = 0;
        for (int k = 0; k < payload_bits; ++k) b ^= bits[k] & detail::k_rm_basis[i][k];
        out[i] = b;
    }
    return out;
}

// Exhaustive maximum-likelihood decoding over all 2^K codewords.
// Returns the decoded payload and the normalized correlation metric of
// the winner (in [-1, 1], used as a detection confidence by PF2).
// Candidates are enumerated by payload value; ties keep the lowest index.
inline std::pair<bitvec, double> rm32_decode_soft(const dvec& llrs, int payload_bits) {
    require(payload_bits >= 3 && payload_bits <= 11, "rm32_decode: K out of [3, 11]");
    require(llrs.size() == 32, "rm32_decode: expected 32 LLRs");
    // generator columns packed as uint32 (bit i = row i)
    uint32_t col[11] = {};
    for (int k = 0; k < payload_bits; ++k)
        for (int i = 0; i < 32; ++i) col[k] |= uint32_t(detail::k_rm_basis[i][k]) << i;

    const int n_cand = 1 << payload_bits;
    double best = -1e300;
    int best_idx = 0;
    uint32_t code = 0;  // gray-order enumeration keeps the XOR cheap
    int prev_gray = 0;
    for (int cand = 0; cand < n_cand; ++cand) {
        const int gray = cand ^ (cand >> 1);
        const int flipped = gray ^ prev_gray;
        if (flipped) {
            int k = 0;
            while (!((flipped >> k) & 1)) ++k;
            code ^= col[k];
        }
        prev_gray = gray;
        double m = 0.0;
        for (int i = 0; i < 32; ++i) m += ((code >> i) & 1) ? -llrs[i] : llrs[i];
        // ties resolve to the lowest candidate index
        if (m > best || (m == best && gray < best_idx)) {
            best = m;
            best_idx = gray;
        }
    }
    double denom = 0.0;
    for (double l : llrs) denom += std::abs(l);
    bitvec out(payload_bits);
    for (int k = 0; k < payload_bits; ++k) out[k] = (best_idx >> k) & 1;
    return {out, denom > 0.0 ? best / denom : 0.0};
}

inline bitvec rm32_decode(const dvec& llrs, int payload_bits) {
    return rm32_decode_soft(llrs, payload_bits).first;
}

// ---------------------------------------------------------------------------
// Rate matching
// ---------------------------------------------------------------------------

// E >= N: cyclic repetition out[i] = in[i mod N].
// E < N: shortening, out = first E coded bits. The polar construction
// freezes every input index >= E, which forces the dropped coded bits
// to zero (x_i depends only on u_j with j a bitwise superset of i), so
// the receiver treats them as known zeros.
inline bitvec rate_match(const bitvec& coded, int target_bits) {
    require(!coded.empty() && target_bits >= 1, "rate_match: N, E must be >= 1");
    const int n = static_cast<int>(coded.size());
    bitvec out(target_bits);
    for (int i = 0; i < target_bits; ++i) out[i] = coded[i % n];
    return out;
}

// ---------------------------------------------------------------------------
// CRC-aided polar code
// ---------------------------------------------------------------------------

namespace detail {

// Reliability by beta expansion (polarization weight): w(i) = sum of
// 2^(k/4) over set bits k of i. Higher weight = more reliable channel.
// All orders up to N = 512 are built once (thread-safe magic static).
inline const std::vector<int>& polar_reliability_ascending(int block_len) {
    static const std::array<std::vector<int>, 10> cache = [] {
        std::array<std::vector<int>, 10> tables;
        for (int n = 0; n < 10; ++n) {
            const int len = 1 << n;
            std::vector<double> w(len, 0.0);
            for (int i = 0; i < len; ++i)
                for (int k = 0; (1 << k) <= i; ++k)
                    if ((i >> k) & 1) w[i] += std::pow(2.0, 0.25 * k);
            tables[n].resize(len);
            for (int i = 0; i < len; ++i) tables[n][i] = i;
            std::stable_sort(tables[n].begin(), tables[n].end(),
                             [&](int a, int b) { return w[a] < w[b]; });
        }
        return tables;
    }();
    int n = 0;
    while ((1 << n) < block_len) ++n;
    return cache[n];
}

struct PolarCode {
    int n_info;      // K' = payload + CRC bits carried on the info set
    int n_coded;     // E, rate-matched length
    int block_len;   // mother code length N
    std::vector<int> info_positions;     // ascending
    std::vector<uint8_t> frozen;         // size N, 1 = frozen

    PolarCode(int k_info, int e_bits) : n_info(k_info), n_coded(e_bits) {
        require(e_bits >= k_info, "polar: insufficient rate, E < K + crc_len");
        // Mother length choice (TS 38.212 style, capped at 2^9 here):
        // shrink below ceil(log2 E) only when the repetition/rate slack
        // allows, clamp by 8K and the [32, 512] range.
        int n_temp = 0;
        while ((1 << (n_temp + 1)) < e_bits) ++n_temp;  // n_temp = ceil(log2 E) - 1
        int n1 = n_temp + 1;
        if (8 * e_bits <= 9 * (1 << n_temp) && 16 * k_info <= 9 * e_bits) n1 = n_temp;
        int n2 = 0;
        while ((1 << n2) < 8 * k_info) ++n2;
        int n = std::min(std::min(n1, n2), 9);
        n = std::max(n, 5);
        block_len = 1 << n;

        frozen.assign(block_len, 1);
        const auto& order = polar_reliability_ascending(block_len);
        // Shortened inputs (index >= E when E < N) stay frozen.
        int placed = 0;
        for (auto it = order.rbegin(); it != order.rend() && placed < n_info; ++it) {
            if (n_coded < block_len && *it >= n_coded) continue;
            frozen[*it] = 0;
            ++placed;
        }
        require(placed == n_info, "polar: not enough usable channels");
        for (int i = 0; i < block_len; ++i)
            if (!frozen[i]) info_positions.push_back(i);
    }

    // x = u * F^{(x)n}, natural (non bit-reversed) output order.
    static void butterfly_xor(bitvec& u) {
        const int n = static_cast<int>(u.size());
        for (int half = 1; half < n; half <<= 1)
            for (int i = 0; i < n; i += 2 * half)
                for (int j = 0; j < half; ++j) u[i + j] ^= u[i + j + half];
    }

    bitvec encode(const bitvec& info) const {
        require(static_cast<int>(info.size()) == n_info, "polar encode: bad info length");
        bitvec u(block_len, 0);
        for (int i = 0; i < n_info; ++i) u[info_positions[i]] = info[i];
        butterfly_xor(u);
        return rate_match(u, n_coded);
    }

    // Fold rate-matched LLRs back onto the mother code. Shortened
    // positions are known zeros (large positive LLR).
    dvec derate_llrs(const dvec& llrs) const {
        require(static_cast<int>(llrs.size()) == n_coded, "polar decode: bad LLR length");
        constexpr double k_known_zero = 1e30;
        dvec out(block_len, 0.0);
        if (n_coded >= block_len) {
            for (int i = 0; i < n_coded; ++i) out[i % block_len] += llrs[i];
        } else {
            for (int i = 0; i < n_coded; ++i) out[i] = llrs[i];
            for (int i = n_coded; i < block_len; ++i) out[i] = k_known_zero;
        }
        return out;
    }
};

// One successive-cancellation decoding path, stored flat so that path
// duplication is a handful of block copies. Stage s occupies
// [offset(s), offset(s) + (N >> s)) in each buffer. LLR convention:
// positive = bit 0 more likely. Path metric grows by |L| whenever the
// decision contradicts the LLR sign (standard log-domain approximation).
struct SclPath {
    dvec p;        // LLRs, all stages concatenated
    bitvec c0, c1; // partial sums per stage, even/odd phase
    bitvec u;      // decisions, size N
    double metric = 0.0;

    static double f(double a, double b) {
        const double s = (a < 0) == (b < 0) ? 1.0 : -1.0;
        return s * std::min(std::abs(a), std::abs(b));
    }
    static double g(double a, double b, uint8_t ua) { return ua ? b - a : b + a; }
};

class SclDecoder {
public:
    SclDecoder(const PolarCode& code, int list_size)
        : code_(code), list_size_(list_size) {
        require(list_size >= 1 && (list_size & (list_size - 1)) == 0,
                "polar decode: list size must be a power of two");
        n_stages_ = 0;
        while ((1 << n_stages_) < code.block_len) ++n_stages_;
        offset_.resize(n_stages_ + 1);
        int off = 0;
        for (int s = 0; s <= n_stages_; ++s) {
            offset_[s] = off;
            off += code.block_len >> s;
        }
        total_ = off;
    }

    // Returns paths sorted by metric (best first) as decided u-vectors.
    std::vector<std::pair<bitvec, double>> run(const dvec& channel_llrs) {
        paths_.clear();
        SclPath root;
        root.p.assign(total_, 0.0);
        root.c0.assign(total_, 0);
        root.c1.assign(total_, 0);
        std::copy(channel_llrs.begin(), channel_llrs.end(), root.p.begin());
        root.u.assign(code_.block_len, 0);
        paths_.push_back(std::move(root));

        for (int phase = 0; phase < code_.block_len; ++phase) {
            for (auto& path : paths_) calc_llr(path, n_stages_, phase);
            if (code_.frozen[phase]) {
                for (auto& path : paths_) {
                    const double l = path.p[offset_[n_stages_]];
                    if (l < 0) path.metric += -l;
                    set_bit(path, phase, 0);
                }
            } else {
                branch(phase);
            }
            if (phase & 1)
                for (auto& path : paths_) update_partial_sums(path, n_stages_, phase);
        }
        std::vector<std::pair<bitvec, double>> out;
        out.reserve(paths_.size());
        std::sort(paths_.begin(), paths_.end(),
                  [](const SclPath& a, const SclPath& b) { return a.metric < b.metric; });
        for (auto& p : paths_) out.emplace_back(std::move(p.u), p.metric);
        return out;
    }

private:
    void set_bit(SclPath& path, int phase, uint8_t bit) {
        path.u[phase] = bit;
        ((phase & 1) ? path.c1 : path.c0)[offset_[n_stages_]] = bit;
    }

    void branch(int phase) {
        struct Cand {
            int parent;
            uint8_t bit;
            double metric;
        };
        std::vector<Cand> cands;
        cands.reserve(paths_.size() * 2);
        for (int i = 0; i < static_cast<int>(paths_.size()); ++i) {
            const double l = paths_[i].p[offset_[n_stages_]];
            cands.push_back({i, 0, paths_[i].metric + (l < 0 ? -l : 0.0)});
            cands.push_back({i, 1, paths_[i].metric + (l > 0 ? l : 0.0)});
        }
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Cand& a, const Cand& b) { return a.metric < b.metric; });
        if (static_cast<int>(cands.size()) > list_size_) cands.resize(list_size_);

        std::vector<SclPath> next;
        next.reserve(cands.size());
        std::vector<int> uses(paths_.size(), 0);
        for (const auto& c : cands) ++uses[c.parent];
        for (const auto& c : cands) {
            if (--uses[c.parent] == 0)
                next.push_back(std::move(paths_[c.parent]));  // last user moves
            else
                next.push_back(paths_[c.parent]);
            next.back().metric = c.metric;
            set_bit(next.back(), phase, c.bit);
        }
        paths_ = std::move(next);
    }

    // Propagate LLRs down to the leaf stage for the given phase. The
    // natural-order encoder splits each segment into contiguous halves
    // (low = first ^ second, high = second), so stage s pairs element b
    // with b + len.
    void calc_llr(SclPath& path, int stage, int phase) {
        if (stage == 0) return;
        if ((phase & 1) == 0) calc_llr(path, stage - 1, phase >> 1);
        const int len = code_.block_len >> stage;
        const double* prev = path.p.data() + offset_[stage - 1];
        double* cur = path.p.data() + offset_[stage];
        if ((phase & 1) == 0) {
            for (int b = 0; b < len; ++b) cur[b] = SclPath::f(prev[b], prev[b + len]);
        } else {
            const uint8_t* c_even = path.c0.data() + offset_[stage];
            for (int b = 0; b < len; ++b)
                cur[b] = SclPath::g(prev[b], prev[b + len], c_even[b]);
        }
    }

    void update_partial_sums(SclPath& path, int stage, int phase) {
        const int psi = phase >> 1;
        const int len = code_.block_len >> stage;
        uint8_t* dst = ((psi & 1) ? path.c1 : path.c0).data() + offset_[stage - 1];
        const uint8_t* src0 = path.c0.data() + offset_[stage];
        const uint8_t* src1 = path.c1.data() + offset_[stage];
        for (int b = 0; b < len; ++b) {
            dst[b] = src0[b] ^ src1[b];
            dst[b + len] = src1[b];
        }
        if (psi & 1) update_partial_sums(path, stage - 1, psi);
    }

    const PolarCode& code_;
    int list_size_;
    int n_stages_ = 0;
    int total_ = 0;
    std::vector<int> offset_;
    std::vector<SclPath> paths_;
};

}  // namespace detail

// Encode CRC-appended bits into E rate-matched coded bits.
inline bitvec polar_encode(const bitvec& bits_with_crc, int target_bits) {
    const int k = static_cast<int>(bits_with_crc.size());
    require(k >= 12, "polar_encode: polar path requires K + CRC >= 12 bits");
    detail::PolarCode code(k, target_bits);
    return code.encode(bits_with_crc);
}

// List decoding; returns the most likely CRC-passing payload, else the
// most likely path with crc_pass = false. payload_bits excludes the CRC.
inline std::pair<bitvec, bool> polar_decode(const dvec& llrs, int payload_bits,
                                            int list_size = 8) {
    const int c = crc_len(payload_bits);
    const int k = payload_bits + c;
    detail::PolarCode code(k, static_cast<int>(llrs.size()));
    detail::SclDecoder decoder(code, list_size);
    const auto paths = decoder.run(code.derate_llrs(llrs));

    bitvec candidate(k);
    for (const auto& [u, metric] : paths) {
        for (int i = 0; i < k; ++i) candidate[i] = u[code.info_positions[i]];
        if (crc_check(candidate, payload_bits))
            return {bitvec(candidate.begin(), candidate.begin() + payload_bits), true};
    }
    const auto& [u, metric] = paths.front();
    for (int i = 0; i < k; ++i) candidate[i] = u[code.info_positions[i]];
    return {bitvec(candidate.begin(), candidate.begin() + payload_bits), false};
}

}  // namespace pucchsim
