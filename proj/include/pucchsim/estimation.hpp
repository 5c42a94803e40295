// SPDX-License-Identifier: Apache-2.0
//
// Pilot-based channel estimation (LS + Wiener smoothing in frequency,
// linear/nearest interpolation in time) and maximal-ratio combining.

#pragma once

#include <utility>

#include "pucchsim/common.hpp"

namespace pucchsim {

namespace detail {

// Frequency correlation of a uniform power-delay profile on [0, tau_max]:
// r(df) = exp(-j*pi*df*tau_max) * sinc(df*tau_max). tau_max = 0 gives a
// flat-channel prior (r = 1).
inline cd freq_correlation(double delta_f_hz, double tau_max_s) {
    const double x = delta_f_hz * tau_max_s;
    if (std::abs(x) < 1e-14) return {1.0, 0.0};
    const double s = std::sin(pi * x) / (pi * x);
    return expj(-pi * x) * s;
}

// Cholesky solve for a Hermitian positive definite system, in place.
// a is row-major n x n; b holds m right-hand sides of length n (columns).
class HermitianSolver {
public:
    explicit HermitianSolver(std::vector<cd> a, int n) : l_(std::move(a)), n_(n) {
        // diagonal loading keeps the factorization alive at zero noise
        double max_diag = 0.0;
        for (int i = 0; i < n_; ++i) max_diag = std::max(max_diag, l_[i * n_ + i].real());
        const double load = std::max(max_diag, 1.0) * 1e-9;
        for (int i = 0; i < n_; ++i) l_[i * n_ + i] += load;
        factor();
    }

    cvec solve(cvec b) const {
        // forward: L y = b
        for (int i = 0; i < n_; ++i) {
            cd acc = b[i];
            for (int j = 0; j < i; ++j) acc -= l_[i * n_ + j] * b[j];
            b[i] = acc / l_[i * n_ + i].real();
        }
        // backward: L^H x = y
        for (int i = n_ - 1; i >= 0; --i) {
            cd acc = b[i];
            for (int j = i + 1; j < n_; ++j) acc -= std::conj(l_[j * n_ + i]) * b[j];
            b[i] = acc / l_[i * n_ + i].real();
        }
        return b;
    }

private:
    void factor() {
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j <= i; ++j) {
                cd acc = l_[i * n_ + j];
                for (int k = 0; k < j; ++k)
                    acc -= l_[i * n_ + k] * std::conj(l_[j * n_ + k]);
                if (i == j) {
                    const double d = std::max(acc.real(), 1e-300);
                    l_[i * n_ + i] = std::sqrt(d);
                } else {
                    l_[i * n_ + j] = acc / l_[j * n_ + j].real();
                }
            }
        }
    }

    std::vector<cd> l_;
    int n_;
};

}  // namespace detail

// Wiener smoother in frequency for one OFDM symbol: LS estimates at the
// pilot subcarriers in, MMSE estimates at every allocated subcarrier out.
// Assumes a uniform power-delay profile on [0, tau_max] and white noise
// of the given variance on the LS pilots.
class WienerFilter {
public:
    WienerFilter(const std::vector<int>& pilot_subcarriers, int n_subcarriers, double scs_hz,
                 double tau_max_s, double noise_var) {
        require(!pilot_subcarriers.empty(), "wiener: empty pilot set");
        const int np = static_cast<int>(pilot_subcarriers.size());
        n_pilots_ = np;
        n_targets_ = n_subcarriers;
        std::vector<cd> rpp(static_cast<size_t>(np) * np);
        for (int i = 0; i < np; ++i)
            for (int j = 0; j < np; ++j) {
                cd v = detail::freq_correlation(
                    (pilot_subcarriers[i] - pilot_subcarriers[j]) * scs_hz, tau_max_s);
                if (i == j) v += noise_var;
                rpp[i * np + j] = v;
            }
        detail::HermitianSolver solver(std::move(rpp), np);
        weights_.assign(static_cast<size_t>(n_subcarriers) * np, cd{0.0, 0.0});
        // W = R_tp * Rpp^-1, computed one target row at a time
        cvec rhs(np);
        for (int t = 0; t < n_subcarriers; ++t) {
            for (int i = 0; i < np; ++i)
                rhs[i] = std::conj(detail::freq_correlation(
                    (t - pilot_subcarriers[i]) * scs_hz, tau_max_s));
            const cvec w = solver.solve(rhs);
            for (int i = 0; i < np; ++i)
                weights_[static_cast<size_t>(t) * np + i] = std::conj(w[i]);
        }
    }

    cvec apply(const cvec& ls_pilots) const {
        require(static_cast<int>(ls_pilots.size()) == n_pilots_, "wiener: pilot count mismatch");
        cvec out(n_targets_);
        for (int t = 0; t < n_targets_; ++t) {
            cd acc{0.0, 0.0};
            const cd* w = &weights_[static_cast<size_t>(t) * n_pilots_];
            for (int i = 0; i < n_pilots_; ++i) acc += w[i] * ls_pilots[i];
            out[t] = acc;
        }
        return out;
    }

private:
    int n_pilots_ = 0;
    int n_targets_ = 0;
    std::vector<cd> weights_;
};

// LS at the pilots followed by Wiener smoothing to every subcarrier of
// one OFDM symbol. dmrs_ref must be unit-modulus reference samples.
inline cvec estimate_channel_mmse(const cvec& dmrs_rx, const cvec& dmrs_ref,
                                  const std::vector<int>& positions, int n_subcarriers,
                                  double noise_var, double assumed_tau_max_s,
                                  double scs_hz = 15e3) {
    require(!positions.empty(), "estimate_channel_mmse: empty pilot set");
    require(dmrs_rx.size() == dmrs_ref.size() && dmrs_rx.size() == positions.size(),
            "estimate_channel_mmse: pilot vector size mismatch");
    cvec ls(dmrs_rx.size());
    for (size_t i = 0; i < ls.size(); ++i) ls[i] = dmrs_rx[i] * std::conj(dmrs_ref[i]);
    WienerFilter filter(positions, n_subcarriers, scs_hz, assumed_tau_max_s, noise_var);
    return filter.apply(ls);
}

// Linear interpolation between known time instants, nearest value beyond
// the ends. values[i] belongs to time known_times[i] (ascending).
inline cd interp_time(const dvec& known_times, const cvec& values, double t) {
    const size_t n = known_times.size();
    if (t <= known_times.front()) return values.front();
    if (t >= known_times.back()) return values.back();
    size_t hi = 1;
    while (hi < n && known_times[hi] < t) ++hi;
    const double t0 = known_times[hi - 1], t1 = known_times[hi];
    const double w = (t - t0) / (t1 - t0);
    return values[hi - 1] * (1.0 - w) + values[hi] * w;
}

// Maximal-ratio combining across antennas:
//   out(k) = sum_a conj(h_a(k)) rx_a(k) / (sum_a |h_a(k)|^2 + reg)
// Returned weights are sum_a |h_a(k)|^2, for post-combining LLR scaling.
inline std::pair<cvec, dvec> equalize_mrc(const std::vector<cvec>& rx_ports,
                                          const std::vector<cvec>& h_ports, double reg = 1e-12) {
    require(!rx_ports.empty() && rx_ports.size() == h_ports.size(),
            "equalize_mrc: antenna count mismatch");
    const size_t n = rx_ports[0].size();
    for (size_t a = 0; a < rx_ports.size(); ++a)
        require(rx_ports[a].size() == n && h_ports[a].size() == n,
                "equalize_mrc: vector length mismatch");
    cvec out(n, cd{0.0, 0.0});
    dvec gain(n, 0.0);
    for (size_t a = 0; a < rx_ports.size(); ++a)
        for (size_t k = 0; k < n; ++k) {
            out[k] += std::conj(h_ports[a][k]) * rx_ports[a][k];
            gain[k] += std::norm(h_ports[a][k]);
        }
    for (size_t k = 0; k < n; ++k) out[k] /= (gain[k] + reg);
    return {out, gain};
}

}  // namespace pucchsim
