// SPDX-License-Identifier: Apache-2.0
//
// TDL-C frequency-selective Rayleigh fading with Jakes Doppler,
// evaluated as a per-RE frequency response, plus AWGN.

#pragma once

#include <array>

#include "pucchsim/common.hpp"
#include "pucchsim/phy.hpp"
#include "pucchsim/rng.hpp"

namespace pucchsim {

// Tapped-delay-line profile; delays in seconds, powers linear, unit sum.
struct TdlProfile {
    dvec tap_delays;
    dvec tap_powers;
};

struct ChannelRealization {
    int n_rx = 0;
    int n_symbols = 0;
    int n_subcarriers = 0;
    double doppler_hz = 0.0;
    // response[a][s * n_subcarriers + k]
    std::vector<cvec> response;

    cd at(int rx, int symbol, int subcarrier) const {
        return response[rx][static_cast<size_t>(symbol) * n_subcarriers + subcarrier];
    }
};

namespace detail {

// Normalized TDL-C table (3GPP TR 38.901 Table 7.7.2-3): delay scaled by
// the RMS delay spread, power in dB.
inline constexpr int k_tdlc_taps = 24;
inline constexpr std::array<std::array<double, 2>, k_tdlc_taps> k_tdlc_table = {{
    {0.0000, -4.4},  {0.2099, -1.2},  {0.2219, -3.5},  {0.2329, -5.2},
    {0.2176, -2.5},  {0.6366, 0.0},   {0.6448, -2.2},  {0.6560, -3.9},
    {0.6584, -7.4},  {0.7935, -7.1},  {0.8213, -10.7}, {0.9336, -11.1},
    {1.2285, -5.1},  {1.3083, -6.8},  {2.1704, -8.7},  {2.7105, -13.2},
    {4.2589, -13.9}, {4.6003, -13.9}, {5.4902, -15.8}, {5.6077, -17.1},
    {6.3065, -16.0}, {6.6374, -15.7}, {7.0427, -21.6}, {8.6523, -22.8},
}};

}  // namespace detail

// Largest normalized delay of the embedded TDL-C table.
inline double tdl_c_max_normalized_delay() {
    double m = 0.0;
    for (const auto& row : detail::k_tdlc_table) m = std::max(m, row[0]);
    return m;
}

inline TdlProfile tdl_c_profile(double rms_delay_spread_s) {
    require(rms_delay_spread_s > 0.0, "tdl_c_profile: delay spread must be positive");
    TdlProfile p;
    p.tap_delays.reserve(detail::k_tdlc_taps);
    p.tap_powers.reserve(detail::k_tdlc_taps);
    double sum = 0.0;
    for (const auto& [delay, power_db] : detail::k_tdlc_table) {
        p.tap_delays.push_back(delay * rms_delay_spread_s);
        p.tap_powers.push_back(std::pow(10.0, power_db / 10.0));
        sum += p.tap_powers.back();
    }
    for (double& w : p.tap_powers) w /= sum;
    return p;
}

// Flat, static unit channel (AWGN-only scenarios).
inline TdlProfile flat_profile() { return TdlProfile{{0.0}, {1.0}}; }

inline double doppler_from_velocity(double velocity_kmh, double carrier_hz) {
    constexpr double c = 299792458.0;
    return (velocity_kmh / 3.6) * carrier_hz / c;
}

// Draws independent Rayleigh tap processes per receive antenna with a
// Jakes-style sum-of-sinusoids Doppler model and evaluates the frequency
// response on the allocated subcarriers at each symbol start time.
//
// Precomputes the tap-to-subcarrier phasors (delays are fixed per
// profile), so per-realization work is the Doppler synthesis plus one
// taps x subcarriers product.
class ChannelModel {
public:
    static constexpr int k_rays = 16;

    ChannelModel(TdlProfile profile, double velocity_kmh, double carrier_hz, double scs_hz,
                 int n_symbols, int start_symbol, int n_subcarriers, int n_rx)
        : ChannelModel(std::move(profile), velocity_kmh, carrier_hz, scs_hz, n_symbols,
                       start_symbol, uniform_freqs(n_subcarriers, scs_hz), n_rx) {}

    // Subcarrier frequencies are offsets in Hz from the allocation start.
    ChannelModel(TdlProfile profile, double velocity_kmh, double carrier_hz, double scs_hz,
                 int n_symbols, int start_symbol, const dvec& subcarrier_freqs, int n_rx)
        : profile_(std::move(profile)),
          n_symbols_(n_symbols),
          n_subcarriers_(static_cast<int>(subcarrier_freqs.size())),
          n_rx_(n_rx),
          doppler_hz_(doppler_from_velocity(velocity_kmh, carrier_hz)) {
        require(scs_hz > 0 && carrier_hz > 0, "channel: carrier/SCS must be positive");
        require(n_symbols >= 1 && n_subcarriers_ >= 1 && n_rx >= 1,
                "channel: dimensions must be positive");
        const int n_taps = static_cast<int>(profile_.tap_delays.size());
        // Symbol start times on a 1 ms / 14-symbol raster (15 kHz SCS slot).
        symbol_time_.resize(n_symbols);
        const double t_sym = 1e-3 / k_symbols_per_slot * (15e3 / scs_hz);
        for (int s = 0; s < n_symbols; ++s) symbol_time_[s] = (start_symbol + s) * t_sym;
        // exp(-j*2*pi*f_k*tau_t) for every tap/subcarrier pair.
        tap_phasor_.assign(n_taps, cvec(n_subcarriers_));
        for (int t = 0; t < n_taps; ++t)
            for (int k = 0; k < n_subcarriers_; ++k)
                tap_phasor_[t][k] = expj(-two_pi * subcarrier_freqs[k] * profile_.tap_delays[t]);
    }

    double doppler_hz() const { return doppler_hz_; }

    ChannelRealization realize(Rng& rng) const {
        const int n_taps = static_cast<int>(profile_.tap_delays.size());
        ChannelRealization h;
        h.n_rx = n_rx_;
        h.n_symbols = n_symbols_;
        h.n_subcarriers = n_subcarriers_;
        h.doppler_hz = doppler_hz_;
        h.response.assign(n_rx_, cvec(static_cast<size_t>(n_symbols_) * n_subcarriers_,
                                      cd{0.0, 0.0}));

        std::vector<cd> gain(n_symbols_);
        for (int a = 0; a < n_rx_; ++a) {
            for (int t = 0; t < n_taps; ++t) {
                // Jakes sum of sinusoids: equal-power rays with random
                // arrival angles (common rotation) and per-ray phases.
                const double theta = rng.uniform() * two_pi;
                const double dt =
                    symbol_time_.size() > 1 ? symbol_time_[1] - symbol_time_[0] : 0.0;
                std::array<cd, k_rays> ray;
                std::array<cd, k_rays> step;
                for (int r = 0; r < k_rays; ++r) {
                    const double alpha = (two_pi * r + theta) / k_rays;
                    const double phi = rng.uniform() * two_pi;
                    const double f = doppler_hz_ * std::cos(alpha);
                    // random phase advanced to the first symbol time
                    ray[r] = expj(phi + two_pi * f * symbol_time_[0]);
                    step[r] = expj(two_pi * f * dt);
                }
                const double amp = std::sqrt(profile_.tap_powers[t] / k_rays);
                for (int s = 0; s < n_symbols_; ++s) {
                    cd sum{0.0, 0.0};
                    for (int r = 0; r < k_rays; ++r) {
                        sum += ray[r];
                        ray[r] *= step[r];
                    }
                    gain[s] = amp * sum;
                }
                cd* resp = h.response[a].data();
                const cd* ph = tap_phasor_[t].data();
                for (int s = 0; s < n_symbols_; ++s) {
                    const cd g = gain[s];
                    for (int k = 0; k < n_subcarriers_; ++k)
                        resp[static_cast<size_t>(s) * n_subcarriers_ + k] += g * ph[k];
                }
            }
        }
        return h;
    }

    const TdlProfile& profile() const { return profile_; }

private:
    static dvec uniform_freqs(int n_subcarriers, double scs_hz) {
        dvec out(n_subcarriers);
        for (int k = 0; k < n_subcarriers; ++k) out[k] = k * scs_hz;
        return out;
    }

    TdlProfile profile_;
    int n_symbols_;
    int n_subcarriers_;
    int n_rx_;
    double doppler_hz_;
    dvec symbol_time_;
    std::vector<cvec> tap_phasor_;
};

// One-shot variant matching the functional interface; subcarrier_freqs
// are offsets in Hz from the allocation start.
inline ChannelRealization realize_channel(const TdlProfile& profile, double velocity_kmh,
                                          double carrier_hz, double scs_hz, int n_symbols,
                                          const dvec& subcarrier_freqs, int n_rx, Rng& rng) {
    require(!subcarrier_freqs.empty(), "realize_channel: no subcarriers");
    ChannelModel model(profile, velocity_kmh, carrier_hz, scs_hz, n_symbols, 0,
                       subcarrier_freqs, n_rx);
    return model.realize(rng);
}

// rx(a, s, k) = h(a, s, k) * tx(s, k)
inline ResourceGrid apply_channel(const ResourceGrid& tx, const ChannelRealization& h) {
    require(tx.n_symbols == h.n_symbols && tx.n_subcarriers == h.n_subcarriers,
            "apply_channel: dimension mismatch");
    require(tx.n_ports() == 1, "apply_channel: single transmit port expected");
    ResourceGrid rx(tx.n_symbols, tx.n_subcarriers, h.n_rx);
    const size_t n = tx.ports[0].size();
    for (int a = 0; a < h.n_rx; ++a)
        for (size_t i = 0; i < n; ++i) rx.ports[a][i] = h.response[a][i] * tx.ports[0][i];
    return rx;
}

inline ResourceGrid add_awgn(const ResourceGrid& grid, double noise_var, Rng& rng) {
    require(noise_var >= 0.0, "add_awgn: noise variance must be >= 0");
    ResourceGrid out = grid;
    if (noise_var == 0.0) return out;
    for (auto& port : out.ports)
        for (cd& x : port) x += rng.cgaussian(noise_var);
    return out;
}

}  // namespace pucchsim
