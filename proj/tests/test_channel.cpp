// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "pucchsim/channel.hpp"

using namespace pucchsim;

TEST_CASE("TDL-C profile") {
    SUBCASE("delays scale with the RMS delay spread") {
        const TdlProfile p = tdl_c_profile(100e-9);
        double max_delay = 0.0;
        for (double d : p.tap_delays) max_delay = std::max(max_delay, d);
        CHECK(max_delay == doctest::Approx(100e-9 * 8.6523));
    }
    SUBCASE("powers sum to one for the studied spreads") {
        for (double ns : {100.0, 300.0, 1000.0}) {
            const TdlProfile p = tdl_c_profile(ns * 1e-9);
            double sum = 0.0;
            for (double w : p.tap_powers) sum += w;
            CHECK(std::abs(sum - 1.0) < 1e-9);
        }
    }
    SUBCASE("doubling the spread doubles delays, powers unchanged") {
        const TdlProfile a = tdl_c_profile(100e-9);
        const TdlProfile b = tdl_c_profile(200e-9);
        for (size_t i = 0; i < a.tap_delays.size(); ++i) {
            CHECK(b.tap_delays[i] == doctest::Approx(2.0 * a.tap_delays[i]));
            CHECK(b.tap_powers[i] == doctest::Approx(a.tap_powers[i]));
        }
    }
    CHECK_THROWS_AS(tdl_c_profile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(tdl_c_profile(-1e-9), std::invalid_argument);
}

TEST_CASE("Doppler frequency") {
    // f_d = v * f_c / c
    CHECK(doppler_from_velocity(120.0, 4e9) == doctest::Approx(444.4).epsilon(0.002));
    CHECK(doppler_from_velocity(0.0, 4e9) == 0.0);
}

TEST_CASE("channel realizations") {
    SUBCASE("zero velocity freezes the response across symbols") {
        Rng rng(31);
        const ChannelModel model(tdl_c_profile(300e-9), 0.0, 4e9, 15e3, 14, 0, 12, 1);
        const ChannelRealization h = model.realize(rng);
        for (int s = 1; s < 14; ++s)
            for (int k = 0; k < 12; ++k)
                CHECK(std::abs(h.at(0, s, k) - h.at(0, 0, k)) < 1e-9);
    }
    SUBCASE("single tap at zero delay is flat in frequency") {
        Rng rng(32);
        const ChannelModel model(flat_profile(), 30.0, 4e9, 15e3, 4, 0, 24, 1);
        const ChannelRealization h = model.realize(rng);
        for (int s = 0; s < 4; ++s)
            for (int k = 1; k < 24; ++k)
                CHECK(std::abs(h.at(0, s, k) - h.at(0, s, 0)) < 1e-9);
    }
    SUBCASE("unit average power") {
        Rng rng(33);
        const ChannelModel model(tdl_c_profile(300e-9), 30.0, 4e9, 15e3, 2, 0, 12, 2);
        double acc = 0.0;
        int count = 0;
        for (int r = 0; r < 2000; ++r) {
            const ChannelRealization h = model.realize(rng);
            for (const auto& port : h.response)
                for (const cd& v : port) {
                    acc += std::norm(v);
                    ++count;
                }
        }
        CHECK(std::abs(acc / count - 1.0) < 0.04);
    }
    SUBCASE("frequency decorrelation grows with delay spread") {
        auto coherence = [](double spread_s) {
            Rng rng(34);
            const ChannelModel model(tdl_c_profile(spread_s), 3.0, 4e9, 15e3, 1, 0, 12, 1);
            cd acc{0.0, 0.0};
            double p0 = 0.0;
            for (int r = 0; r < 10000; ++r) {
                const ChannelRealization h = model.realize(rng);
                acc += h.at(0, 0, 0) * std::conj(h.at(0, 0, 5));
                p0 += std::norm(h.at(0, 0, 0));
            }
            return std::abs(acc) / p0;
        };
        CHECK(coherence(1000e-9) < coherence(100e-9));
    }
    SUBCASE("temporal decorrelation grows with velocity") {
        auto lag_corr = [](double v_kmh) {
            Rng rng(35);
            const ChannelModel model(tdl_c_profile(300e-9), v_kmh, 4e9, 15e3, 14, 0, 1, 1);
            cd acc{0.0, 0.0};
            double p0 = 0.0;
            for (int r = 0; r < 10000; ++r) {
                const ChannelRealization h = model.realize(rng);
                acc += h.at(0, 0, 0) * std::conj(h.at(0, 13, 0));
                p0 += std::norm(h.at(0, 0, 0));
            }
            return std::abs(acc) / p0;
        };
        CHECK(lag_corr(500.0) < lag_corr(3.0));
    }
    SUBCASE("antennas are uncorrelated") {
        Rng rng(36);
        const ChannelModel model(tdl_c_profile(300e-9), 3.0, 4e9, 15e3, 1, 0, 1, 2);
        cd acc{0.0, 0.0};
        double p = 0.0;
        for (int r = 0; r < 10000; ++r) {
            const ChannelRealization h = model.realize(rng);
            acc += h.at(0, 0, 0) * std::conj(h.at(1, 0, 0));
            p += std::norm(h.at(0, 0, 0));
        }
        CHECK(std::abs(acc) / p < 0.05);
    }
}

TEST_CASE("apply_channel") {
    ResourceGrid tx(2, 12, 1);
    Rng rng(37);
    for (cd& v : tx.ports[0]) v = rng.cgaussian(1.0);

    SUBCASE("unit channel is the identity") {
        ChannelRealization h;
        h.n_rx = 2;
        h.n_symbols = 2;
        h.n_subcarriers = 12;
        h.response.assign(2, cvec(24, cd{1.0, 0.0}));
        const ResourceGrid rx = apply_channel(tx, h);
        for (int a = 0; a < 2; ++a)
            for (size_t i = 0; i < tx.ports[0].size(); ++i)
                CHECK(std::abs(rx.ports[a][i] - tx.ports[0][i]) < 1e-12);
    }
    SUBCASE("multiplicative model") {
        const ChannelModel model(tdl_c_profile(300e-9), 30.0, 4e9, 15e3, 2, 0, 12, 2);
        const ChannelRealization h = model.realize(rng);
        const ResourceGrid rx = apply_channel(tx, h);
        for (int a = 0; a < 2; ++a)
            for (int s = 0; s < 2; ++s)
                for (int k = 0; k < 12; ++k)
                    CHECK(std::abs(rx.at(a, s, k)) ==
                          doctest::Approx(std::abs(h.at(a, s, k)) * std::abs(tx.at(0, s, k))));
        const ResourceGrid zero(2, 12, 1);
        const ResourceGrid rx0 = apply_channel(zero, h);
        for (const auto& port : rx0.ports)
            for (const cd& v : port) CHECK(std::abs(v) == 0.0);
    }
    SUBCASE("dimension mismatch is rejected") {
        ChannelRealization h;
        h.n_rx = 1;
        h.n_symbols = 1;
        h.n_subcarriers = 12;
        h.response.assign(1, cvec(12, cd{1.0, 0.0}));
        CHECK_THROWS_AS(apply_channel(tx, h), std::invalid_argument);
    }
}

TEST_CASE("AWGN") {
    ResourceGrid grid(10, 100, 1);  // 1000 REs
    SUBCASE("zero variance leaves the grid unchanged") {
        Rng rng(38);
        const ResourceGrid out = add_awgn(grid, 0.0, rng);
        for (const cd& v : out.ports[0]) CHECK(std::abs(v) == 0.0);
    }
    SUBCASE("sample variance matches, split evenly across re/im") {
        Rng rng(39);
        const double var = 0.37;
        double acc = 0.0, acc_re = 0.0, acc_im = 0.0;
        int n = 0;
        for (int rep = 0; rep < 100; ++rep) {
            const ResourceGrid out = add_awgn(grid, var, rng);
            for (const cd& v : out.ports[0]) {
                acc += std::norm(v);
                acc_re += v.real() * v.real();
                acc_im += v.imag() * v.imag();
                ++n;
            }
        }
        CHECK(std::abs(acc / n - var) / var < 0.02);
        CHECK(std::abs(acc_re / n - var / 2) / (var / 2) < 0.03);
        CHECK(std::abs(acc_im / n - var / 2) / (var / 2) < 0.03);
    }
    SUBCASE("negative variance is rejected") {
        Rng rng(40);
        CHECK_THROWS_AS(add_awgn(grid, -0.1, rng), std::invalid_argument);
    }
}

TEST_CASE("realize_channel functional form") {
    Rng rng(41);
    dvec freqs(12);
    for (int k = 0; k < 12; ++k) freqs[k] = k * 15e3;
    const ChannelRealization h =
        realize_channel(tdl_c_profile(100e-9), 3.0, 4e9, 15e3, 2, freqs, 2, rng);
    CHECK(h.n_rx == 2);
    CHECK(h.n_symbols == 2);
    CHECK(h.n_subcarriers == 12);
    CHECK(h.doppler_hz == doctest::Approx(doppler_from_velocity(3.0, 4e9)));

    SUBCASE("subcarrier frequencies are honored, not assumed uniform") {
        Rng r2(42);
        const ChannelRealization g = realize_channel(tdl_c_profile(1000e-9), 0.0, 4e9, 15e3, 1,
                                                     {0.0, 45e3, 45e3, 300e3}, 1, r2);
        CHECK(std::abs(g.at(0, 0, 1) - g.at(0, 0, 2)) < 1e-12);   // duplicate freq
        CHECK(std::abs(g.at(0, 0, 1) - g.at(0, 0, 0)) > 1e-6);    // distinct freq
    }
}
