// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "pucchsim/sim.hpp"

using namespace pucchsim;

namespace {

Scenario pf0_seq_awgn(int bits) {
    Scenario scn;
    scn.cfg.format = PucchFormat::PF0;
    scn.cfg.pf0_structure = Pf0Structure::SEQUENCE;
    scn.channel = ChannelKind::AWGN;
    scn.payload_bits = bits;
    scn.n_rx = 2;
    scn.dtx_fraction = 0.1;
    scn.dtx_threshold = 2.0;  // fixed gate, keeps tests calibration-free
    return scn;
}

bool records_equal(const MetricsRecord& a, const MetricsRecord& b) {
    return a.trials == b.trials && a.ack_sent == b.ack_sent && a.ack_to_nack == b.ack_to_nack &&
           a.ack_to_dtx == b.ack_to_dtx && a.nack_sent == b.nack_sent &&
           a.nack_to_ack == b.nack_to_ack && a.dtx_sent == b.dtx_sent &&
           a.dtx_to_ack == b.dtx_to_ack && a.block_errors == b.block_errors &&
           a.blocks == b.blocks;
}

// pool-adjacent-violators fit, non-increasing
dvec isotonic_non_increasing(const dvec& y, const dvec& w) {
    dvec val(y), weight(w);
    std::vector<int> len(y.size(), 1);
    size_t m = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        val[m] = y[i];
        weight[m] = w[i];
        len[m] = 1;
        while (m > 0 && val[m - 1] < val[m]) {
            const double tw = weight[m - 1] + weight[m];
            val[m - 1] = (val[m - 1] * weight[m - 1] + val[m] * weight[m]) / tw;
            weight[m - 1] = tw;
            len[m - 1] += len[m];
            --m;
        }
        ++m;
    }
    dvec out;
    for (size_t b = 0; b < m; ++b)
        for (int r = 0; r < len[b]; ++r) out.push_back(val[b]);
    return out;
}

}  // namespace

TEST_CASE("run_point basics") {
    Scenario scn = pf0_seq_awgn(2);

    SUBCASE("high SNR, no missed ACKs") {
        const MetricsRecord rec = run_point(scn, 60.0, 1000, 42);
        CHECK(rec.ack_sent > 0);
        CHECK(rec.ack_to_nack == 0);
        CHECK(rec.ack_to_dtx == 0);
        CHECK(rec.nack_to_ack == 0);
    }
    SUBCASE("identical scenario and seed reproduce bit-identical records") {
        const MetricsRecord a = run_point(scn, 3.0, 2000, 77);
        const MetricsRecord b = run_point(scn, 3.0, 2000, 77);
        CHECK(records_equal(a, b));
    }
    SUBCASE("worker count does not change the outcome") {
        const MetricsRecord a = run_point(scn, 3.0, 3000, 78, 1);
        const MetricsRecord b = run_point(scn, 3.0, 3000, 78, 3);
        CHECK(records_equal(a, b));
    }
    SUBCASE("counter conservation") {
        const MetricsRecord rec = run_point(scn, 0.0, 5000, 79);
        CHECK(rec.ack_sent + rec.nack_sent + rec.dtx_sent == rec.trials);
        CHECK(rec.trials == 5000);
    }
    SUBCASE("payload format counts blocks") {
        Scenario pf2;
        pf2.cfg.format = PucchFormat::PF2;
        pf2.cfg.n_symbols = 1;
        pf2.cfg.n_prb = 4;
        pf2.payload_bits = 20;
        pf2.channel = ChannelKind::AWGN;
        pf2.dtx_fraction = 0.1;
        const MetricsRecord rec = run_point(pf2, 60.0, 500, 80);
        CHECK(rec.blocks + rec.dtx_sent == rec.trials);
        CHECK(rec.block_errors == 0);
        CHECK(rec.dtx_to_ack == 0);
    }
}

TEST_CASE("sweep_snr") {
    Scenario scn = pf0_seq_awgn(1);
    scn.trials = 4000;

    SUBCASE("empty grid is rejected") {
        scn.snr_grid_db = {};
        CHECK_THROWS_AS(sweep_snr(scn), std::invalid_argument);
    }
    SUBCASE("single point gives a single record") {
        scn.snr_grid_db = {2.5};
        const auto recs = sweep_snr(scn);
        REQUIRE(recs.size() == 1);
        CHECK(recs[0].snr_db == 2.5);
    }
    SUBCASE("missed-ACK rate is monotone after isotonic smoothing") {
        scn.trials = 8000;
        scn.snr_grid_db = {-6, -4, -2, 0, 2, 4};
        const auto recs = sweep_snr(scn);
        dvec rate, weight;
        for (const auto& r : recs) {
            rate.push_back(r.missed_ack_ber());
            weight.push_back(double(r.ack_sent));
        }
        const dvec fit = isotonic_non_increasing(rate, weight);
        for (size_t i = 0; i < recs.size(); ++i) {
            const auto [lo, hi] =
                wilson_interval(recs[i].ack_to_nack + recs[i].ack_to_dtx, recs[i].ack_sent);
            CHECK(fit[i] >= lo - 1e-12);
            CHECK(fit[i] <= hi + 1e-12);
        }
    }
}

TEST_CASE("DTX threshold calibration") {
    Scenario scn = pf0_seq_awgn(2);
    scn.dtx_threshold = -1.0;
    scn.base_seed = 5;

    SUBCASE("median target") {
        const double thr = calibrate_dtx_threshold(scn, 0.5, 4000);
        Scenario gated = scn;
        gated.dtx_threshold = thr;
        gated.dtx_fraction = 0.999;  // almost every trial is noise-only
        const MetricsRecord rec = run_point(gated, 0.0, 4000, 99);
        const double fa = rec.dtx_to_ack_rate();
        CHECK(fa > 0.45);
        CHECK(fa < 0.55);
    }
    SUBCASE("one-percent target lands in the accepted band") {
        const double thr = calibrate_dtx_threshold(scn, 1e-2, 30000);
        Scenario gated = scn;
        gated.dtx_threshold = thr;
        gated.dtx_fraction = 0.999;
        const MetricsRecord rec = run_point(gated, 0.0, 30000, 100);
        const double fa = rec.dtx_to_ack_rate();
        CHECK(fa > 0.5e-2);
        CHECK(fa < 2.0e-2);
    }
    SUBCASE("insufficient samples are rejected") {
        CHECK_THROWS_AS(calibrate_dtx_threshold(scn, 1e-2, 100), std::invalid_argument);
        CHECK_THROWS_AS(calibrate_dtx_threshold(scn, 0.0, 1000), std::invalid_argument);
    }
    SUBCASE("calibration is deterministic") {
        CHECK(calibrate_dtx_threshold(scn, 0.1, 2000) == calibrate_dtx_threshold(scn, 0.1, 2000));
    }
}

TEST_CASE("analytic BER") {
    SUBCASE("frozen reference values") {
        CHECK(analytic_ber(AnalyticScheme::COHERENT_BPSK, 7.0) ==
              doctest::Approx(7.7267e-4).epsilon(1e-3));
        CHECK(analytic_ber(AnalyticScheme::NONCOH_ORTH_2, 10.0) ==
              doctest::Approx(3.36897e-3).epsilon(1e-6));
        CHECK(analytic_ber(AnalyticScheme::NONCOH_ORTH_4, 10.0) ==
              doctest::Approx(4.43712e-5).epsilon(1e-4));
    }
    SUBCASE("monotone decay to zero") {
        for (const auto scheme : {AnalyticScheme::COHERENT_BPSK, AnalyticScheme::COHERENT_QPSK,
                                  AnalyticScheme::NONCOH_ORTH_2, AnalyticScheme::NONCOH_ORTH_4}) {
            double prev = 1.0;
            for (double db = -2.0; db <= 16.0; db += 1.0) {
                const double ber = analytic_ber(scheme, db);
                CHECK(ber < prev);
                prev = ber;
            }
            CHECK(prev < 1e-8);
        }
    }
}

TEST_CASE("CSV output is stable") {
    Scenario scn = pf0_seq_awgn(2);
    scn.trials = 2000;
    scn.snr_grid_db = {-2, 0};
    auto render = [&](int workers) {
        std::string text(k_csv_header);
        text += '\n';
        for (const auto& rec : sweep_snr(scn, workers)) {
            text += csv_row(rec, scn.payload_format());
            text += '\n';
        }
        return text;
    };
    const std::string a = render(1);
    CHECK(a == render(1));
    CHECK(a == render(4));
    CHECK(a.find("snr_db,trials,ack_sent") == 0);
}
