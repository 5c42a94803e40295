// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include "pucchsim/phy.hpp"
#include "pucchsim/rng.hpp"

using namespace pucchsim;

TEST_CASE("modulation mapping") {
    SUBCASE("BPSK convention") {
        const cvec s = modulate({0, 1}, Modulation::BPSK);
        CHECK(std::abs(s[0] - cd{1.0, 0.0}) < 1e-12);
        CHECK(std::abs(s[1] - cd{-1.0, 0.0}) < 1e-12);
    }
    SUBCASE("QPSK symbols have unit magnitude") {
        const cvec s = modulate({0, 0, 0, 1, 1, 0, 1, 1}, Modulation::QPSK);
        REQUIRE(s.size() == 4);
        for (const cd& x : s) CHECK(std::abs(std::abs(x) - 1.0) < 1e-12);
        CHECK(std::abs(s[0] - cd{M_SQRT1_2, M_SQRT1_2}) < 1e-12);
    }
    SUBCASE("pi/2-BPSK rotates odd symbols by 90 degrees") {
        const cvec s = modulate({0, 0}, Modulation::PI2_BPSK);
        const cd ratio = s[1] / s[0];
        CHECK(std::abs(ratio - cd{0.0, 1.0}) < 1e-12);
    }
    CHECK_THROWS_AS(modulate({0, 1, 0}, Modulation::QPSK), std::invalid_argument);
}

TEST_CASE("DFT precoding") {
    SUBCASE("constant block becomes an impulse") {
        const cvec out = dft_precode(cvec(12, cd{1.0, 0.0}), 12);
        CHECK(std::abs(out[0] - cd{std::sqrt(12.0), 0.0}) < 1e-9);
        for (int k = 1; k < 12; ++k) CHECK(std::abs(out[k]) < 1e-9);
    }
    SUBCASE("Parseval and round trip") {
        Rng rng(4);
        for (int block : {12, 24, 36, 48, 60}) {
            cvec x(block);
            for (cd& v : x) v = rng.cgaussian(1.0);
            const cvec y = dft_precode(x, block);
            CHECK(std::abs(energy(x) - energy(y)) < 1e-9 * block);
            const cvec back = inverse_dft_precode(y, block);
            for (int i = 0; i < block; ++i) CHECK(std::abs(back[i] - x[i]) < 1e-9);
        }
    }
    CHECK_THROWS_AS(dft_precode(cvec(10), 12), std::invalid_argument);
}

TEST_CASE("resource mapping") {
    PucchConfig cfg;
    cfg.format = PucchFormat::PF2;
    cfg.n_symbols = 1;
    cfg.n_prb = 1;

    SUBCASE("fills listed REs exactly once, zeros elsewhere") {
        PucchLayout layout;
        layout.uci = {0, 2, 4};
        layout.dmrs = {1, 3};
        const cvec uci = {cd{1, 0}, cd{2, 0}, cd{3, 0}};
        const cvec dmrs = {cd{-1, 0}, cd{-2, 0}};
        const ResourceGrid grid = map_pucch(cfg, uci, dmrs, layout);
        CHECK(std::abs(grid.at(0, 0, 0) - cd{1, 0}) < 1e-12);
        CHECK(std::abs(grid.at(0, 0, 1) - cd{-1, 0}) < 1e-12);
        CHECK(std::abs(grid.at(0, 0, 4) - cd{3, 0}) < 1e-12);
        for (int k = 5; k < 12; ++k) CHECK(std::abs(grid.at(0, 0, k)) == 0.0);
    }
    SUBCASE("empty layout gives an all-zero grid") {
        const ResourceGrid grid = map_pucch(cfg, {}, {}, {});
        for (const cd& v : grid.ports[0]) CHECK(std::abs(v) == 0.0);
    }
    SUBCASE("round trip through extract") {
        Rng rng(6);
        PucchLayout layout;
        for (int k = 0; k < 12; ++k) ((k % 3) ? layout.uci : layout.dmrs).push_back(k);
        cvec uci(layout.uci.size()), dmrs(layout.dmrs.size());
        for (cd& v : uci) v = rng.cgaussian(1.0);
        for (cd& v : dmrs) v = rng.cgaussian(1.0);
        const ResourceGrid grid = map_pucch(cfg, uci, dmrs, layout);
        const auto [uci2, dmrs2] = extract_pucch(grid, layout);
        for (size_t i = 0; i < uci.size(); ++i) CHECK(std::abs(uci2[i] - uci[i]) < 1e-12);
        for (size_t i = 0; i < dmrs.size(); ++i) CHECK(std::abs(dmrs2[i] - dmrs[i]) < 1e-12);
    }
    SUBCASE("extraction from a zero grid is zero") {
        PucchLayout layout;
        layout.uci = {0, 1};
        const ResourceGrid grid(1, 12, 1);
        const auto [uci, dmrs] = extract_pucch(grid, layout);
        for (const cd& v : uci) CHECK(std::abs(v) == 0.0);
    }
    SUBCASE("overlap and bounds are rejected") {
        PucchLayout overlap;
        overlap.uci = {0, 1};
        overlap.dmrs = {1};
        CHECK_THROWS_AS(map_pucch(cfg, cvec(2), cvec(1), overlap), std::invalid_argument);
        PucchLayout oob;
        oob.uci = {12};
        const ResourceGrid grid(1, 12, 1);
        CHECK_THROWS_AS(extract_pucch(grid, oob), std::invalid_argument);
        PucchLayout mismatch;
        mismatch.uci = {0};
        CHECK_THROWS_AS(map_pucch(cfg, cvec(2), cvec(0), mismatch), std::invalid_argument);
    }
}

TEST_CASE("config invariants") {
    PucchConfig cfg;
    cfg.format = PucchFormat::PF1;
    cfg.n_symbols = 3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.n_symbols = 14;
    CHECK_NOTHROW(cfg.validate());
    cfg.start_symbol = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    PucchConfig pf3;
    pf3.format = PucchFormat::PF3;
    pf3.n_symbols = 10;
    pf3.n_prb = 7;  // not an allowed PRB count
    CHECK_THROWS_AS(pf3.validate(), std::invalid_argument);
    pf3.n_prb = 15;
    CHECK_NOTHROW(pf3.validate());
}

TEST_CASE("grid CSV dump") {
    ResourceGrid grid(1, 2, 1);
    grid.at(0, 0, 1) = cd{0.5, -0.25};
    std::ostringstream os;
    dump_grid_csv(grid, os);
    CHECK(os.str() == "symbol,subcarrier,re,im\n0,0,0,0\n0,1,0.5,-0.25\n");
}
