// SPDX-License-Identifier: Apache-2.0
//
// Deterministic Monte Carlo engine: scenario description, SNR sweeps,
// DTX threshold calibration, transition counting and the closed-form
// AWGN references.
//
// SNR convention: snr_db is per-RE Es/N0 at each receive antenna with
// unit-power transmit REs, i.e. noise_var = 10^(-snr_db/10). Eb/N0
// conversions per format are documented in the README.

#pragma once

#include <cstdio>
#include <string>
#include <thread>

#include "pucchsim/pucch.hpp"

namespace pucchsim {

enum class ChannelKind { AWGN, TDLC };

// Transmit power convention. PER_RE: every occupied RE has unit power
// (the default; snr_db is per-RE Es/N0). PER_SYMBOL: total power per
// occupied OFDM symbol is fixed at one PRB's worth (12 unit REs), so a
// wider allocation spends less per RE. Only meaningful for comparisons
// across allocation widths (the 1-PRB vs 2-PRB PF0 study).
enum class PowerNorm { PER_RE, PER_SYMBOL };

struct Scenario {
    PucchConfig cfg;
    ChannelKind channel = ChannelKind::TDLC;
    PowerNorm power_norm = PowerNorm::PER_RE;
    double delay_spread_ns = 300.0;
    double velocity_kmh = 3.0;
    double carrier_hz = 4e9;
    double scs_hz = 15e3;
    int n_rx = 2;
    int payload_bits = 2;
    uint64_t trials = 10000;
    uint64_t base_seed = 1;
    dvec snr_grid_db;
    double dtx_fraction = 0.1;       // share of trials transmitted as DTX
    bool ideal_estimation = false;   // receiver uses the true channel
    int list_size = 8;
    double dtx_target = 1e-2;        // false-alarm target for calibration
    uint64_t dtx_calib_trials = 50000;
    double dtx_threshold = -1.0;     // < 0: not calibrated yet
    std::string label;               // curve tag in preset batches

    bool payload_format() const { return payload_bits > 2; }

    // Formats whose DTX decision needs a calibrated energy/confidence
    // threshold (the polar path is gated by its CRC instead).
    bool needs_dtx_threshold() const {
        if (cfg.format == PucchFormat::PF0 || cfg.format == PucchFormat::PF1) return true;
        return payload_bits <= 11;
    }

    void validate() const {
        cfg.validate();
        if (cfg.format == PucchFormat::PF0 || cfg.format == PucchFormat::PF1)
            require(payload_bits == 1 || payload_bits == 2,
                    "scenario: PF0/PF1 carry 1 or 2 bits");
        else
            require(payload_bits > 2 && payload_bits <= 64,
                    "scenario: PF2/PF3/PF4 carry 3..64 bits here");
        require(dtx_fraction >= 0.0 && dtx_fraction < 1.0,
                "scenario: dtx_fraction must be in [0, 1)");
        require(n_rx >= 1, "scenario: n_rx must be >= 1");
        require(channel == ChannelKind::AWGN || delay_spread_ns > 0.0,
                "scenario: delay spread must be positive");
        require(trials >= 1, "scenario: trials must be >= 1");
        if (payload_format() && payload_bits >= 12) {
            const int e_bits = cfg.format == PucchFormat::PF2 ? pf2_codeword_bits(cfg)
                                                              : pf3_codeword_bits(cfg);
            require(e_bits >= payload_bits + crc_len(payload_bits),
                    "scenario: allocation too small for the payload (E < K + CRC)");
        }
    }
};

struct MetricsRecord {
    double snr_db = 0.0;
    uint64_t trials = 0;
    uint64_t ack_sent = 0;
    uint64_t ack_to_nack = 0;  // ACK trial detected with wrong bits
    uint64_t ack_to_dtx = 0;   // ACK trial gated out
    uint64_t nack_sent = 0;
    uint64_t nack_to_ack = 0;  // NACK trial detected as anything but NACK
    uint64_t dtx_sent = 0;
    uint64_t dtx_to_ack = 0;   // noise-only trial detected
    uint64_t block_errors = 0;
    uint64_t blocks = 0;

    void merge(const MetricsRecord& o) {
        trials += o.trials;
        ack_sent += o.ack_sent;
        ack_to_nack += o.ack_to_nack;
        ack_to_dtx += o.ack_to_dtx;
        nack_sent += o.nack_sent;
        nack_to_ack += o.nack_to_ack;
        dtx_sent += o.dtx_sent;
        dtx_to_ack += o.dtx_to_ack;
        block_errors += o.block_errors;
        blocks += o.blocks;
    }

    double missed_ack_ber() const {
        return ack_sent ? double(ack_to_nack + ack_to_dtx) / double(ack_sent) : 0.0;
    }
    double nack_to_ack_rate() const {
        return nack_sent ? double(nack_to_ack) / double(nack_sent) : 0.0;
    }
    double dtx_to_ack_rate() const {
        return dtx_sent ? double(dtx_to_ack) / double(dtx_sent) : 0.0;
    }
    double bler() const { return blocks ? double(block_errors) / double(blocks) : 0.0; }
};

// Wilson 95% score interval for k successes in n trials.
inline std::pair<double, double> wilson_interval(uint64_t k, uint64_t n, double z = 1.959964) {
    if (n == 0) return {0.0, 1.0};
    const double p = double(k) / double(n);
    const double z2n = z * z / double(n);
    const double center = (p + z2n / 2.0) / (1.0 + z2n);
    const double half = z * std::sqrt(p * (1.0 - p) / double(n) + z2n / (4.0 * double(n))) /
                        (1.0 + z2n);
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// ---------------------------------------------------------------------------
// Trial execution
// ---------------------------------------------------------------------------

namespace detail {

inline ChannelRealization flat_unit_channel(int n_rx, int n_symbols, int n_subcarriers) {
    ChannelRealization h;
    h.n_rx = n_rx;
    h.n_symbols = n_symbols;
    h.n_subcarriers = n_subcarriers;
    h.response.assign(n_rx, cvec(static_cast<size_t>(n_symbols) * n_subcarriers, cd{1.0, 0.0}));
    return h;
}

// Everything that is fixed across the trials of one SNR point.
struct TrialContext {
    const Scenario& scn;
    double noise_var;
    RxParams rx;
    std::optional<ChannelModel> fading;
    ChannelRealization flat;

    TrialContext(const Scenario& scn_in, double snr_db, double threshold)
        : scn(scn_in), noise_var(std::pow(10.0, -snr_db / 10.0)) {
        rx.noise_var = noise_var;
        rx.threshold = threshold;
        rx.scs_hz = scn.scs_hz;
        rx.list_size = scn.list_size;
        if (scn.channel == ChannelKind::TDLC) {
            const TdlProfile profile = tdl_c_profile(scn.delay_spread_ns * 1e-9);
            rx.assumed_tau_max_s = profile.tap_delays.back();
            fading.emplace(profile, scn.velocity_kmh, scn.carrier_hz, scn.scs_hz,
                           scn.cfg.n_symbols, scn.cfg.start_symbol, scn.cfg.n_subcarriers(),
                           scn.n_rx);
        } else {
            rx.assumed_tau_max_s = 0.0;
            flat = flat_unit_channel(scn.n_rx, scn.cfg.n_symbols, scn.cfg.n_subcarriers());
        }
    }

    ResourceGrid transmit(const UciMessage& msg) const {
        ResourceGrid tx = [&] {
            switch (scn.cfg.format) {
                case PucchFormat::PF0:
                    return scn.cfg.pf0_structure == Pf0Structure::SEQUENCE
                               ? pf0_seq_tx(msg, scn.cfg)
                               : pf0_dmrs_tx(msg, scn.cfg);
                case PucchFormat::PF1:
                    return pf1_tx(msg, scn.cfg);
                case PucchFormat::PF2:
                    return pf2_tx(msg, scn.cfg);
                case PucchFormat::PF3:
                case PucchFormat::PF4:
                    return pf3_tx(msg, scn.cfg);
            }
            throw std::invalid_argument("scenario: unknown format variant");
        }();
        if (scn.power_norm == PowerNorm::PER_SYMBOL && scn.cfg.n_prb != 1) {
            const double scale = std::sqrt(double(k_sc_per_prb) / scn.cfg.n_subcarriers());
            for (auto& port : tx.ports)
                for (cd& v : port) v *= scale;
        }
        return tx;
    }

    Decision receive(const ResourceGrid& rx_grid, const RxParams& params) const {
        switch (scn.cfg.format) {
            case PucchFormat::PF0:
                return scn.cfg.pf0_structure == Pf0Structure::SEQUENCE
                           ? pf0_seq_detect(rx_grid, scn.cfg, scn.payload_bits, params)
                           : pf0_dmrs_detect(rx_grid, scn.cfg, scn.payload_bits, params);
            case PucchFormat::PF1:
                return pf1_detect(rx_grid, scn.cfg, scn.payload_bits, params);
            case PucchFormat::PF2:
                return pf2_decode(rx_grid, scn.cfg, scn.payload_bits, params);
            case PucchFormat::PF3:
            case PucchFormat::PF4:
                return pf3_decode(rx_grid, scn.cfg, scn.payload_bits, params);
        }
        throw std::invalid_argument("scenario: unknown format variant");
    }
};

enum class TrialState { ACK, NACK, DTX };

// One end-to-end trial; returns the decision and what was sent.
struct TrialOutcome {
    TrialState sent;
    bitvec sent_bits;
    Decision decision;
};

inline TrialOutcome run_trial(const TrialContext& ctx, Rng& rng) {
    const Scenario& scn = ctx.scn;
    TrialOutcome out;

    const double u = rng.uniform();
    if (u < scn.dtx_fraction) {
        out.sent = TrialState::DTX;
    } else if (scn.payload_format()) {
        out.sent = TrialState::ACK;  // payload trials reuse the ACK slot
        out.sent_bits.resize(scn.payload_bits);
        for (auto& b : out.sent_bits) b = rng.next_u64() & 1u;
    } else {
        out.sent = rng.uniform() < 0.5 ? TrialState::ACK : TrialState::NACK;
        out.sent_bits.assign(scn.payload_bits, out.sent == TrialState::ACK ? 1 : 0);
    }

    UciMessage msg;
    msg.kind = scn.payload_format() ? UciKind::PAYLOAD
                                    : (scn.payload_bits == 1 ? UciKind::HARQ1 : UciKind::HARQ2);
    msg.tx_state = out.sent == TrialState::DTX ? TxState::DTX : TxState::PRESENT;
    msg.bits = out.sent_bits;

    const ResourceGrid tx = ctx.transmit(msg);

    ChannelRealization h;
    const ChannelRealization* h_ptr = &ctx.flat;
    if (ctx.fading) {
        h = ctx.fading->realize(rng);
        h_ptr = &h;
    }
    ResourceGrid rx_grid = apply_channel(tx, *h_ptr);
    rx_grid = add_awgn(rx_grid, ctx.noise_var, rng);

    RxParams params = ctx.rx;
    if (scn.ideal_estimation) params.genie = h_ptr;
    out.decision = ctx.receive(rx_grid, params);
    return out;
}

inline void tally(MetricsRecord& rec, const TrialOutcome& t, bool payload_format) {
    ++rec.trials;
    const bool detected = t.decision.detected_state == DetectedState::DETECTED;
    if (t.sent == TrialState::DTX) {
        ++rec.dtx_sent;
        if (detected) ++rec.dtx_to_ack;
        return;
    }
    if (payload_format) {
        ++rec.blocks;
        if (!detected || t.decision.bits != t.sent_bits) ++rec.block_errors;
        return;
    }
    if (t.sent == TrialState::ACK) {
        ++rec.ack_sent;
        if (!detected)
            ++rec.ack_to_dtx;
        else if (t.decision.bits != t.sent_bits)
            ++rec.ack_to_nack;
    } else {
        ++rec.nack_sent;
        if (detected && t.decision.bits != t.sent_bits) ++rec.nack_to_ack;
    }
}

}  // namespace detail

// Runs `trials` independent trials at one SNR point. Trial t draws its
// own RNG stream from (seed, t); results are independent of execution
// order and of the worker count.
inline MetricsRecord run_point(const Scenario& scn, double snr_db, uint64_t trials,
                               uint64_t seed, int workers = 1) {
    scn.validate();
    require(trials >= 1, "run_point: trials must be >= 1");
    const detail::TrialContext ctx(scn, snr_db, scn.dtx_threshold >= 0 ? scn.dtx_threshold : 0.0);

    const int n_workers = std::max(1, std::min<int>(workers, 64));
    std::vector<MetricsRecord> partial(n_workers);
    auto work = [&](int w) {
        Rng trial_rng(0);  // placeholder; re-derived per trial
        for (uint64_t t = w; t < trials; t += n_workers) {
            trial_rng = Rng::derive(seed, t, 0x7261a11u);
            const detail::TrialOutcome out = detail::run_trial(ctx, trial_rng);
            detail::tally(partial[w], out, scn.payload_format());
        }
    };
    if (n_workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }

    MetricsRecord rec;
    rec.snr_db = snr_db;
    for (const auto& p : partial) rec.merge(p);
    return rec;
}

// Collects the detection metric over noise-only trials and returns the
// empirical (1 - target) quantile as the DTX threshold. Metrics are
// noise-normalized, so one calibration serves every SNR point.
inline double calibrate_dtx_threshold(const Scenario& scn, double target, uint64_t trials,
                                      int workers = 1) {
    scn.validate();
    require(target > 0.0 && target < 1.0, "calibrate: target must be in (0, 1)");
    require(double(trials) >= 10.0 / target,
            "calibrate: insufficient samples for the requested quantile");

    Scenario noise_only = scn;
    noise_only.dtx_fraction = 0.0;  // unused; trials are forced to DTX below
    const detail::TrialContext ctx(noise_only, 0.0, 0.0);

    dvec metrics(trials);
    const int n_workers = std::max(1, std::min<int>(workers, 64));
    auto work = [&](int w) {
        for (uint64_t t = w; t < trials; t += n_workers) {
            Rng rng = Rng::derive(scn.base_seed, t, 0xca11bu);
            UciMessage msg;
            msg.kind = scn.payload_format() ? UciKind::PAYLOAD : UciKind::HARQ1;
            msg.tx_state = TxState::DTX;
            const ResourceGrid tx = ctx.transmit(msg);
            ChannelRealization h;
            const ChannelRealization* h_ptr = &ctx.flat;
            if (ctx.fading) {
                h = ctx.fading->realize(rng);
                h_ptr = &h;
            }
            ResourceGrid rx_grid = apply_channel(tx, *h_ptr);
            rx_grid = add_awgn(rx_grid, ctx.noise_var, rng);
            metrics[t] = ctx.receive(rx_grid, ctx.rx).metric;
        }
    };
    if (n_workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }

    std::sort(metrics.begin(), metrics.end());
    const uint64_t idx =
        std::min<uint64_t>(trials - 1, static_cast<uint64_t>((1.0 - target) * double(trials)));
    return metrics[idx];
}

// Sweep the scenario grid; auto-calibrates the DTX threshold when the
// format needs one and none was provided.
inline std::vector<MetricsRecord> sweep_snr(Scenario scn, int workers = 1) {
    scn.validate();
    require(!scn.snr_grid_db.empty(), "sweep_snr: empty SNR grid");
    if (scn.needs_dtx_threshold() && scn.dtx_threshold < 0.0)
        scn.dtx_threshold =
            calibrate_dtx_threshold(scn, scn.dtx_target, scn.dtx_calib_trials, workers);
    std::vector<MetricsRecord> out;
    out.reserve(scn.snr_grid_db.size());
    for (size_t i = 0; i < scn.snr_grid_db.size(); ++i)
        out.push_back(run_point(scn, scn.snr_grid_db[i], scn.trials,
                                detail::splitmix64(scn.base_seed ^ (0x5eed0000u + i)), workers));
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form AWGN references
// ---------------------------------------------------------------------------

enum class AnalyticScheme { COHERENT_BPSK, COHERENT_QPSK, NONCOH_ORTH_2, NONCOH_ORTH_4 };

inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Bit error rate over AWGN as a function of Eb/N0. Coherent BPSK/QPSK:
// Q(sqrt(2 g)). Non-coherent orthogonal M-ary (square-law detection):
// the exact alternating union sum, scaled by M/(2(M-1)) for the per-bit
// rate; M = 2 reduces to exp(-g/2)/2.
inline double analytic_ber(AnalyticScheme scheme, double ebn0_db) {
    const double g = std::pow(10.0, ebn0_db / 10.0);
    switch (scheme) {
        case AnalyticScheme::COHERENT_BPSK:
        case AnalyticScheme::COHERENT_QPSK:
            return q_function(std::sqrt(2.0 * g));
        case AnalyticScheme::NONCOH_ORTH_2:
            return 0.5 * std::exp(-g / 2.0);
        case AnalyticScheme::NONCOH_ORTH_4: {
            const int m_ary = 4;
            const double gs = 2.0 * g;  // two bits per symbol
            double ps = 0.0;
            double binom = 1.0;  // C(M-1, m)
            for (int m = 1; m <= m_ary - 1; ++m) {
                binom = binom * (m_ary - m) / m;
                const double term = binom / (m + 1.0) * std::exp(-gs * m / (m + 1.0));
                ps += (m % 2 == 1) ? term : -term;
            }
            return ps * m_ary / (2.0 * (m_ary - 1.0));
        }
    }
    return 0.0;
}

// Per-RE Es/N0 (dB) -> Eb/N0 (dB) offset for the 1-2 bit formats: one
// information bit rides on (UCI REs / bits) unit-power REs.
inline double ebn0_offset_db(int n_uci_res_per_bit) {
    return 10.0 * std::log10(double(n_uci_res_per_bit));
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

inline const char* k_csv_header =
    "snr_db,trials,ack_sent,ack_to_nack,ack_to_dtx,nack_to_ack,dtx_to_ack,"
    "missed_ack_ber,nack_to_ack_rate,dtx_to_ack_rate,bler,ci_low,ci_high";

// One CSV row. The Wilson interval covers the scenario's primary rate:
// BLER for payload formats, missed-ACK rate otherwise.
inline std::string csv_row(const MetricsRecord& r, bool payload_format) {
    const auto [lo, hi] = payload_format
                              ? wilson_interval(r.block_errors, r.blocks)
                              : wilson_interval(r.ack_to_nack + r.ack_to_dtx, r.ack_sent);
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%.6g,%llu,%llu,%llu,%llu,%llu,%llu,%.8g,%.8g,%.8g,%.8g,%.8g,%.8g",
                  r.snr_db, (unsigned long long)r.trials, (unsigned long long)r.ack_sent,
                  (unsigned long long)r.ack_to_nack, (unsigned long long)r.ack_to_dtx,
                  (unsigned long long)r.nack_to_ack, (unsigned long long)r.dtx_to_ack,
                  r.missed_ack_ber(), r.nack_to_ack_rate(), r.dtx_to_ack_rate(), r.bler(), lo,
                  hi);
    return buf;
}

}  // namespace pucchsim
