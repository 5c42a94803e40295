// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: SNR sweeps of scenario files or figure
// presets, DTX threshold calibration and the analytic AWGN reference
// tables. All randomness flows from --seed; identical invocations
// produce identical CSV bytes.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pucchsim/scenario_io.hpp"

namespace {

constexpr int k_exit_ok = 0;
constexpr int k_exit_config = 2;
constexpr int k_exit_io = 3;

using namespace pucchsim;

std::vector<Scenario> gather_scenarios(const std::string& scenario_path,
                                       const std::string& preset) {
    require(scenario_path.empty() != preset.empty(),
            "exactly one of --scenario or --preset is required");
    if (!scenario_path.empty()) return {load_scenario(scenario_path)};
    return preset_scenarios(preset);
}

struct Overrides {
    uint64_t trials = 0;
    int64_t seed = -1;
    dvec snr;
    double dtx_fraction = -1.0;

    void apply(Scenario& scn) const {
        if (trials > 0) scn.trials = trials;
        if (seed >= 0) scn.base_seed = static_cast<uint64_t>(seed);
        if (!snr.empty()) scn.snr_grid_db = snr;
        if (dtx_fraction >= 0.0) scn.dtx_fraction = dtx_fraction;
    }
};

int cmd_simulate(const std::string& scenario_path, const std::string& preset,
                 const std::string& out_path, const Overrides& ov, int workers) {
    std::vector<Scenario> scenarios = gather_scenarios(scenario_path, preset);
    for (auto& scn : scenarios) {
        ov.apply(scn);
        scn.validate();
        require(!scn.snr_grid_db.empty(), "scenario has no SNR grid; pass --snr");
    }

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    const bool multi = scenarios.size() > 1;
    out << (multi ? "curve," : "") << k_csv_header << '\n';
    for (auto& scn : scenarios) {
        if (scn.needs_dtx_threshold() && scn.dtx_threshold < 0.0) {
            scn.dtx_threshold =
                calibrate_dtx_threshold(scn, scn.dtx_target, scn.dtx_calib_trials, workers);
            std::cerr << "calibrated dtx threshold"
                      << (scn.label.empty() ? "" : " [" + scn.label + "]") << ": "
                      << scn.dtx_threshold << '\n';
        }
        for (const MetricsRecord& rec : sweep_snr(scn, workers)) {
            if (multi) out << scn.label << ',';
            out << csv_row(rec, scn.payload_format()) << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failure on: " + out_path);
    std::cerr << "wrote " << out_path << '\n';
    return k_exit_ok;
}

int cmd_calibrate(const std::string& scenario_path, const std::string& preset, double target,
                  uint64_t trials, const Overrides& ov, int workers) {
    std::vector<Scenario> scenarios = gather_scenarios(scenario_path, preset);
    Scenario scn = scenarios.front();
    ov.apply(scn);
    require(scn.needs_dtx_threshold(),
            "this format gates detection on its CRC; nothing to calibrate");
    const double threshold = calibrate_dtx_threshold(scn, target, trials, workers);

    // fresh noise-only measurement with the calibrated gate
    Scenario gated = scn;
    gated.dtx_threshold = threshold;
    gated.dtx_fraction = 1.0 - 1e-9;
    gated.base_seed = detail::splitmix64(scn.base_seed ^ 0xfa11ba11u);
    const MetricsRecord rec = run_point(gated, 0.0, trials, gated.base_seed, workers);
    std::cout << "threshold " << threshold << '\n'
              << "measured_dtx_to_ack " << rec.dtx_to_ack_rate() << '\n';
    return k_exit_ok;
}

int cmd_oracle(const dvec& grid, const std::string& scheme, const std::string& out_path) {
    require(!grid.empty(), "oracle: empty Eb/N0 grid");
    static const std::map<std::string, AnalyticScheme> schemes = {
        {"coherent_bpsk", AnalyticScheme::COHERENT_BPSK},
        {"coherent_qpsk", AnalyticScheme::COHERENT_QPSK},
        {"noncoh_orth_2", AnalyticScheme::NONCOH_ORTH_2},
        {"noncoh_orth_4", AnalyticScheme::NONCOH_ORTH_4},
    };
    std::vector<std::pair<std::string, AnalyticScheme>> selected;
    if (scheme.empty()) {
        selected.assign(schemes.begin(), schemes.end());
    } else {
        const auto it = schemes.find(scheme);
        require(it != schemes.end(), "oracle: unknown scheme '" + scheme + "'");
        selected.push_back(*it);
    }

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot open output file: " + out_path);
        os = &file;
    }
    *os << "ebn0_db";
    for (const auto& [name, s] : selected) *os << ',' << name;
    *os << '\n';
    char buf[64];
    for (double db : grid) {
        std::snprintf(buf, sizeof(buf), "%.6g", db);
        *os << buf;
        for (const auto& [name, s] : selected) {
            std::snprintf(buf, sizeof(buf), "%.8g", analytic_ber(s, db));
            *os << ',' << buf;
        }
        *os << '\n';
    }
    return k_exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "pucchsim: link-level simulator for 5G NR PUCCH formats 0-4.\n"
        "SNR convention: per-RE Es/N0 at each receive antenna (unit-power REs);\n"
        "Eb/N0 conversions per format are listed in the README."};
    app.require_subcommand(1);

    std::string scenario_path, preset, out_path = "results.csv", snr_list, table_path, scheme;
    Overrides ov;
    int workers = 1;
    double target = 1e-2;
    uint64_t calib_trials = 100000;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", scenario_path, "scenario JSON file");
        cmd->add_option("--preset", preset, "figure preset: fig3|fig4|fig6|fig8|fig10|fig11");
        cmd->add_option("--trials", ov.trials, "override trials per SNR point");
        cmd->add_option("--seed", ov.seed, "override the base seed");
        cmd->add_option("--workers", workers, "worker threads for the trial loop");
        cmd->add_option("--snr", snr_list, "comma-separated SNR grid in dB");
        cmd->add_option("--dtx-fraction", ov.dtx_fraction, "override the DTX trial fraction");
        cmd->add_option("--base-seq-table", table_path,
                        "JSON file with 30x12 base-sequence phases");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run an SNR sweep and write CSV");
    add_common(simulate);
    simulate->add_option("--out", out_path, "output CSV path");

    CLI::App* calibrate =
        app.add_subcommand("calibrate", "calibrate the DTX threshold and re-measure it");
    add_common(calibrate);
    calibrate->add_option("--target", target, "DTX-to-ACK false alarm target");
    calibrate->add_option("--calib-trials", calib_trials, "noise-only calibration trials");

    CLI::App* oracle =
        app.add_subcommand("oracle", "emit closed-form AWGN BER reference curves");
    oracle->add_option("--snr", snr_list, "comma-separated Eb/N0 grid in dB");
    oracle->add_option("--scheme", scheme,
                       "coherent_bpsk|coherent_qpsk|noncoh_orth_2|noncoh_orth_4 (default all)");
    oracle->add_option("--out", out_path, "output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? k_exit_ok : k_exit_config;
    }

    try {
        if (!snr_list.empty()) {
            size_t pos = 0;
            while (pos < snr_list.size()) {
                size_t next = snr_list.find(',', pos);
                if (next == std::string::npos) next = snr_list.size();
                ov.snr.push_back(std::stod(snr_list.substr(pos, next - pos)));
                pos = next + 1;
            }
        }
        if (!table_path.empty()) load_base_sequence_table(table_path);

        if (simulate->parsed()) return cmd_simulate(scenario_path, preset, out_path, ov, workers);
        if (calibrate->parsed())
            return cmd_calibrate(scenario_path, preset, target, calib_trials, ov, workers);
        if (oracle->parsed()) {
            dvec grid = ov.snr;
            if (grid.empty() && !oracle->count("--snr")) {
                // default range matching the reference-curve presets
                for (double db = 0.0; db <= 12.0; db += 1.0) grid.push_back(db);
            }
            return cmd_oracle(grid, scheme,
                              oracle->count("--out") ? out_path : std::string());
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return k_exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return k_exit_io;
    }
    return k_exit_config;
}
