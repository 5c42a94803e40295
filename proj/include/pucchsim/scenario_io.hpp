// SPDX-License-Identifier: Apache-2.0
//
// Scenario JSON (de)serialization, figure presets and the optional
// base-sequence table file hook.

#pragma once

#include <fstream>
#include <map>

#include <json.hpp>

#include "pucchsim/sim.hpp"

namespace pucchsim {

using json = nlohmann::json;

namespace detail {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scenario field '") + key + "': " + e.what());
    }
}

inline const std::map<std::string, std::pair<PucchFormat, Pf0Structure>>& format_names() {
    static const std::map<std::string, std::pair<PucchFormat, Pf0Structure>> names = {
        {"pf0_seq", {PucchFormat::PF0, Pf0Structure::SEQUENCE}},
        {"pf0_dmrs", {PucchFormat::PF0, Pf0Structure::DMRS}},
        {"pf1", {PucchFormat::PF1, Pf0Structure::SEQUENCE}},
        {"pf2", {PucchFormat::PF2, Pf0Structure::SEQUENCE}},
        {"pf3", {PucchFormat::PF3, Pf0Structure::SEQUENCE}},
        {"pf4", {PucchFormat::PF4, Pf0Structure::SEQUENCE}},
    };
    return names;
}

inline std::string format_name(const PucchConfig& cfg) {
    switch (cfg.format) {
        case PucchFormat::PF0:
            return cfg.pf0_structure == Pf0Structure::SEQUENCE ? "pf0_seq" : "pf0_dmrs";
        case PucchFormat::PF1: return "pf1";
        case PucchFormat::PF2: return "pf2";
        case PucchFormat::PF3: return "pf3";
        case PucchFormat::PF4: return "pf4";
    }
    return "pf0_seq";
}

}  // namespace detail

inline json scenario_to_json(const Scenario& scn) {
    json j;
    j["format"] = detail::format_name(scn.cfg);
    j["n_symbols"] = scn.cfg.n_symbols;
    j["start_symbol"] = scn.cfg.start_symbol;
    j["n_prb"] = scn.cfg.n_prb;
    j["prb_offset"] = scn.cfg.prb_offset;
    j["group_index"] = scn.cfg.group_index;
    j["cyclic_shift"] = scn.cfg.cyclic_shift;
    j["time_occ_index"] = scn.cfg.time_occ_index;
    if (scn.cfg.format == PucchFormat::PF4) {
        j["pre_dft_occ_length"] = scn.cfg.pre_dft_occ.length;
        j["pre_dft_occ_index"] = scn.cfg.pre_dft_occ.index;
    }
    j["pf1_method"] =
        scn.cfg.pf1_method == Pf1Method::EXTENSION ? "extension" : "puncturing";
    j["pf2_overhead"] = scn.cfg.pf2_overhead == Pf2Overhead::HALF
                            ? "half"
                            : (scn.cfg.pf2_overhead == Pf2Overhead::THIRD ? "third" : "quarter");
    j["pf3_n_dmrs"] = scn.cfg.pf3_n_dmrs;
    j["modulation"] = scn.cfg.modulation == Modulation::BPSK
                          ? "bpsk"
                          : (scn.cfg.modulation == Modulation::QPSK ? "qpsk" : "pi2_bpsk");
    j["slot_index"] = scn.cfg.slot_index;
    j["scrambling_id"] = scn.cfg.scrambling_id;
    j["rnti"] = scn.cfg.rnti;
    j["channel"] = scn.channel == ChannelKind::AWGN ? "awgn" : "tdlc";
    j["power_norm"] = scn.power_norm == PowerNorm::PER_RE ? "per_re" : "per_symbol";
    j["delay_spread_ns"] = scn.delay_spread_ns;
    j["velocity_kmh"] = scn.velocity_kmh;
    j["carrier_hz"] = scn.carrier_hz;
    j["scs_hz"] = scn.scs_hz;
    j["n_rx"] = scn.n_rx;
    j["payload_bits"] = scn.payload_bits;
    j["trials"] = scn.trials;
    j["base_seed"] = scn.base_seed;
    j["snr_db"] = scn.snr_grid_db;
    j["dtx_fraction"] = scn.dtx_fraction;
    j["ideal_estimation"] = scn.ideal_estimation;
    j["list_size"] = scn.list_size;
    j["dtx_target"] = scn.dtx_target;
    j["dtx_calib_trials"] = scn.dtx_calib_trials;
    j["dtx_threshold"] = scn.dtx_threshold;
    j["label"] = scn.label;
    return j;
}

// Defaults mirror the studied setup: 4 GHz carrier, 15 kHz SCS, 1 TX,
// 2 RX antennas, TDL-C fading, MMSE estimation.
inline Scenario scenario_from_json(const json& j) {
    Scenario scn;
    std::string format = "pf0_seq", channel = "tdlc", pf1_method = "extension",
                overhead = "third", modulation = "qpsk";
    detail::read_field(j, "format", format);
    const auto& names = detail::format_names();
    const auto it = names.find(format);
    require(it != names.end(), "scenario field 'format': unknown value '" + format + "'");
    scn.cfg.format = it->second.first;
    scn.cfg.pf0_structure = it->second.second;
    if (scn.cfg.format == PucchFormat::PF0 && it->second.second == Pf0Structure::DMRS)
        scn.cfg.n_prb = 2;
    if (scn.cfg.format == PucchFormat::PF1 || scn.cfg.format == PucchFormat::PF3 ||
        scn.cfg.format == PucchFormat::PF4)
        scn.cfg.n_symbols = 10;
    if (scn.cfg.format == PucchFormat::PF2) scn.cfg.n_prb = 4;
    if (scn.cfg.format == PucchFormat::PF4) scn.cfg.pre_dft_occ = {2, 0};
    if (scn.cfg.format == PucchFormat::PF2 || scn.cfg.format == PucchFormat::PF3 ||
        scn.cfg.format == PucchFormat::PF4)
        scn.payload_bits = 20;

    detail::read_field(j, "n_symbols", scn.cfg.n_symbols);
    detail::read_field(j, "start_symbol", scn.cfg.start_symbol);
    detail::read_field(j, "n_prb", scn.cfg.n_prb);
    detail::read_field(j, "prb_offset", scn.cfg.prb_offset);
    detail::read_field(j, "group_index", scn.cfg.group_index);
    detail::read_field(j, "cyclic_shift", scn.cfg.cyclic_shift);
    detail::read_field(j, "time_occ_index", scn.cfg.time_occ_index);
    detail::read_field(j, "pre_dft_occ_length", scn.cfg.pre_dft_occ.length);
    detail::read_field(j, "pre_dft_occ_index", scn.cfg.pre_dft_occ.index);
    detail::read_field(j, "pf1_method", pf1_method);
    require(pf1_method == "extension" || pf1_method == "puncturing",
            "scenario field 'pf1_method': use extension|puncturing");
    scn.cfg.pf1_method =
        pf1_method == "extension" ? Pf1Method::EXTENSION : Pf1Method::PUNCTURING;
    detail::read_field(j, "pf2_overhead", overhead);
    require(overhead == "half" || overhead == "third" || overhead == "quarter",
            "scenario field 'pf2_overhead': use half|third|quarter");
    scn.cfg.pf2_overhead = overhead == "half"
                               ? Pf2Overhead::HALF
                               : (overhead == "third" ? Pf2Overhead::THIRD : Pf2Overhead::QUARTER);
    detail::read_field(j, "pf3_n_dmrs", scn.cfg.pf3_n_dmrs);
    detail::read_field(j, "modulation", modulation);
    require(modulation == "bpsk" || modulation == "qpsk" || modulation == "pi2_bpsk",
            "scenario field 'modulation': use bpsk|qpsk|pi2_bpsk");
    scn.cfg.modulation = modulation == "bpsk"
                             ? Modulation::BPSK
                             : (modulation == "qpsk" ? Modulation::QPSK : Modulation::PI2_BPSK);
    detail::read_field(j, "slot_index", scn.cfg.slot_index);
    detail::read_field(j, "scrambling_id", scn.cfg.scrambling_id);
    detail::read_field(j, "rnti", scn.cfg.rnti);

    detail::read_field(j, "channel", channel);
    require(channel == "awgn" || channel == "tdlc",
            "scenario field 'channel': use awgn|tdlc");
    scn.channel = channel == "awgn" ? ChannelKind::AWGN : ChannelKind::TDLC;
    std::string power_norm = "per_re";
    detail::read_field(j, "power_norm", power_norm);
    require(power_norm == "per_re" || power_norm == "per_symbol",
            "scenario field 'power_norm': use per_re|per_symbol");
    scn.power_norm = power_norm == "per_re" ? PowerNorm::PER_RE : PowerNorm::PER_SYMBOL;
    detail::read_field(j, "delay_spread_ns", scn.delay_spread_ns);
    detail::read_field(j, "velocity_kmh", scn.velocity_kmh);
    detail::read_field(j, "carrier_hz", scn.carrier_hz);
    detail::read_field(j, "scs_hz", scn.scs_hz);
    detail::read_field(j, "n_rx", scn.n_rx);
    detail::read_field(j, "payload_bits", scn.payload_bits);
    detail::read_field(j, "trials", scn.trials);
    detail::read_field(j, "base_seed", scn.base_seed);
    detail::read_field(j, "snr_db", scn.snr_grid_db);
    detail::read_field(j, "dtx_fraction", scn.dtx_fraction);
    detail::read_field(j, "ideal_estimation", scn.ideal_estimation);
    detail::read_field(j, "list_size", scn.list_size);
    detail::read_field(j, "dtx_target", scn.dtx_target);
    detail::read_field(j, "dtx_calib_trials", scn.dtx_calib_trials);
    detail::read_field(j, "dtx_threshold", scn.dtx_threshold);
    detail::read_field(j, "label", scn.label);
    scn.validate();
    return scn;
}

// Parse a scenario file; parse errors carry the line number.
inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        size_t line = 1;
        for (size_t i = 0; i < std::min(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw std::invalid_argument(path + ":" + std::to_string(line) +
                                    ": JSON parse error: " + e.what());
    }
    return scenario_from_json(j);
}

// Optional base-sequence table override: JSON array of 30 arrays of 12
// phase integers.
inline void load_base_sequence_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open base sequence table: " + path);
    json j = json::parse(in);
    require(j.is_array() && j.size() == 30, "base sequence table: expected 30 rows");
    std::array<std::array<int, 12>, 30> table{};
    for (int g = 0; g < 30; ++g) {
        require(j[g].is_array() && j[g].size() == 12,
                "base sequence table: row " + std::to_string(g) + " must hold 12 integers");
        for (int n = 0; n < 12; ++n) table[g][n] = j[g][n].get<int>();
    }
    set_base_sequence_table(table);
}

// ---------------------------------------------------------------------------
// Figure presets
// ---------------------------------------------------------------------------

namespace detail {

inline dvec grid(double from_db, double to_db, double step_db) {
    dvec out;
    for (double v = from_db; v <= to_db + 1e-9; v += step_db) out.push_back(v);
    return out;
}

}  // namespace detail

// Named multi-curve setups reproducing the studied comparisons. Labels
// name the curve in the emitted CSV.
inline std::vector<Scenario> preset_scenarios(const std::string& name) {
    std::vector<Scenario> out;
    auto base = [](const std::string& label) {
        Scenario scn;
        scn.label = label;
        scn.trials = 20000;
        return scn;
    };

    if (name == "fig3") {
        // AWGN anchors, single receive antenna, no DTX gating
        for (const auto& [fmt, bits, label] :
             std::vector<std::tuple<std::string, int, std::string>>{
                 {"pf0_dmrs", 1, "dmrs_1bit"},
                 {"pf0_seq", 1, "seq_1bit"},
                 {"pf0_dmrs", 2, "dmrs_2bit"},
                 {"pf0_seq", 2, "seq_2bit"}}) {
            Scenario scn = base(label);
            scn.cfg.format = PucchFormat::PF0;
            scn.cfg.pf0_structure = fmt == "pf0_seq" ? Pf0Structure::SEQUENCE : Pf0Structure::DMRS;
            scn.cfg.n_prb = fmt == "pf0_seq" ? 1 : 2;
            scn.channel = ChannelKind::AWGN;
            scn.n_rx = 1;
            scn.payload_bits = bits;
            scn.ideal_estimation = fmt == "pf0_dmrs";
            scn.dtx_fraction = 0.0;
            scn.dtx_threshold = 0.0;
            // per-RE grid placed so Eb/N0 spans about 0..13 dB
            const double off = 10.0 * std::log10(12.0 / bits);
            scn.snr_grid_db = detail::grid(0.0 - off, 13.0 - off, 1.0);
            out.push_back(scn);
        }
    } else if (name == "fig4") {
        for (const auto& [fmt, label] : std::vector<std::pair<std::string, std::string>>{
                 {"pf0_seq", "seq_2bit"}, {"pf0_dmrs", "dmrs_2bit"}}) {
            Scenario scn = base(label);
            scn.cfg.format = PucchFormat::PF0;
            scn.cfg.pf0_structure = fmt == "pf0_seq" ? Pf0Structure::SEQUENCE : Pf0Structure::DMRS;
            scn.cfg.n_prb = fmt == "pf0_seq" ? 1 : 2;
            scn.channel = ChannelKind::TDLC;
            scn.delay_spread_ns = 1000.0;
            scn.velocity_kmh = 3.0;
            scn.payload_bits = 2;
            // equal total symbol power: the two structures span 1 vs 2 PRBs
            scn.power_norm = PowerNorm::PER_SYMBOL;
            scn.snr_grid_db = detail::grid(-8.0, 16.0, 2.0);
            out.push_back(scn);
        }
    } else if (name == "fig6") {
        for (const double spread : {300.0, 1000.0}) {
            for (const auto& [oh, oh_name] : std::vector<std::pair<Pf2Overhead, std::string>>{
                     {Pf2Overhead::HALF, "half"},
                     {Pf2Overhead::THIRD, "third"},
                     {Pf2Overhead::QUARTER, "quarter"}}) {
                Scenario scn = base(oh_name + "_" + std::to_string(int(spread)) + "ns");
                scn.cfg.format = PucchFormat::PF2;
                scn.cfg.n_symbols = 1;
                scn.cfg.n_prb = 4;
                scn.cfg.pf2_overhead = oh;
                scn.payload_bits = 20;
                scn.delay_spread_ns = spread;
                scn.velocity_kmh = 3.0;
                scn.snr_grid_db = detail::grid(-6.0, 12.0, 1.0);
                out.push_back(scn);
            }
        }
    } else if (name == "fig8") {
        for (const int n : {4, 5, 7}) {
            for (const auto& [method, m_name] : std::vector<std::pair<Pf1Method, std::string>>{
                     {Pf1Method::EXTENSION, "ext"}, {Pf1Method::PUNCTURING, "punct"}}) {
                Scenario scn = base("n" + std::to_string(n) + "_" + m_name);
                scn.cfg.format = PucchFormat::PF1;
                scn.cfg.n_symbols = n;
                scn.cfg.pf1_method = method;
                scn.payload_bits = 2;
                scn.delay_spread_ns = 100.0;
                scn.velocity_kmh = 120.0;
                scn.snr_grid_db = detail::grid(-16.0, 4.0, 2.0);
                out.push_back(scn);
            }
        }
    } else if (name == "fig10" || name == "fig11") {
        const int n = name == "fig10" ? 5 : 10;
        const std::vector<int> dmrs_counts = name == "fig10" ? std::vector<int>{1, 2}
                                                             : std::vector<int>{2, 4};
        for (const double v : {3.0, 120.0, 500.0}) {
            for (const int n_dmrs : dmrs_counts) {
                Scenario scn =
                    base("dmrs" + std::to_string(n_dmrs) + "_" + std::to_string(int(v)) + "kmh");
                scn.cfg.format = PucchFormat::PF3;
                scn.cfg.n_symbols = n;
                scn.cfg.pf3_n_dmrs = n_dmrs;
                scn.payload_bits = 20;
                scn.delay_spread_ns = 300.0;
                scn.velocity_kmh = v;
                scn.snr_grid_db = detail::grid(-10.0, 12.0, 2.0);
                out.push_back(scn);
            }
        }
    } else {
        throw std::invalid_argument("unknown preset '" + name +
                                    "' (use fig3|fig4|fig6|fig8|fig10|fig11)");
    }
    for (auto& scn : out) scn.validate();
    return out;
}

}  // namespace pucchsim
