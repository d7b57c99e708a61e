#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gfi/ensembles.hpp"
#include "gfi/errors.hpp"
#include "gfi/spectra.hpp"

// JSON model/ensemble loading and the byte-stable number formatting used by
// every emitter (shortest round-trip decimal, so identical inputs always
// produce identical output bytes).

namespace gfi::io {

inline std::string fmt(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw io_error("cannot read file: " + path);
    return ss.str();
}

namespace detail {

inline nlohmann::json parse_json(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("invalid JSON: ") + e.what());
    }
}

template <typename Fn>
auto describe_json_errors(Fn fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("invalid JSON structure: ") + e.what());
    }
}

}  // namespace detail

// Accepted model documents:
//   {"model":"two-level","gap":1.0}
//   {"model":"oscillator","omega":1.0}
//   {"model":"classical","dof":3}
//   {"model":"oscillator-bank","omegas":[...]}
//   {"model":"spectrum","levels":[{"e":0.0,"g":1},...]}   (g defaults to 1)
//   {"model":"diatomic","t_rot":...,"t_vib":...}
inline spectra::ThermalModel parse_model_json(const std::string& text) {
    const auto j = detail::parse_json(text);
    return detail::describe_json_errors([&]() -> spectra::ThermalModel {
        const std::string kind = j.at("model").get<std::string>();
        if (kind == "two-level")
            return spectra::build_model(spectra::TwoLevel{j.at("gap").get<double>()});
        if (kind == "oscillator")
            return spectra::build_model(spectra::Oscillator{j.at("omega").get<double>()});
        if (kind == "classical")
            return spectra::build_model(spectra::ClassicalQuadratic{j.at("dof").get<int>()});
        if (kind == "oscillator-bank")
            return spectra::build_model(
                spectra::OscillatorBank{j.at("omegas").get<std::vector<double>>()});
        if (kind == "diatomic")
            return spectra::build_model(
                spectra::DiatomicStaircase{j.at("t_rot").get<double>(), j.at("t_vib").get<double>()});
        if (kind == "spectrum") {
            spectra::FiniteSpectrum fs;
            for (const auto& lv : j.at("levels")) {
                spectra::EnergyLevel level;
                level.energy = lv.at("e").get<double>();
                level.degeneracy = lv.contains("g") ? lv.at("g").get<std::int64_t>() : 1;
                fs.levels.push_back(level);
            }
            return spectra::build_model(std::move(fs));
        }
        throw parse_error("unknown model kind: " + kind);
    });
}

struct GceInput {
    std::vector<ensembles::GceState> states;
    double beta = 0.0;
    double mu = 0.0;
};

using EnsembleInput = std::variant<ensembles::JointEnsemble, GceInput>;

// Accepted ensemble documents:
//   {"lambdas":[...], "states":[{"charges":[...], "g":1}, ...]}
//   {"states":[{"e":.., "n":.., "g":..}], "beta":.., "mu":..}   (g defaults to 1)
inline EnsembleInput parse_ensemble_json(const std::string& text) {
    const auto j = detail::parse_json(text);
    return detail::describe_json_errors([&]() -> EnsembleInput {
        if (j.contains("lambdas")) {
            ensembles::JointEnsemble ens;
            ens.lambdas = j.at("lambdas").get<std::vector<double>>();
            for (const auto& st : j.at("states")) {
                ensembles::ChargeState cs;
                cs.charges = st.at("charges").get<std::vector<double>>();
                cs.degeneracy = st.contains("g") ? st.at("g").get<std::int64_t>() : 1;
                ens.states.push_back(std::move(cs));
            }
            return ens;
        }
        if (j.contains("beta")) {
            GceInput in;
            in.beta = j.at("beta").get<double>();
            in.mu = j.contains("mu") ? j.at("mu").get<double>() : 0.0;
            for (const auto& st : j.at("states")) {
                ensembles::GceState gs;
                gs.energy = st.at("e").get<double>();
                gs.n_particles = st.at("n").get<double>();
                gs.degeneracy = st.contains("g") ? st.at("g").get<std::int64_t>() : 1;
                in.states.push_back(gs);
            }
            return in;
        }
        throw parse_error("ensemble JSON needs either \"lambdas\" (joint ensemble) or \"beta\" (grand-canonical shorthand)");
    });
}

}  // namespace gfi::io
