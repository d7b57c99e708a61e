#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gfi/errors.hpp"

// Thermal models: explicit finite spectra and closed-form families.
// Units: k_B = 1; oscillator frequencies carry the hbar*omega energy scale.

namespace gfi::spectra {

struct EnergyLevel {
    double energy = 0.0;
    std::int64_t degeneracy = 1;
};

// Levels are sorted ascending with equal energies merged once the model has
// passed through build_model.
struct FiniteSpectrum {
    std::vector<EnergyLevel> levels;
};

struct TwoLevel {
    double gap = 1.0;
};

struct Oscillator {
    double omega = 1.0;
};

struct OscillatorBank {
    std::vector<double> omegas;
};

struct ClassicalQuadratic {
    int dof = 1;  // number of quadratic degrees of freedom f
};

// Smooth-activation closed form: translational 3/2 plus one rotational and
// one vibrational mode that switch on near their threshold temperatures,
// giving C_v plateaus 3/2 -> 5/2 -> 7/2.
struct DiatomicStaircase {
    double t_rot = 0.0;
    double t_vib = 0.0;
};

using ThermalModel = std::variant<FiniteSpectrum, TwoLevel, Oscillator, OscillatorBank,
                                  ClassicalQuadratic, DiatomicStaircase>;

namespace detail {

inline void validate_spectrum(FiniteSpectrum& fs) {
    if (fs.levels.empty()) throw domain_error("finite spectrum must have at least one level");
    for (const auto& lv : fs.levels) {
        if (!std::isfinite(lv.energy)) throw domain_error("level energy must be finite");
        if (lv.degeneracy < 1) throw domain_error("level degeneracy must be >= 1");
    }
    std::sort(fs.levels.begin(), fs.levels.end(),
              [](const EnergyLevel& a, const EnergyLevel& b) { return a.energy < b.energy; });
    // Merge exactly equal energies; Z is unchanged because weights add.
    std::vector<EnergyLevel> merged;
    merged.reserve(fs.levels.size());
    for (const auto& lv : fs.levels) {
        if (!merged.empty() && merged.back().energy == lv.energy)
            merged.back().degeneracy += lv.degeneracy;
        else
            merged.push_back(lv);
    }
    fs.levels = std::move(merged);
}

}  // namespace detail

// Validates and canonicalizes a model description.
inline ThermalModel build_model(ThermalModel m) {
    struct Validator {
        void operator()(FiniteSpectrum& fs) const { detail::validate_spectrum(fs); }
        void operator()(TwoLevel& tl) const {
            if (!(tl.gap > 0.0) || !std::isfinite(tl.gap))
                throw domain_error("two-level gap must be positive and finite");
        }
        void operator()(Oscillator& o) const {
            if (!(o.omega > 0.0) || !std::isfinite(o.omega))
                throw domain_error("oscillator frequency must be positive and finite");
        }
        void operator()(OscillatorBank& b) const {
            if (b.omegas.empty()) throw domain_error("oscillator bank must have at least one mode");
            for (double w : b.omegas)
                if (!(w > 0.0) || !std::isfinite(w))
                    throw domain_error("oscillator bank frequencies must be positive and finite");
        }
        void operator()(ClassicalQuadratic& c) const {
            if (c.dof < 1) throw domain_error("classical model needs dof >= 1");
        }
        void operator()(DiatomicStaircase& d) const {
            if (!(d.t_rot > 0.0) || !(d.t_vib > d.t_rot) || !std::isfinite(d.t_vib))
                throw domain_error("diatomic thresholds require 0 < t_rot < t_vib");
        }
    };
    std::visit(Validator{}, m);
    return m;
}

// Finite view of a model, when one exists without approximation.
inline std::optional<FiniteSpectrum> as_finite_spectrum(const ThermalModel& m) {
    if (const auto* fs = std::get_if<FiniteSpectrum>(&m)) return *fs;
    if (const auto* tl = std::get_if<TwoLevel>(&m))
        return FiniteSpectrum{{{0.0, 1}, {tl->gap, 1}}};
    return std::nullopt;
}

// Truncates the oscillator ladder {(n+1/2)w} so that the dropped tail weight
// at beta_min stays below eps*Z. The tail/Z ratio is exactly
// exp(-beta_min*w*(N+1)) because both are geometric series with the same
// prefactor, so N = ceil(-ln(eps)/(beta_min*w)) suffices.
inline ThermalModel truncate_oscillator(double omega, double beta_min, double eps) {
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw domain_error("oscillator frequency must be positive and finite");
    if (!(beta_min > 0.0) || !std::isfinite(beta_min))
        throw domain_error("truncation requires beta_min > 0: an unbounded spectrum has no finite cutoff at infinite temperature");
    if (!(eps > 0.0) || !(eps < 1.0)) throw domain_error("truncation tolerance must lie in (0, 1)");
    const double n_real = std::ceil(-std::log(eps) / (beta_min * omega)) + 2.0;
    if (!(n_real < 1e7)) throw range_error("oscillator truncation would need too many levels");
    const auto n_max = static_cast<std::int64_t>(n_real);
    FiniteSpectrum fs;
    fs.levels.reserve(static_cast<std::size_t>(n_max) + 1);
    for (std::int64_t n = 0; n <= n_max; ++n)
        fs.levels.push_back({(static_cast<double>(n) + 0.5) * omega, 1});
    return build_model(ThermalModel{std::move(fs)});
}

inline double total_degeneracy(const FiniteSpectrum& fs) {
    double g = 0.0;
    for (const auto& lv : fs.levels) g += static_cast<double>(lv.degeneracy);
    return g;
}

}  // namespace gfi::spectra
