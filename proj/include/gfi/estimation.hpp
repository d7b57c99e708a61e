#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gfi/errors.hpp"
#include "gfi/rng.hpp"
#include "gfi/thermo.hpp"

// Monte Carlo protocol for thermal-state estimation: draw n energy outcomes,
// invert the sample mean to beta_hat (the sample mean is sufficient, so the
// estimator sees nothing else), plug in to get S_hat and T_hat, and compare
// trial variances with the information-bound predictions.

namespace gfi::estimation {

using spectra::ThermalModel;

struct SimConfig {
    ThermalModel model;
    double beta_true = 1.0;
    int n_copies = 2;
    int n_trials = 1;
    std::uint64_t master_seed = 0;
};

struct TrialStatistics {
    double mean_S_hat = 0.0;
    double var_S_hat = 0.0;
    double mean_T_hat = 0.0;
    double var_T_hat = 0.0;
    double ratio_S = 0.0;        // n*var_S_hat / C_v(beta_true)
    double ratio_T = 0.0;        // n*var_T_hat * C_v / T^2
    double product_ratio = 0.0;  // var_S_hat*var_T_hat * n^2 / T^2
    long long n_failed = 0;
};

// n i.i.d. energy draws from the Gibbs weights of a finite spectrum, via a
// cumulative table and binary search. Unbounded models must be truncated
// first (see spectra::truncate_oscillator).
inline std::vector<double> sample_energies(const ThermalModel& m, double beta, std::size_t n,
                                           std::uint64_t seed) {
    thermo::detail::require_beta(beta);
    const auto fs = spectra::as_finite_spectrum(m);
    if (!fs)
        throw domain_error("sampling requires a finite spectrum; truncate unbounded models first");
    const double e0 = fs->levels.front().energy;
    std::vector<double> cumulative;
    cumulative.reserve(fs->levels.size());
    double total = 0.0;
    for (const auto& lv : fs->levels) {
        total += static_cast<double>(lv.degeneracy) * std::exp(-beta * (lv.energy - e0));
        cumulative.push_back(total);
    }
    std::vector<double> out;
    out.reserve(n);
    rng::SplitMix64 gen(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = gen.next_double() * total;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto idx = std::min<std::size_t>(it - cumulative.begin(), fs->levels.size() - 1);
        out.push_back(fs->levels[idx].energy);
    }
    return out;
}

namespace detail {

// Attainable open range of the mean energy: (inf-beta limit, zero-beta limit).
struct EnergyRange {
    double lo = 0.0;
    double hi = 0.0;
};

inline EnergyRange attainable_mean_energy(const ThermalModel& m) {
    struct Eval {
        EnergyRange operator()(const spectra::FiniteSpectrum& fs) const {
            double g = 0.0, acc = 0.0;
            for (const auto& lv : fs.levels) {
                g += static_cast<double>(lv.degeneracy);
                acc += static_cast<double>(lv.degeneracy) * lv.energy;
            }
            return {fs.levels.front().energy, acc / g};
        }
        EnergyRange operator()(const spectra::TwoLevel& tl) const { return {0.0, 0.5 * tl.gap}; }
        EnergyRange operator()(const spectra::Oscillator& o) const {
            return {0.5 * o.omega, std::numeric_limits<double>::infinity()};
        }
        EnergyRange operator()(const spectra::OscillatorBank& b) const {
            double e0 = 0.0;
            for (double w : b.omegas) e0 += 0.5 * w;
            return {e0, std::numeric_limits<double>::infinity()};
        }
        EnergyRange operator()(const spectra::ClassicalQuadratic&) const {
            return {0.0, std::numeric_limits<double>::infinity()};
        }
        EnergyRange operator()(const spectra::DiatomicStaircase&) const {
            return {0.0, std::numeric_limits<double>::infinity()};
        }
    };
    return std::visit(Eval{}, m);
}

}  // namespace detail

// Maximum-likelihood inversion: the unique beta_hat > 0 with
// U(beta_hat) = mean_E. dU/dbeta = -var_H gives the Newton step
// beta <- beta + (U - mean_E)/var_H; a sign-change bracket is maintained and
// bisection takes over whenever the step leaves it.
inline double invert_mean_energy(const ThermalModel& m, double mean_E) {
    if (!std::isfinite(mean_E)) throw range_error("mean energy must be finite");
    const auto range = detail::attainable_mean_energy(m);
    if (!(mean_E > range.lo) || !(mean_E < range.hi))
        throw range_error("mean energy outside the open range attainable at finite beta");
    const double scale = std::max({std::abs(mean_E), std::abs(range.lo), 1e-12});
    const double tol = 1e-12 * scale;

    // U is strictly decreasing, so U(lo) > mean_E > U(hi) brackets the root.
    double lo = 1e-6, hi = 1e6;
    for (int k = 0; k < 40 && thermo::mean_energy(m, lo) <= mean_E; ++k) lo *= 1e-2;
    for (int k = 0; k < 40 && thermo::mean_energy(m, hi) >= mean_E; ++k) hi *= 1e2;
    if (!(thermo::mean_energy(m, lo) > mean_E) || !(thermo::mean_energy(m, hi) < mean_E))
        throw range_error("mean energy not bracketed by any representable beta");

    double beta = std::sqrt(lo * hi);
    for (int it = 0; it < 200; ++it) {
        const double residual = thermo::mean_energy(m, beta) - mean_E;
        if (std::abs(residual) < tol) return beta;
        if (residual > 0.0)
            lo = beta;
        else
            hi = beta;
        const double var = thermo::energy_variance(m, beta);
        double next = beta + residual / var;
        if (!(var > 0.0) || !std::isfinite(next) || next <= lo || next >= hi)
            next = 0.5 * (lo + hi);
        if (next == beta) return beta;  // bracket exhausted at machine precision
        beta = next;
    }
    throw numeric_error("mean-energy inversion did not converge");
}

inline TrialStatistics run_trials(const SimConfig& config) {
    thermo::detail::require_beta(config.beta_true);
    if (config.n_copies < 2) throw domain_error("estimation needs n_copies >= 2");
    if (config.n_trials < 1) throw domain_error("estimation needs n_trials >= 1");
    const auto fs = spectra::as_finite_spectrum(config.model);
    if (!fs || fs->levels.size() < 2)
        throw domain_error("estimation needs a finite spectrum with at least two distinct levels");

    const auto truth = thermo::thermo_point(config.model, config.beta_true);
    if (!(truth.C_v > 0.0))
        throw degenerate_error("zero heat capacity: estimator variance targets are undefined");

    std::vector<double> s_hats, t_hats;
    s_hats.reserve(static_cast<std::size_t>(config.n_trials));
    t_hats.reserve(static_cast<std::size_t>(config.n_trials));
    TrialStatistics stats;
    const auto n = static_cast<std::size_t>(config.n_copies);
    for (int t = 0; t < config.n_trials; ++t) {
        const auto seed = rng::mix_seed(config.master_seed, static_cast<std::uint64_t>(t));
        const auto draws = sample_energies(config.model, config.beta_true, n, seed);
        double acc = 0.0;
        for (double e : draws) acc += e;
        try {
            const double beta_hat = invert_mean_energy(config.model, acc / static_cast<double>(n));
            s_hats.push_back(thermo::entropy(config.model, beta_hat));
            t_hats.push_back(1.0 / beta_hat);
        } catch (const range_error&) {
            ++stats.n_failed;  // excluded, never clamped: clamping biases the variances
        }
    }
    if (s_hats.empty()) throw domain_error("every trial failed mean-energy inversion");

    auto mean_of = [](const std::vector<double>& v) {
        double acc = 0.0;
        for (double x : v) acc += x;
        return acc / static_cast<double>(v.size());
    };
    auto var_of = [](const std::vector<double>& v, double mean) {
        if (v.size() < 2) return 0.0;  // single-trial variance is 0 by convention
        double acc = 0.0;
        for (double x : v) acc += (x - mean) * (x - mean);
        return acc / static_cast<double>(v.size() - 1);
    };
    stats.mean_S_hat = mean_of(s_hats);
    stats.var_S_hat = var_of(s_hats, stats.mean_S_hat);
    stats.mean_T_hat = mean_of(t_hats);
    stats.var_T_hat = var_of(t_hats, stats.mean_T_hat);
    const double nd = static_cast<double>(config.n_copies);
    const double t2 = truth.T * truth.T;
    stats.ratio_S = nd * stats.var_S_hat / truth.C_v;
    stats.ratio_T = nd * stats.var_T_hat * truth.C_v / t2;
    stats.product_ratio = stats.var_S_hat * stats.var_T_hat * nd * nd / t2;
    return stats;
}

}  // namespace gfi::estimation
