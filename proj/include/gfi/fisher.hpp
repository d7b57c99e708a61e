#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "gfi/errors.hpp"
#include "gfi/thermo.hpp"

// Single-parameter Fisher information of the thermal family in its three
// parametrisations (beta, T, S), the Cramer-Rao bounds they imply, and the
// order-alpha and classical-limit variants.

namespace gfi::fisher {

using spectra::ThermalModel;

struct FisherReport {
    double beta = 0.0;
    double T = 0.0;
    double C_v = 0.0;
    double F_beta = 0.0;         // var_H
    double F_T = 0.0;            // C_v/T^2
    double F_S = 0.0;            // 1/C_v
    double product_FS_FT = 0.0;  // = 1/T^2 up to rounding
    double cr_var_S = 0.0;       // C_v/n
    double cr_var_T = 0.0;       // T^2/(n*C_v)
    double cr_product = 0.0;     // cr_var_S*cr_var_T, = T^2/n^2
    int n_copies = 1;
};

struct RenyiFisherReport {
    double alpha = 1.0;
    double F_S_alpha = 0.0;
    double C_v_alpha = 0.0;  // 1/F_S_alpha
    double product_with_F_T = 0.0;
};

namespace detail {

inline void require_positive_heat_capacity(double c_v) {
    if (!(c_v > 0.0) || !std::isfinite(1.0 / c_v))
        throw degenerate_error(
            "heat capacity vanishes at this temperature (single effective level), so the "
            "entropy-parameter information is undefined");
}

}  // namespace detail

inline FisherReport fisher_report(const ThermalModel& m, double beta, int n_copies = 1) {
    if (n_copies < 1) throw domain_error("copy count must be >= 1");
    const auto tp = thermo::thermo_point(m, beta);
    detail::require_positive_heat_capacity(tp.C_v);
    FisherReport r;
    r.beta = beta;
    r.T = tp.T;
    r.C_v = tp.C_v;
    r.F_beta = tp.var_H;
    r.F_T = tp.C_v * beta * beta;
    r.F_S = 1.0 / tp.C_v;
    r.product_FS_FT = r.F_S * r.F_T;
    const double n = static_cast<double>(n_copies);
    r.cr_var_S = tp.C_v / n;
    r.cr_var_T = tp.T * tp.T / (n * tp.C_v);
    r.cr_product = r.cr_var_S * r.cr_var_T;
    r.n_copies = n_copies;
    return r;
}

// Equipartition floor: f quadratic degrees of freedom give C_v = f/2
// independent of T, hence F_S = 2/f exactly.
inline FisherReport classical_limit_report(int f, double T) {
    if (f < 1) throw domain_error("classical model needs dof >= 1");
    if (!(T > 0.0) || !std::isfinite(T)) throw domain_error("temperature must be positive and finite");
    FisherReport r;
    r.beta = 1.0 / T;
    r.T = T;
    r.C_v = 0.5 * static_cast<double>(f);
    r.F_beta = r.C_v * T * T;
    r.F_T = r.C_v / (T * T);
    r.F_S = 2.0 / static_cast<double>(f);
    r.product_FS_FT = r.F_S * r.F_T;
    r.cr_var_S = r.C_v;
    r.cr_var_T = T * T / r.C_v;
    r.cr_product = r.cr_var_S * r.cr_var_T;
    r.n_copies = 1;
    return r;
}

namespace detail {

// Unit-frequency oscillator heat capacity as a function of scaled
// temperature tau = T/omega, and the residual g(tau) = C_v - tau whose roots
// are the F_S = F_T crossings.
inline double unit_osc_cv(double tau) {
    const double x = 1.0 / tau;
    const double n = 1.0 / std::expm1(x);
    return x * x * n * (1.0 + n);
}

inline double crossing_residual(double tau) { return unit_osc_cv(tau) - tau; }

// d/dtau of the residual; d(C_v)/dx = C_v*(2/x + 1 - 2*e^x/(e^x - 1)).
inline double crossing_residual_prime(double tau) {
    const double x = 1.0 / tau;
    const double cv = unit_osc_cv(tau);
    const double dcv_dx = cv * (2.0 / x + 1.0 - 2.0 * (1.0 + 1.0 / std::expm1(x)));
    return -x * x * dcv_dx - 1.0;
}

}  // namespace detail

// The two temperatures where the oscillator satisfies F_S = F_T, i.e.
// C_v(T) = T. Solved in units of omega (the condition is scale covariant),
// so the roots scale linearly with omega. Bracketing on a log grid, then
// bisection, then one Newton polish step.
inline std::pair<double, double> oscillator_crossings(double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw domain_error("oscillator frequency must be positive and finite");
    std::vector<double> roots;
    const int grid_n = 200;
    const double lo = 0.05, hi = 5.0;
    double prev_tau = lo;
    double prev_g = detail::crossing_residual(lo);
    for (int i = 1; i <= grid_n; ++i) {
        const double tau = lo * std::pow(hi / lo, static_cast<double>(i) / grid_n);
        const double g = detail::crossing_residual(tau);
        if ((prev_g < 0.0) != (g < 0.0)) {
            double a = prev_tau, b = tau;
            double ga = prev_g;
            for (int it = 0; it < 200 && (b - a) > 1e-12 * a; ++it) {
                const double mid = 0.5 * (a + b);
                const double gm = detail::crossing_residual(mid);
                if ((ga < 0.0) != (gm < 0.0))
                    b = mid;
                else
                    a = mid, ga = gm;
            }
            double root = 0.5 * (a + b);
            root -= detail::crossing_residual(root) / detail::crossing_residual_prime(root);
            roots.push_back(root);
        }
        prev_tau = tau;
        prev_g = g;
    }
    if (roots.size() != 2)
        throw numeric_error("expected exactly two C_v(T) = T crossings for the oscillator");
    return {roots[0] * omega, roots[1] * omega};
}

// Order-alpha entropy information
//   F_S_alpha = (alpha-1)^2 var_H(beta) / (alpha^2 [U(alpha*beta) - U(beta)]^2),
// with the analytic 1/C_v limit within 1e-8 of alpha = 1.
inline RenyiFisherReport renyi_fisher(const ThermalModel& m, double beta, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw domain_error("entropy order alpha must be positive and finite");
    const auto tp = thermo::thermo_point(m, beta);
    detail::require_positive_heat_capacity(tp.C_v);
    RenyiFisherReport r;
    r.alpha = alpha;
    const double f_t = tp.C_v * beta * beta;
    if (std::abs(alpha - 1.0) < 1e-8) {
        r.F_S_alpha = 1.0 / tp.C_v;
    } else {
        const double du = thermo::mean_energy(m, alpha * beta) - tp.U;
        if (du == 0.0 || !std::isfinite(du))
            throw degenerate_error("mean energy does not separate beta from alpha*beta");
        const double ratio = (alpha - 1.0) / (alpha * du);
        r.F_S_alpha = ratio * ratio * tp.var_H;
    }
    r.C_v_alpha = 1.0 / r.F_S_alpha;
    r.product_with_F_T = r.F_S_alpha * f_t;
    return r;
}

struct QuantumCorrection {
    double F_S_exact = 0.0;   // 1/C_v of the oscillator bank
    double F_S_series = 0.0;  // (2/f)(1 + sum (beta*w_i)^2/(6f)), f = 2*#modes
};

// High-temperature comparison of the exact bank F_S against its small-
// (beta*omega) series. Each oscillator mode counts as two quadratic degrees
// of freedom, so a single mode tends to F_S = 1 and the series reads
// 1 + (beta*omega)^2/12.
inline QuantumCorrection quantum_correction_check(std::span<const double> omegas, double beta) {
    thermo::detail::require_beta(beta);
    if (omegas.empty()) throw domain_error("oscillator bank must have at least one mode");
    double c_v = 0.0;
    double sum_x2 = 0.0;
    for (double w : omegas) {
        if (!(w > 0.0) || !std::isfinite(w))
            throw domain_error("oscillator bank frequencies must be positive and finite");
        const double x = beta * w;
        const double n = 1.0 / std::expm1(x);
        c_v += x * x * n * (1.0 + n);
        sum_x2 += x * x;
    }
    detail::require_positive_heat_capacity(c_v);
    const double f = 2.0 * static_cast<double>(omegas.size());
    QuantumCorrection q;
    q.F_S_exact = 1.0 / c_v;
    q.F_S_series = (2.0 / f) * (1.0 + sum_x2 / (6.0 * f));
    return q;
}

}  // namespace gfi::fisher
