#pragma once

#include <cmath>
#include <limits>
#include <variant>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gfi/errors.hpp"
#include "gfi/spectra.hpp"

// Log-partition function, energy moments, entropies, thermodynamic length.

namespace gfi::thermo {

using spectra::ThermalModel;

// Everything at one inverse temperature.
struct ThermoPoint {
    double beta = 0.0;
    double T = 0.0;
    double ln_Z = 0.0;
    double U = 0.0;      // <H>
    double var_H = 0.0;  // <H^2> - <H>^2
    double C_v = 0.0;    // beta^2 * var_H
    double S = 0.0;      // beta*U + ln Z, computed in shifted form
};

struct RenyiPoint {
    double alpha = 1.0;
    double S_alpha = 0.0;
    double dS_alpha_dbeta = 0.0;
    double U_at_alpha_beta = 0.0;
};

namespace detail {

// Moments carried in ground-state-shifted form: ln_zt = ln Z + beta*e0.
// The shift keeps every exponential in (0, 1] so large beta cannot overflow,
// and s = beta*(u - e0) + ln_zt avoids the beta*U vs ln Z cancellation.
struct Parts {
    double ln_zt = 0.0;
    double e0 = 0.0;
    double u = 0.0;
    double var = 0.0;
    double s = 0.0;
};

// One bosonic mode of energy scale w: occupancy n = 1/(e^{beta*w} - 1).
// with_zero_point controls whether e0 and u include w/2.
inline Parts bose_mode(double w, double beta, bool with_zero_point) {
    const double x = beta * w;
    const double n = 1.0 / std::expm1(x);
    const double lt = -std::log(-std::expm1(-x));  // -ln(1 - e^{-x})
    Parts p;
    p.ln_zt = lt;
    p.e0 = with_zero_point ? 0.5 * w : 0.0;
    p.u = p.e0 + w * n;
    p.var = w * w * n * (1.0 + n);
    p.s = x * n + lt;
    return p;
}

inline Parts accumulate(Parts a, const Parts& b) {
    a.ln_zt += b.ln_zt;
    a.e0 += b.e0;
    a.u += b.u;
    a.var += b.var;
    a.s += b.s;
    return a;
}

inline Parts spectrum_parts(const spectra::FiniteSpectrum& fs, double beta) {
    const double e0 = fs.levels.front().energy;  // sorted ascending
    double zt = 0.0;
    double acc_e = 0.0;  // sum of w_k*(E_k - e0), unnormalized
    for (const auto& lv : fs.levels) {
        const double de = lv.energy - e0;
        const double w = static_cast<double>(lv.degeneracy) * std::exp(-beta * de);
        zt += w;
        acc_e += w * de;
    }
    const double u_sh = acc_e / zt;  // U - e0
    double acc_v = 0.0;
    for (const auto& lv : fs.levels) {
        const double de = lv.energy - e0;
        const double w = static_cast<double>(lv.degeneracy) * std::exp(-beta * de);
        acc_v += w * (de - u_sh) * (de - u_sh);
    }
    Parts p;
    p.ln_zt = std::log(zt);
    p.e0 = e0;
    p.u = e0 + u_sh;
    p.var = acc_v / zt;
    p.s = beta * u_sh + p.ln_zt;
    return p;
}

inline Parts model_parts(const ThermalModel& m, double beta) {
    struct Eval {
        double beta;
        Parts operator()(const spectra::FiniteSpectrum& fs) const {
            return spectrum_parts(fs, beta);
        }
        Parts operator()(const spectra::TwoLevel& tl) const {
            const double x = beta * tl.gap;
            const double p1 = 1.0 / (1.0 + std::exp(x));  // upper-level weight
            Parts p;
            p.ln_zt = std::log1p(std::exp(-x));
            p.u = tl.gap * p1;
            p.var = tl.gap * tl.gap * p1 * (1.0 - p1);
            p.s = x * p1 + p.ln_zt;
            return p;
        }
        Parts operator()(const spectra::Oscillator& o) const {
            return bose_mode(o.omega, beta, true);
        }
        Parts operator()(const spectra::OscillatorBank& b) const {
            Parts p;
            for (double w : b.omegas) p = accumulate(p, bose_mode(w, beta, true));
            return p;
        }
        Parts operator()(const spectra::ClassicalQuadratic& c) const {
            const double f = static_cast<double>(c.dof);
            Parts p;
            p.ln_zt = -0.5 * f * std::log(beta);
            p.u = 0.5 * f / beta;
            p.var = 0.5 * f / (beta * beta);
            p.s = 0.5 * f + p.ln_zt;
            return p;
        }
        Parts operator()(const spectra::DiatomicStaircase& d) const {
            Parts p;
            p.ln_zt = -1.5 * std::log(beta);
            p.u = 1.5 / beta;
            p.var = 1.5 / (beta * beta);
            p.s = 1.5 + p.ln_zt;
            p = accumulate(p, bose_mode(d.t_rot, beta, false));
            return accumulate(p, bose_mode(d.t_vib, beta, false));
        }
    };
    return std::visit(Eval{beta}, m);
}

inline void require_beta(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw domain_error("inverse temperature must be positive and finite");
}

}  // namespace detail

inline double log_partition(const ThermalModel& m, double beta) {
    detail::require_beta(beta);
    const auto p = detail::model_parts(m, beta);
    const double ln_z = p.ln_zt - beta * p.e0;
    if (!std::isfinite(ln_z)) throw range_error("log partition function is not finite");
    return ln_z;
}

inline double mean_energy(const ThermalModel& m, double beta) {
    detail::require_beta(beta);
    return detail::model_parts(m, beta).u;
}

inline double energy_variance(const ThermalModel& m, double beta) {
    detail::require_beta(beta);
    return detail::model_parts(m, beta).var;
}

inline double entropy(const ThermalModel& m, double beta) {
    detail::require_beta(beta);
    return detail::model_parts(m, beta).s;
}

inline ThermoPoint thermo_point(const ThermalModel& m, double beta) {
    detail::require_beta(beta);
    const auto p = detail::model_parts(m, beta);
    ThermoPoint tp;
    tp.beta = beta;
    tp.T = 1.0 / beta;
    tp.ln_Z = p.ln_zt - beta * p.e0;
    tp.U = p.u;
    tp.var_H = p.var;
    tp.C_v = beta * beta * p.var;
    tp.S = p.s;
    if (!std::isfinite(tp.ln_Z)) throw range_error("log partition function is not finite");
    return tp;
}

// Order-alpha entropy from the two-point identity
//   ln Tr rho^alpha = ln Z(alpha*beta) - alpha*ln Z(beta),
// evaluated on ground-state-shifted log partitions (the e0 terms cancel
// exactly, so large beta stays well conditioned). Within 1e-8 of alpha = 1
// the analytic limit branch is used instead of the 0/0 expression.
inline RenyiPoint renyi_point(const ThermalModel& m, double beta, double alpha) {
    detail::require_beta(beta);
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw domain_error("entropy order alpha must be positive and finite");
    RenyiPoint rp;
    rp.alpha = alpha;
    const auto p1 = detail::model_parts(m, beta);
    if (std::abs(alpha - 1.0) < 1e-8) {
        rp.S_alpha = p1.s;
        rp.dS_alpha_dbeta = -beta * p1.var;  // = -C_v/beta
        rp.U_at_alpha_beta = p1.u;
        return rp;
    }
    const auto pa = detail::model_parts(m, alpha * beta);
    rp.S_alpha = (pa.ln_zt - alpha * p1.ln_zt) / (1.0 - alpha);
    rp.dS_alpha_dbeta = alpha / (alpha - 1.0) * (pa.u - p1.u);
    rp.U_at_alpha_beta = pa.u;
    if (!std::isfinite(rp.S_alpha)) throw range_error("order-alpha entropy is not finite");
    return rp;
}

// Path length in entropy coordinates between two inverse temperatures:
// integral of sqrt(C_v(beta))/beta = sqrt(var_H(beta)) d(beta).
inline double thermo_length(const ThermalModel& m, double beta_1, double beta_2,
                            double quadrature_tol = 1e-10) {
    detail::require_beta(beta_1);
    detail::require_beta(beta_2);
    if (beta_1 > beta_2) throw domain_error("thermo_length requires beta_1 <= beta_2");
    if (!(quadrature_tol > 0.0)) throw domain_error("quadrature tolerance must be positive");
    if (beta_1 == beta_2) return 0.0;
    for (double b : {beta_1, 0.5 * (beta_1 + beta_2), beta_2})
        if (!(energy_variance(m, b) > 0.0))
            throw degenerate_error("zero heat capacity on the integration path");
    auto integrand = [&m](double b) { return std::sqrt(detail::model_parts(m, b).var); };
    double err = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        integrand, beta_1, beta_2, 15, quadrature_tol, &err);
    if (!std::isfinite(value)) throw range_error("thermodynamic length integral diverged");
    return value;
}

}  // namespace gfi::thermo
