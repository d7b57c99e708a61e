#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "gfi/errors.hpp"

// Multiparameter exponential families over discrete microstates: ensembles
// with several commuting conserved charges, the two-parameter energy/particle
// ensemble, and generic conjugate intensive/extensive pairs.

namespace gfi::ensembles {

struct ChargeState {
    std::vector<double> charges;  // values of I_1..I_m on this microstate
    std::int64_t degeneracy = 1;
};

struct JointEnsemble {
    std::vector<ChargeState> states;
    std::vector<double> lambdas;  // Lagrange multipliers, one per charge
};

struct GgeReport {
    std::size_t m = 0;
    std::vector<double> fisher_matrix;     // row-major m x m, [F]_{kl} = Cov(I_k, I_l)
    std::vector<double> entropy_gradient;  // dS/dlambda_k = -(F*lambda)_k
    double F_S = 0.0;                      // 1/(lambda^T F lambda)
    double C_v_eff = 0.0;                  // lambda^T F lambda
    double ln_partition = 0.0;
    std::vector<double> mean_charges;
    double entropy = 0.0;  // sum_k lambda_k*<I_k> + ln_partition
};

namespace detail {

struct Weights {
    std::vector<double> p;    // normalized probabilities
    double ln_partition = 0;  // log of the unshifted normalizer
};

// p_s proportional to g_s * exp(-a_s); shift by min(a) keeps every
// exponential in (0, 1].
template <typename ActionFn, typename DegFn>
Weights normalized_weights(std::size_t count, ActionFn action, DegFn degeneracy) {
    double a_min = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < count; ++s) {
        const double a = action(s);
        if (!std::isfinite(a)) throw domain_error("microstate action must be finite");
        a_min = std::min(a_min, a);
    }
    Weights w;
    w.p.resize(count);
    double total = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
        const std::int64_t g = degeneracy(s);
        if (g < 1) throw domain_error("microstate degeneracy must be >= 1");
        w.p[s] = static_cast<double>(g) * std::exp(-(action(s) - a_min));
        total += w.p[s];
    }
    if (!(total > 0.0) || !std::isfinite(total))
        throw domain_error("ensemble weights are not normalizable");
    for (double& v : w.p) v /= total;
    w.ln_partition = std::log(total) - a_min;
    return w;
}

}  // namespace detail

inline GgeReport gge_report(const JointEnsemble& ensemble) {
    const std::size_t m = ensemble.lambdas.size();
    if (m < 1) throw domain_error("ensemble needs at least one charge");
    if (ensemble.states.empty()) throw domain_error("ensemble needs at least one microstate");
    for (const auto& st : ensemble.states)
        if (st.charges.size() != m)
            throw domain_error("every microstate must carry one value per charge");
    for (double l : ensemble.lambdas)
        if (!std::isfinite(l)) throw domain_error("Lagrange multipliers must be finite");

    const auto w = detail::normalized_weights(
        ensemble.states.size(),
        [&](std::size_t s) {
            double a = 0.0;
            for (std::size_t k = 0; k < m; ++k)
                a += ensemble.lambdas[k] * ensemble.states[s].charges[k];
            return a;
        },
        [&](std::size_t s) { return ensemble.states[s].degeneracy; });

    GgeReport r;
    r.m = m;
    r.ln_partition = w.ln_partition;
    r.mean_charges.assign(m, 0.0);
    for (std::size_t s = 0; s < ensemble.states.size(); ++s)
        for (std::size_t k = 0; k < m; ++k)
            r.mean_charges[k] += w.p[s] * ensemble.states[s].charges[k];

    r.fisher_matrix.assign(m * m, 0.0);
    for (std::size_t s = 0; s < ensemble.states.size(); ++s)
        for (std::size_t k = 0; k < m; ++k) {
            const double dk = ensemble.states[s].charges[k] - r.mean_charges[k];
            for (std::size_t l = k; l < m; ++l) {
                const double dl = ensemble.states[s].charges[l] - r.mean_charges[l];
                r.fisher_matrix[k * m + l] += w.p[s] * dk * dl;
            }
        }
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < k; ++l) r.fisher_matrix[k * m + l] = r.fisher_matrix[l * m + k];

    r.entropy_gradient.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        double acc = 0.0;
        for (std::size_t l = 0; l < m; ++l)
            acc += r.fisher_matrix[k * m + l] * ensemble.lambdas[l];
        r.entropy_gradient[k] = -acc;
    }

    double c_eff = 0.0;
    for (std::size_t k = 0; k < m; ++k) c_eff -= ensemble.lambdas[k] * r.entropy_gradient[k];
    r.C_v_eff = c_eff;
    if (!(c_eff > 0.0) || !std::isfinite(1.0 / c_eff))
        throw degenerate_error("all charges are degenerate under these multipliers (lambda^T F lambda = 0)");
    r.F_S = 1.0 / c_eff;

    r.entropy = r.ln_partition;
    for (std::size_t k = 0; k < m; ++k) r.entropy += ensemble.lambdas[k] * r.mean_charges[k];
    return r;
}

struct GceState {
    double energy = 0.0;
    double n_particles = 0.0;
    std::int64_t degeneracy = 1;
};

struct GceReport {
    double beta = 0.0;
    double mu = 0.0;
    double F_beta_beta = 0.0;  // Var(H - mu*N)
    double F_mu_mu = 0.0;      // beta^2 Var(N)
    double F_beta_mu = 0.0;    // -beta Cov(H - mu*N, N)
    double F_S_gce = 0.0;      // 1/(beta^2 Var(H - mu*N))
    double C_v_mu = 0.0;       // beta^2 Var(H - mu*N)
    // beta^2 (Var(H) - Cov(H,N)^2/Var(N)); absent when N never fluctuates.
    std::optional<double> C_v_fixed_N;
    double ln_partition = 0.0;
    double mean_E = 0.0;
    double mean_N = 0.0;
};

inline GceReport gce_report(std::span<const GceState> states, double beta, double mu) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw domain_error("inverse temperature must be positive and finite");
    if (!std::isfinite(mu)) throw domain_error("chemical potential must be finite");
    if (states.empty()) throw domain_error("ensemble needs at least one microstate");
    for (const auto& st : states)
        if (!std::isfinite(st.energy) || !std::isfinite(st.n_particles))
            throw domain_error("microstate energy and particle number must be finite");

    const auto w = detail::normalized_weights(
        states.size(),
        [&](std::size_t s) { return beta * (states[s].energy - mu * states[s].n_particles); },
        [&](std::size_t s) { return states[s].degeneracy; });

    GceReport r;
    r.beta = beta;
    r.mu = mu;
    r.ln_partition = w.ln_partition;
    for (std::size_t s = 0; s < states.size(); ++s) {
        r.mean_E += w.p[s] * states[s].energy;
        r.mean_N += w.p[s] * states[s].n_particles;
    }
    double var_E = 0.0, var_N = 0.0, cov_EN = 0.0;
    for (std::size_t s = 0; s < states.size(); ++s) {
        const double de = states[s].energy - r.mean_E;
        const double dn = states[s].n_particles - r.mean_N;
        var_E += w.p[s] * de * de;
        var_N += w.p[s] * dn * dn;
        cov_EN += w.p[s] * de * dn;
    }
    // K = H - mu*N; moments follow from the (E, N) central moments.
    const double var_K = var_E - 2.0 * mu * cov_EN + mu * mu * var_N;
    const double cov_KN = cov_EN - mu * var_N;
    r.F_beta_beta = var_K;
    r.F_mu_mu = beta * beta * var_N;
    r.F_beta_mu = -beta * cov_KN;
    r.C_v_mu = beta * beta * var_K;
    if (!(r.C_v_mu > 0.0) || !std::isfinite(1.0 / r.C_v_mu))
        throw degenerate_error("grand-canonical weights carry no energy information (Var(H - mu*N) = 0)");
    r.F_S_gce = 1.0 / r.C_v_mu;
    if (var_N > 0.0) r.C_v_fixed_N = beta * beta * (var_E - cov_EN * cov_EN / var_N);
    return r;
}

struct PairState {
    double energy = 0.0;   // base Hamiltonian value on this microstate
    double a = 0.0;        // conjugate observable value
    std::int64_t degeneracy = 1;
};

// Fisher pair for an intensive field lambda coupled as H + lambda*A.
struct ConjugatePairReport {
    double beta = 0.0;
    double T = 0.0;
    double lambda = 0.0;
    double mean_A = 0.0;
    double var_A = 0.0;
    double F_lambda = 0.0;  // beta^2 Var(A)
    double F_A = 0.0;       // 1/Var(A)
    double product = 0.0;   // F_lambda*F_A = beta^2 up to rounding

    // Two-estimator floor for n copies: product of the bounds is T^2/n^2.
    double bound_for_n(long long n) const {
        return T * T / (static_cast<double>(n) * static_cast<double>(n));
    }
};

inline ConjugatePairReport conjugate_pair_report(std::span<const PairState> states, double beta,
                                                 double lambda) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw domain_error("inverse temperature must be positive and finite");
    if (!std::isfinite(lambda)) throw domain_error("conjugate field must be finite");
    if (states.empty()) throw domain_error("ensemble needs at least one microstate");
    for (const auto& st : states)
        if (!std::isfinite(st.energy) || !std::isfinite(st.a))
            throw domain_error("microstate values must be finite");

    const auto w = detail::normalized_weights(
        states.size(),
        [&](std::size_t s) { return beta * (states[s].energy + lambda * states[s].a); },
        [&](std::size_t s) { return states[s].degeneracy; });

    ConjugatePairReport r;
    r.beta = beta;
    r.T = 1.0 / beta;
    r.lambda = lambda;
    for (std::size_t s = 0; s < states.size(); ++s) r.mean_A += w.p[s] * states[s].a;
    for (std::size_t s = 0; s < states.size(); ++s) {
        const double da = states[s].a - r.mean_A;
        r.var_A += w.p[s] * da * da;
    }
    if (!(r.var_A > 0.0) || !std::isfinite(1.0 / r.var_A))
        throw degenerate_error("conjugate observable has zero variance");
    r.F_lambda = beta * beta * r.var_A;
    r.F_A = 1.0 / r.var_A;
    r.product = r.F_lambda * r.F_A;
    return r;
}

}  // namespace gfi::ensembles
