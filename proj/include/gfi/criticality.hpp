#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <lapacke.h>

#include "gfi/errors.hpp"
#include "gfi/spectra.hpp"
#include "gfi/thermo.hpp"

// Exact thermodynamics of the L x L periodic-square-lattice spin model with
// unit ferromagnetic coupling (E = -sum over nearest-neighbour bonds of the
// spin product), by direct enumeration for small L and by row-to-row transfer
// operator for larger L, plus finite-size-scaling fits of the results.

namespace gfi::criticality {

// 2/ln(1+sqrt(2)): the self-dual point of the square-lattice model.
inline constexpr double critical_temperature = 2.269185314213022;

enum class IsingBackend { Enumerate, TransferMatrix };

struct IsingLattice {
    int L = 2;
    IsingBackend backend = IsingBackend::Enumerate;
};

namespace detail {

inline void validate_lattice(const IsingLattice& lat) {
    if (lat.L < 2) throw domain_error("lattice needs L >= 2");
    if (lat.backend == IsingBackend::Enumerate && lat.L > 4)
        throw domain_error("enumeration backend is limited to L <= 4 (2^(L*L) configurations)");
    if (lat.backend == IsingBackend::TransferMatrix && lat.L > 12)
        throw domain_error("transfer backend is limited to L <= 12 (2^L x 2^L matrix)");
}

// Bonds within one periodic row of spins s (bit = 1 means spin up):
// sum over i of s_i*s_{i+1} = L - 2*popcount(s ^ rotl(s)).
inline int row_bond_sum(std::uint32_t s, int L) {
    const std::uint32_t mask = (L == 32) ? ~0u : ((1u << L) - 1u);
    const std::uint32_t rot = ((s << 1) | (s >> (L - 1))) & mask;
    return L - 2 * std::popcount(s ^ rot);
}

// Alignment between two stacked rows: sum over i of s_i*s'_i.
inline int cross_bond_sum(std::uint32_t s, std::uint32_t t, int L) {
    return L - 2 * std::popcount(s ^ t);
}

}  // namespace detail

// Full energy histogram of the L x L torus, by enumerating all 2^(L*L)
// configurations. Each site contributes its right and down bonds, so every
// bond is counted once (L = 2 has doubled bonds, which is the standard
// consequence of periodic wrapping at that size).
inline spectra::FiniteSpectrum ising_spectrum(int L) {
    detail::validate_lattice({L, IsingBackend::Enumerate});
    const int n_sites = L * L;
    std::map<long long, std::int64_t> histogram;
    for (std::uint64_t config = 0; config < (1ULL << n_sites); ++config) {
        long long bond_sum = 0;
        for (int y = 0; y < L; ++y)
            for (int x = 0; x < L; ++x) {
                const int site = y * L + x;
                const int right = y * L + (x + 1) % L;
                const int down = ((y + 1) % L) * L + x;
                const int s = (config >> site) & 1 ? 1 : -1;
                const int sr = (config >> right) & 1 ? 1 : -1;
                const int sd = (config >> down) & 1 ? 1 : -1;
                bond_sum += s * sr + s * sd;
            }
        ++histogram[-bond_sum];
    }
    spectra::FiniteSpectrum fs;
    fs.levels.reserve(histogram.size());
    for (const auto& [e, g] : histogram) fs.levels.push_back({static_cast<double>(e), g});
    return fs;
}

namespace detail {

// ln Tr(T^L) via the full symmetric eigendecomposition of the row transfer
// operator T(s,t) = exp(beta*[cross(s,t) + row(s)/2 + row(t)/2]). The row
// terms are split symmetrically so T is symmetric; the largest exponent is
// subtracted before exponentiation and restored as L*shift at the end.
inline double transfer_ln_z(int L, double beta) {
    const auto dim = static_cast<std::size_t>(1) << L;
    std::vector<int> row(dim);
    for (std::size_t s = 0; s < dim; ++s)
        row[s] = row_bond_sum(static_cast<std::uint32_t>(s), L);

    std::vector<double> mat(dim * dim);
    double arg_max = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < dim; ++s)
        for (std::size_t t = s; t < dim; ++t) {
            const double arg =
                beta * (cross_bond_sum(static_cast<std::uint32_t>(s),
                                       static_cast<std::uint32_t>(t), L) +
                        0.5 * (row[s] + row[t]));
            mat[s * dim + t] = arg;
            arg_max = std::max(arg_max, arg);
        }
    for (std::size_t s = 0; s < dim; ++s)
        for (std::size_t t = s; t < dim; ++t) {
            const double v = std::exp(mat[s * dim + t] - arg_max);
            mat[s * dim + t] = v;
            mat[t * dim + s] = v;
        }

    std::vector<double> eig(dim);
    const auto n = static_cast<lapack_int>(dim);
    const lapack_int info =
        LAPACKE_dsyev(LAPACK_COL_MAJOR, 'N', 'U', n, mat.data(), n, eig.data());
    if (info != 0) throw numeric_error("symmetric eigensolver failed on the transfer operator");

    // All entries positive, so the top eigenvalue is positive and strictly
    // dominant; sum (eig_i/eig_max)^L with signs, anchored at the dominant one.
    const double lam_max = eig.back();
    if (!(lam_max > 0.0)) throw numeric_error("transfer operator lost its dominant eigenvalue");
    const double ln_lam_max = std::log(lam_max);
    double trace_ratio = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double a = std::abs(eig[i]);
        if (a == 0.0) continue;
        const double term = std::exp(L * (std::log(a) - ln_lam_max));
        trace_ratio += (eig[i] < 0.0 && (L % 2 != 0)) ? -term : term;
    }
    if (!(trace_ratio > 0.0)) throw numeric_error("transfer trace lost positivity");
    return static_cast<double>(L) * (arg_max + ln_lam_max) + std::log(trace_ratio);
}

}  // namespace detail

inline double ising_ln_Z(const IsingLattice& lat, double beta) {
    detail::validate_lattice(lat);
    thermo::detail::require_beta(beta);
    if (lat.backend == IsingBackend::Enumerate)
        return thermo::log_partition(spectra::ThermalModel{ising_spectrum(lat.L)}, beta);
    return detail::transfer_ln_z(lat.L, beta);
}

struct IsingThermo {
    int L = 0;
    double T = 0.0;
    double beta = 0.0;
    double ln_Z = 0.0;
    double var_H = 0.0;        // d^2 ln Z / d beta^2
    double C_v_total = 0.0;    // beta^2 var_H
    double C_v_per_spin = 0.0;
    double F_S = 0.0;          // 1/C_v_total
    double F_T = 0.0;          // C_v_total/T^2
    bool derivative_unstable = false;
};

// Heat capacity by numerical differentiation of ln Z: fourth-order central
// second-difference at steps h and h/2, combined by one Richardson level.
// The two levels disagreeing beyond 1e-6 relative sets the instability flag.
inline IsingThermo ising_thermo(const IsingLattice& lat, double T, double rel_step = 0.02) {
    detail::validate_lattice(lat);
    if (!(T > 0.0) || !std::isfinite(T)) throw domain_error("temperature must be positive and finite");
    if (!(rel_step > 0.0) || !(rel_step < 0.2)) throw domain_error("relative step must lie in (0, 0.2)");
    const double beta = 1.0 / T;
    const double h = rel_step * beta;
    auto f = [&](double c) { return ising_ln_Z(lat, beta + c * h); };
    const double f0 = f(0.0);
    const double fp1 = f(1.0), fm1 = f(-1.0);
    const double fp2 = f(2.0), fm2 = f(-2.0);
    const double fph = f(0.5), fmh = f(-0.5);
    const double d_h = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
    const double d_h2 = (-fp1 + 16.0 * fph - 30.0 * f0 + 16.0 * fmh - fm1) / (3.0 * h * h);
    const double second = (16.0 * d_h2 - d_h) / 15.0;

    IsingThermo it;
    it.L = lat.L;
    it.T = T;
    it.beta = beta;
    it.ln_Z = f0;
    it.var_H = second;
    it.C_v_total = beta * beta * second;
    it.derivative_unstable = std::abs(d_h2 - second) > 1e-6 * std::max(std::abs(second), 1e-8);
    // Rounding of ln Z enters the half-step stencil as roughly
    // 64*eps*|ln Z|/(3h^2); a C_v at or below that scale (times beta^2) is
    // indistinguishable from zero, as is anything under the 1e-14 floor.
    const double noise_floor = beta * beta * 64.0 * std::numeric_limits<double>::epsilon() *
                               std::max(std::abs(f0), 1.0) / (3.0 * h * h);
    if (!(it.C_v_total >= std::max(1e-14, 3.0 * noise_floor)))
        throw degenerate_error("heat capacity indistinguishable from zero at this temperature");
    it.C_v_per_spin = it.C_v_total / static_cast<double>(lat.L * lat.L);
    it.F_S = 1.0 / it.C_v_total;
    it.F_T = it.C_v_total / (T * T);
    return it;
}

struct ScalingEntry {
    int L = 0;
    double T = 0.0;
    double C_v_total = 0.0;
    double C_v_per_spin = 0.0;
    double F_S = 0.0;
};

struct ScalingSeries {
    std::vector<ScalingEntry> entries;
};

inline ScalingSeries scaling_series(std::span<const int> sizes, double T, IsingBackend backend) {
    if (sizes.empty()) throw domain_error("scaling series needs at least one lattice size");
    ScalingSeries series;
    series.entries.reserve(sizes.size());
    for (int L : sizes) {
        const auto it = ising_thermo({L, backend}, T);
        series.entries.push_back({L, T, it.C_v_total, it.C_v_per_spin, it.F_S});
    }
    return series;
}

enum class FssMode {
    PowerLaw,     // ln F_S against ln L
    Logarithmic,  // C_v_per_spin against ln L (the marginal case)
};

struct FssFit {
    double slope_or_amplitude = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline FssFit fss_fit(const ScalingSeries& series, FssMode mode) {
    const auto& e = series.entries;
    if (e.size() < 3) throw domain_error("scaling fit needs at least three entries");
    for (const auto& entry : e)
        if (entry.T != e.front().T)
            throw domain_error("scaling fit needs all entries at a common temperature");
    std::vector<double> xs, ys;
    xs.reserve(e.size());
    ys.reserve(e.size());
    for (const auto& entry : e) {
        xs.push_back(std::log(static_cast<double>(entry.L)));
        if (mode == FssMode::PowerLaw) {
            if (!(entry.F_S > 0.0)) throw domain_error("power-law fit needs positive F_S values");
            ys.push_back(std::log(entry.F_S));
        } else {
            ys.push_back(entry.C_v_per_spin);
        }
    }
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw domain_error("scaling fit needs at least two distinct lattice sizes");
    FssFit fit;
    fit.slope_or_amplitude = sxy / sxx;
    fit.intercept = my - fit.slope_or_amplitude * mx;
    const double ss_res = syy - sxy * sxy / sxx;
    fit.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

}  // namespace gfi::criticality
