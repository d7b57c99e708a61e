#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gfi/criticality.hpp"
#include "gfi/ensembles.hpp"
#include "gfi/errors.hpp"
#include "gfi/estimation.hpp"
#include "gfi/fisher.hpp"
#include "gfi/io.hpp"
#include "gfi/thermo.hpp"

// Command-line front end. Subcommands: thermo, fisher, renyi, simulate,
// ensemble, scaling. Sweep grids use one flag, min:max:count:spacing with
// spacing lin or log (a bare number is a single-point grid). All floating-
// point output goes through shortest round-trip formatting, so a repeated
// command yields byte-identical bytes.
//
// Exit codes: 0 success, 2 parse errors, 3 domain/range errors, 4 I/O errors.

namespace gfi::cli {

namespace detail {

using Cell = std::variant<std::monostate, long long, double, std::string>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

inline void append_csv(const Table& t, std::string& out) {
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (i) out += ',';
        out += t.header[i];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            std::visit(
                [&out](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, std::monostate>)
                        ;
                    else if constexpr (std::is_same_v<V, long long>)
                        out += std::to_string(v);
                    else if constexpr (std::is_same_v<V, double>)
                        out += io::fmt(v);
                    else
                        out += v;
                },
                row[i]);
        }
        out += '\n';
    }
}

inline nlohmann::ordered_json rows_json(const Table& t) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::visit(
                [&](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, std::monostate>)
                        obj[t.header[i]] = nullptr;
                    else
                        obj[t.header[i]] = v;
                },
                row[i]);
        }
        arr.push_back(std::move(obj));
    }
    return arr;
}

inline double parse_number(const std::string& s, const char* what) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw parse_error(std::string("cannot parse ") + what + ": '" + s + "'");
    return v;
}

inline long long parse_integer(const std::string& s, const char* what) {
    long long v = 0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw parse_error(std::string("cannot parse ") + what + ": '" + s + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

// "value" or "min:max:count:spacing" with spacing lin|log.
inline std::vector<double> parse_grid(const std::string& s) {
    const auto parts = split(s, ':');
    if (parts.size() == 1) return {parse_number(parts[0], "grid value")};
    if (parts.size() != 4)
        throw parse_error("grid must be a number or min:max:count:spacing, got '" + s + "'");
    const double lo = parse_number(parts[0], "grid min");
    const double hi = parse_number(parts[1], "grid max");
    const long long count = parse_integer(parts[2], "grid count");
    const std::string& spacing = parts[3];
    if (count < 1) throw parse_error("grid count must be >= 1");
    if (count == 1) return {lo};
    if (!(lo < hi)) throw parse_error("grid needs min < max when count > 1");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(count));
    if (spacing == "lin") {
        for (long long i = 0; i < count; ++i)
            values.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    } else if (spacing == "log") {
        if (!(lo > 0.0)) throw parse_error("log-spaced grid needs min > 0");
        const double llo = std::log(lo), lhi = std::log(hi);
        for (long long i = 0; i < count; ++i)
            values.push_back(
                std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(count - 1)));
    } else {
        throw parse_error("grid spacing must be lin or log, got '" + spacing + "'");
    }
    return values;
}

inline std::vector<double> parse_number_list(const std::string& s, const char* what) {
    std::vector<double> out;
    for (const auto& part : split(s, ',')) out.push_back(parse_number(part, what));
    return out;
}

inline std::vector<long long> parse_integer_list(const std::string& s, const char* what) {
    std::vector<long long> out;
    for (const auto& part : split(s, ',')) out.push_back(parse_integer(part, what));
    return out;
}

// Parameter fields start unset (NaN / 0) so a model kind can insist on the
// flags it actually needs instead of running on silent defaults.
struct ModelFlags {
    std::string name;
    std::string file;
    double gap = std::numeric_limits<double>::quiet_NaN();
    double omega = std::numeric_limits<double>::quiet_NaN();
    int dof = 0;
    std::string omegas;
    double t_rot = std::numeric_limits<double>::quiet_NaN();
    double t_vib = std::numeric_limits<double>::quiet_NaN();
};

inline void add_model_flags(CLI::App* cmd, ModelFlags& mf) {
    cmd->add_option("--model", mf.name,
                    "Built-in model: two-level|oscillator|classical|oscillator-bank|diatomic");
    cmd->add_option("--model-file", mf.file, "JSON model file (any kind, including spectrum)");
    cmd->add_option("--gap", mf.gap, "Two-level gap");
    cmd->add_option("--omega", mf.omega, "Oscillator frequency");
    cmd->add_option("--dof", mf.dof, "Classical quadratic degrees of freedom");
    cmd->add_option("--omegas", mf.omegas, "Oscillator-bank frequencies, comma separated");
    cmd->add_option("--t-rot", mf.t_rot, "Diatomic rotational threshold temperature");
    cmd->add_option("--t-vib", mf.t_vib, "Diatomic vibrational threshold temperature");
}

inline spectra::ThermalModel resolve_model(const ModelFlags& mf) {
    if (!mf.file.empty()) {
        if (!mf.name.empty()) throw parse_error("give either --model or --model-file, not both");
        return io::parse_model_json(io::read_file(mf.file));
    }
    if (mf.name.empty()) throw parse_error("a model is required: --model or --model-file");
    if (mf.name == "two-level") {
        if (std::isnan(mf.gap)) throw parse_error("two-level needs --gap");
        return spectra::build_model(spectra::TwoLevel{mf.gap});
    }
    if (mf.name == "oscillator") {
        if (std::isnan(mf.omega)) throw parse_error("oscillator needs --omega");
        return spectra::build_model(spectra::Oscillator{mf.omega});
    }
    if (mf.name == "classical") {
        if (mf.dof == 0) throw parse_error("classical needs --dof (>= 1)");
        return spectra::build_model(spectra::ClassicalQuadratic{mf.dof});
    }
    if (mf.name == "oscillator-bank") {
        if (mf.omegas.empty()) throw parse_error("oscillator-bank needs --omegas");
        return spectra::build_model(
            spectra::OscillatorBank{parse_number_list(mf.omegas, "--omegas entry")});
    }
    if (mf.name == "diatomic") {
        if (std::isnan(mf.t_rot) || std::isnan(mf.t_vib))
            throw parse_error("diatomic needs --t-rot and --t-vib");
        return spectra::build_model(spectra::DiatomicStaircase{mf.t_rot, mf.t_vib});
    }
    throw parse_error("unknown model '" + mf.name + "' (spectrum models load via --model-file)");
}

struct GridFlags {
    std::string T;
    std::string beta;
};

// Returns (beta values, T values) in emission order.
inline std::pair<std::vector<double>, std::vector<double>> resolve_grid(const GridFlags& gf) {
    if (gf.T.empty() == gf.beta.empty())
        throw parse_error("exactly one of --T or --beta is required");
    std::vector<double> betas, temps;
    if (!gf.T.empty()) {
        temps = parse_grid(gf.T);
        for (double t : temps) {
            if (!(t > 0.0)) throw domain_error("temperatures must be positive");
            betas.push_back(1.0 / t);
        }
    } else {
        betas = parse_grid(gf.beta);
        for (double b : betas) {
            if (!(b > 0.0)) throw domain_error("inverse temperatures must be positive");
            temps.push_back(1.0 / b);
        }
    }
    return {betas, temps};
}

struct OutputFlags {
    std::string format = "csv";
    std::string output;
};

inline void add_output_flags(CLI::App* cmd, OutputFlags& of, const char* default_format) {
    of.format = default_format;
    cmd->add_option("--format", of.format, "Output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--output", of.output, "Write to this file instead of standard output");
}

inline void write_text(const OutputFlags& of, std::ostream& out, const std::string& text) {
    if (of.output.empty()) {
        out << text;
        out.flush();
        return;
    }
    std::ofstream file(of.output, std::ios::binary);
    if (!file) throw io_error("cannot open output file: " + of.output);
    file << text;
    file.flush();
    if (!file) throw io_error("cannot write output file: " + of.output);
}

inline std::string render(const Table& t, const std::string& format) {
    std::string text;
    if (format == "csv") {
        append_csv(t, text);
    } else {
        text = rows_json(t).dump();
        text += '\n';
    }
    return text;
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fisher information and estimation bounds for thermal states"};
    app.require_subcommand(1);

    // thermo
    detail::ModelFlags thermo_model;
    detail::GridFlags thermo_grid;
    detail::OutputFlags thermo_out;
    std::string length_range;
    double length_tol = 1e-10;
    auto* cmd_thermo = app.add_subcommand("thermo", "Equilibrium quantities over a sweep");
    detail::add_model_flags(cmd_thermo, thermo_model);
    cmd_thermo->add_option("--T", thermo_grid.T, "Temperature grid (value or min:max:count:lin|log)");
    cmd_thermo->add_option("--beta", thermo_grid.beta, "Inverse-temperature grid");
    cmd_thermo->add_option("--length", length_range,
                           "Emit the entropy-coordinate path length for beta_1:beta_2 instead of a sweep");
    cmd_thermo->add_option("--tol", length_tol, "Quadrature tolerance for --length");
    detail::add_output_flags(cmd_thermo, thermo_out, "csv");

    // fisher
    detail::ModelFlags fisher_model;
    detail::GridFlags fisher_grid;
    detail::OutputFlags fisher_out;
    int fisher_n = 1;
    auto* cmd_fisher = app.add_subcommand("fisher", "Fisher information and Cramer-Rao bounds over a sweep");
    detail::add_model_flags(cmd_fisher, fisher_model);
    cmd_fisher->add_option("--T", fisher_grid.T, "Temperature grid (value or min:max:count:lin|log)");
    cmd_fisher->add_option("--beta", fisher_grid.beta, "Inverse-temperature grid");
    cmd_fisher->add_option("--n", fisher_n, "Number of copies for the Cramer-Rao entries");
    detail::add_output_flags(cmd_fisher, fisher_out, "csv");

    // renyi
    detail::ModelFlags renyi_model;
    detail::GridFlags renyi_grid;
    detail::OutputFlags renyi_out;
    std::string alpha_list = "2";
    auto* cmd_renyi = app.add_subcommand("renyi", "Order-alpha entropies and their Fisher information");
    detail::add_model_flags(cmd_renyi, renyi_model);
    cmd_renyi->add_option("--T", renyi_grid.T, "Temperature grid (value or min:max:count:lin|log)");
    cmd_renyi->add_option("--beta", renyi_grid.beta, "Inverse-temperature grid");
    cmd_renyi->add_option("--alpha", alpha_list, "Entropy orders, comma separated");
    detail::add_output_flags(cmd_renyi, renyi_out, "csv");

    // simulate
    detail::ModelFlags sim_model;
    detail::OutputFlags sim_out;
    double sim_beta = 1.0;
    std::string sim_n = "1000";
    int sim_trials = 1000;
    std::uint64_t sim_seed = 42;  // fixed default on purpose: reproducibility first
    auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo estimator-variance trials");
    detail::add_model_flags(cmd_sim, sim_model);
    cmd_sim->add_option("--beta", sim_beta, "True inverse temperature")->required();
    cmd_sim->add_option("--n", sim_n, "Copies per trial, comma separated for a study");
    cmd_sim->add_option("--trials", sim_trials, "Number of trials per configuration");
    cmd_sim->add_option("--seed", sim_seed, "Master seed");
    detail::add_output_flags(cmd_sim, sim_out, "csv");

    // ensemble
    detail::OutputFlags ens_out;
    std::string ens_file;
    auto* cmd_ens = app.add_subcommand("ensemble", "Multiparameter ensemble Fisher report from a JSON file");
    cmd_ens->add_option("--file", ens_file, "Ensemble JSON file")->required();
    detail::add_output_flags(cmd_ens, ens_out, "json");

    // scaling
    detail::OutputFlags scal_out;
    std::string scal_L = "4,6,8";
    double scal_T = criticality::critical_temperature;
    std::string scal_backend = "transfer";
    std::string scal_fit = "log";
    auto* cmd_scal = app.add_subcommand("scaling", "Finite-size series of the lattice model");
    cmd_scal->add_option("--L", scal_L, "Lattice sizes, comma separated");
    cmd_scal->add_option("--T", scal_T, "Temperature");
    cmd_scal->add_option("--backend", scal_backend, "enumerate|transfer")
        ->check(CLI::IsMember({"enumerate", "transfer"}));
    cmd_scal->add_option("--fit", scal_fit, "Fit appended to the series: log|power|none")
        ->check(CLI::IsMember({"log", "power", "none"}));
    detail::add_output_flags(cmd_scal, scal_out, "csv");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("gfi");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: parse: " << e.what() << '\n';
        return 2;
    }

    try {
        if (cmd_thermo->parsed()) {
            detail::Table t;
            if (!length_range.empty()) {
                const auto model = detail::resolve_model(thermo_model);
                const auto parts = detail::split(length_range, ':');
                if (parts.size() != 2) throw parse_error("--length needs beta_1:beta_2");
                const double b1 = detail::parse_number(parts[0], "--length beta_1");
                const double b2 = detail::parse_number(parts[1], "--length beta_2");
                t.header = {"beta_1", "beta_2", "length"};
                t.rows.push_back({b1, b2, thermo::thermo_length(model, b1, b2, length_tol)});
            } else {
                const auto model = detail::resolve_model(thermo_model);
                const auto [betas, temps] = detail::resolve_grid(thermo_grid);
                t.header = {"T", "beta", "ln_Z", "U", "var_H", "Cv", "S"};
                for (std::size_t i = 0; i < betas.size(); ++i) {
                    const auto tp = thermo::thermo_point(model, betas[i]);
                    t.rows.push_back({temps[i], betas[i], tp.ln_Z, tp.U, tp.var_H, tp.C_v, tp.S});
                }
            }
            detail::write_text(thermo_out, out, detail::render(t, thermo_out.format));
            return 0;
        }

        if (cmd_fisher->parsed()) {
            const auto model = detail::resolve_model(fisher_model);
            const auto [betas, temps] = detail::resolve_grid(fisher_grid);
            detail::Table t;
            t.header = {"T",       "beta",     "Cv",       "F_S",       "F_T",
                        "product", "cr_var_S", "cr_var_T", "cr_product"};
            for (std::size_t i = 0; i < betas.size(); ++i) {
                const auto r = fisher::fisher_report(model, betas[i], fisher_n);
                t.rows.push_back({temps[i], betas[i], r.C_v, r.F_S, r.F_T, r.product_FS_FT,
                                  r.cr_var_S, r.cr_var_T, r.cr_product});
            }
            detail::write_text(fisher_out, out, detail::render(t, fisher_out.format));
            return 0;
        }

        if (cmd_renyi->parsed()) {
            const auto model = detail::resolve_model(renyi_model);
            const auto [betas, temps] = detail::resolve_grid(renyi_grid);
            const auto alphas = detail::parse_number_list(alpha_list, "--alpha entry");
            detail::Table t;
            t.header = {"T",     "beta",    "Cv",        "F_S",       "F_T",
                        "product", "alpha", "S_alpha", "F_S_alpha", "C_v_alpha",
                        "product_with_F_T"};
            for (std::size_t i = 0; i < betas.size(); ++i) {
                const auto base = fisher::fisher_report(model, betas[i]);
                for (double alpha : alphas) {
                    const auto rp = thermo::renyi_point(model, betas[i], alpha);
                    const auto rf = fisher::renyi_fisher(model, betas[i], alpha);
                    t.rows.push_back({temps[i], betas[i], base.C_v, base.F_S, base.F_T,
                                      base.product_FS_FT, alpha, rp.S_alpha, rf.F_S_alpha,
                                      rf.C_v_alpha, rf.product_with_F_T});
                }
            }
            detail::write_text(renyi_out, out, detail::render(t, renyi_out.format));
            return 0;
        }

        if (cmd_sim->parsed()) {
            const auto model = detail::resolve_model(sim_model);
            const auto ns = detail::parse_integer_list(sim_n, "--n entry");
            detail::Table t;
            t.header = {"beta",    "n",       "trials",        "mean_S_hat", "var_S_hat",
                        "mean_T_hat", "var_T_hat", "ratio_S", "ratio_T",    "product_ratio",
                        "n_failed"};
            for (long long n : ns) {
                if (n < 2 || n > std::numeric_limits<int>::max())
                    throw domain_error("simulate needs 2 <= n per trial <= 2^31-1");
                estimation::SimConfig cfg{model, sim_beta, static_cast<int>(n), sim_trials, sim_seed};
                const auto st = estimation::run_trials(cfg);
                t.rows.push_back({sim_beta, n, static_cast<long long>(sim_trials), st.mean_S_hat,
                                  st.var_S_hat, st.mean_T_hat, st.var_T_hat, st.ratio_S, st.ratio_T,
                                  st.product_ratio, st.n_failed});
            }
            detail::write_text(sim_out, out, detail::render(t, sim_out.format));
            return 0;
        }

        if (cmd_ens->parsed()) {
            const auto input = io::parse_ensemble_json(io::read_file(ens_file));
            detail::Table t;
            if (const auto* gge = std::get_if<ensembles::JointEnsemble>(&input)) {
                const auto r = ensembles::gge_report(*gge);
                t.header = {"m", "F_S", "C_v_eff", "entropy", "ln_partition"};
                std::vector<detail::Cell> row{static_cast<long long>(r.m), r.F_S, r.C_v_eff,
                                              r.entropy, r.ln_partition};
                for (std::size_t k = 0; k < r.m; ++k) {
                    t.header.push_back("mean_" + std::to_string(k));
                    row.push_back(r.mean_charges[k]);
                }
                for (std::size_t k = 0; k < r.m; ++k) {
                    t.header.push_back("grad_S_" + std::to_string(k));
                    row.push_back(r.entropy_gradient[k]);
                }
                for (std::size_t k = 0; k < r.m; ++k)
                    for (std::size_t l = 0; l < r.m; ++l) {
                        t.header.push_back("fisher_" + std::to_string(k) + "_" + std::to_string(l));
                        row.push_back(r.fisher_matrix[k * r.m + l]);
                    }
                t.rows.push_back(std::move(row));
            } else {
                const auto& in = std::get<io::GceInput>(input);
                const auto r = ensembles::gce_report(in.states, in.beta, in.mu);
                t.header = {"beta",    "mu",          "F_beta_beta", "F_mu_mu", "F_beta_mu",
                            "F_S_gce", "C_v_mu",      "C_v_fixed_N", "ln_partition", "mean_E",
                            "mean_N"};
                detail::Cell fixed_n = std::monostate{};
                if (r.C_v_fixed_N) fixed_n = *r.C_v_fixed_N;
                t.rows.push_back({r.beta, r.mu, r.F_beta_beta, r.F_mu_mu, r.F_beta_mu, r.F_S_gce,
                                  r.C_v_mu, fixed_n, r.ln_partition, r.mean_E, r.mean_N});
            }
            detail::write_text(ens_out, out, detail::render(t, ens_out.format));
            return 0;
        }

        if (cmd_scal->parsed()) {
            if (!(scal_T > 0.0)) throw domain_error("temperature must be positive");
            const auto ll = detail::parse_integer_list(scal_L, "--L entry");
            std::vector<int> sizes;
            for (long long v : ll) {
                if (v < 2 || v > 64) throw domain_error("lattice sizes must lie in [2, 64]");
                sizes.push_back(static_cast<int>(v));
            }
            const auto backend = scal_backend == "enumerate" ? criticality::IsingBackend::Enumerate
                                                             : criticality::IsingBackend::TransferMatrix;
            const auto series = criticality::scaling_series(sizes, scal_T, backend);
            detail::Table t;
            t.header = {"L", "T", "t", "Cv_total", "Cv_per_spin", "F_S"};
            for (const auto& e : series.entries) {
                const double reduced =
                    (e.T - criticality::critical_temperature) / criticality::critical_temperature;
                t.rows.push_back({static_cast<long long>(e.L), e.T, reduced, e.C_v_total,
                                  e.C_v_per_spin, e.F_S});
            }
            std::optional<criticality::FssFit> fit;
            std::string fit_name;
            if (scal_fit != "none" && series.entries.size() >= 3) {
                const auto mode = scal_fit == "power" ? criticality::FssMode::PowerLaw
                                                      : criticality::FssMode::Logarithmic;
                fit = criticality::fss_fit(series, mode);
                fit_name = scal_fit == "power" ? "power_law" : "logarithmic";
            }
            std::string text;
            if (scal_out.format == "csv") {
                detail::append_csv(t, text);
                if (fit) {
                    detail::Table ft;
                    ft.header = {"fit_mode", "slope_or_amplitude", "intercept", "r_squared"};
                    ft.rows.push_back(
                        {fit_name, fit->slope_or_amplitude, fit->intercept, fit->r_squared});
                    text += '\n';
                    detail::append_csv(ft, text);
                }
            } else {
                nlohmann::ordered_json doc;
                doc["series"] = detail::rows_json(t);
                if (fit) {
                    doc["fit"] = {{"mode", fit_name},
                                  {"slope_or_amplitude", fit->slope_or_amplitude},
                                  {"intercept", fit->intercept},
                                  {"r_squared", fit->r_squared}};
                } else {
                    doc["fit"] = nullptr;
                }
                text = doc.dump();
                text += '\n';
            }
            detail::write_text(scal_out, out, text);
            return 0;
        }

        throw parse_error("no subcommand given");
    } catch (const parse_error& e) {
        err << "error: parse: " << e.what() << '\n';
        return 2;
    } catch (const io_error& e) {
        err << "error: io: " << e.what() << '\n';
        return 4;
    } catch (const range_error& e) {
        err << "error: range: " << e.what() << '\n';
        return 3;
    } catch (const error& e) {
        err << "error: domain: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace gfi::cli
