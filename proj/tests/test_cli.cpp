#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfi/cli.hpp"
#include "gfi/thermo.hpp"

using Catch::Approx;
using namespace gfi;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    RunResult r;
    r.code = cli::run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

std::vector<std::string> fields_of(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

// Scratch file that removes itself; contents written at construction.
struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& stem, const std::string& contents) {
        path = std::filesystem::temp_directory_path() / stem;
        std::ofstream f(path);
        f << contents;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("fisher sweep satisfies the information product row by row", "[cli]") {
    const auto r = run({"fisher", "--model", "two-level", "--gap", "1", "--T",
                        "0.05:50:200:log", "--n", "1"});
    REQUIRE(r.code == 0);
    CHECK(r.err.empty());
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 201);
    CHECK(lines[0] == "T,beta,Cv,F_S,F_T,product,cr_var_S,cr_var_T,cr_product");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = fields_of(lines[i]);
        REQUIRE(f.size() == 9);
        const double T = std::stod(f[0]);
        const double product = std::stod(f[5]);
        CHECK(std::abs(product * T * T - 1.0) < 1e-11);
    }
    CHECK(std::stod(fields_of(lines[1])[0]) == Approx(0.05).epsilon(1e-12));
    CHECK(std::stod(fields_of(lines[200])[0]) == Approx(50.0).epsilon(1e-12));
}

TEST_CASE("repeated invocations are byte identical", "[cli]") {
    const std::vector<std::vector<std::string>> cases = {
        {"fisher", "--model", "oscillator", "--omega", "1", "--T", "0.1:10:50:log"},
        {"simulate", "--model", "two-level", "--gap", "1", "--beta", "1", "--n", "10,50",
         "--trials", "40", "--seed", "7"},
        {"scaling", "--L", "2,3,4", "--T", "3.0", "--backend", "enumerate"},
    };
    for (const auto& args : cases) {
        const auto a = run(args);
        const auto b = run(args);
        REQUIRE(a.code == 0);
        CHECK(a.out == b.out);
    }
}

TEST_CASE("thermo row round trips through the printed decimals", "[cli]") {
    const auto r = run({"thermo", "--model", "oscillator", "--omega", "1", "--beta", "1"});
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "T,beta,ln_Z,U,var_H,Cv,S");
    const auto f = fields_of(lines[1]);
    // Shortest round-trip formatting: parsing back recovers the doubles.
    CHECK(std::stod(f[2]) == Approx(-0.041324854612918109).epsilon(1e-15));
    CHECK(std::stod(f[5]) == Approx(0.92067359420779232).epsilon(1e-15));
}

TEST_CASE("thermo length of a flat-variance family", "[cli]") {
    const auto r = run({"thermo", "--model", "classical", "--dof", "2", "--length",
                        "0.36787944117144233:1"});
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "beta_1,beta_2,length");
    CHECK(std::stod(fields_of(lines[1])[2]) == Approx(1.0).epsilon(1e-8));
}

TEST_CASE("renyi rows nest the alpha sweep inside the grid", "[cli]") {
    const auto r = run({"renyi", "--model", "two-level", "--gap", "1", "--beta", "1",
                        "--alpha", "1,2"});
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 3);
    const auto row1 = fields_of(lines[1]);
    const auto row2 = fields_of(lines[2]);
    REQUIRE(row1.size() == 11);
    CHECK(std::stod(row1[6]) == 1.0);
    CHECK(row1[8] == row1[3]);  // order-1 information equals F_S, byte for byte
    CHECK(std::stod(row1[7]) == Approx(0.58220310888821795).epsilon(1e-14));
    CHECK(std::stod(row2[6]) == 2.0);
    CHECK(std::stod(row2[7]) == Approx(0.49959536399347317).epsilon(1e-14));
    CHECK(std::stod(row2[8]) == Approx(2.1922139116154142).epsilon(1e-13));
}

TEST_CASE("simulate emits one row per copy count", "[cli]") {
    const auto r = run({"simulate", "--model", "two-level", "--gap", "1", "--beta", "1",
                        "--n", "10,100", "--trials", "50", "--seed", "7"});
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] ==
          "beta,n,trials,mean_S_hat,var_S_hat,mean_T_hat,var_T_hat,ratio_S,ratio_T,"
          "product_ratio,n_failed");
    const auto row = fields_of(lines[1]);
    REQUIRE(row.size() == 11);
    CHECK(row[1] == "10");
    CHECK(std::stod(row[7]) > 0.0);
    CHECK(std::stoll(row[10]) >= 0);
}

TEST_CASE("json format emits parseable rows", "[cli]") {
    const auto r = run({"fisher", "--model", "two-level", "--gap", "1", "--T", "1",
                        "--format", "json"});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    REQUIRE(doc.is_array());
    REQUIRE(doc.size() == 1);
    CHECK(doc[0]["T"].get<double>() == 1.0);
    CHECK(doc[0]["F_S"].get<double>() == Approx(5.0861612696304876).epsilon(1e-14));
    CHECK(doc[0]["product"].get<double>() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("model files cover the spectrum kind", "[cli]") {
    const TempFile file("gfi_test_spectrum.json",
                        R"({"model":"spectrum","levels":[{"e":-0.4,"g":2},{"e":0.7},{"e":1.9,"g":3}]})");
    const auto r = run({"thermo", "--model-file", file.path.string(), "--beta", "1"});
    REQUIRE(r.code == 0);
    spectra::FiniteSpectrum fs;
    fs.levels = {{-0.4, 2}, {0.7, 1}, {1.9, 3}};
    const auto tp = thermo::thermo_point(spectra::build_model(spectra::ThermalModel{fs}), 1.0);
    const auto row = fields_of(lines_of(r.out)[1]);
    CHECK(std::stod(row[3]) == Approx(tp.U).epsilon(1e-15));
    CHECK(std::stod(row[6]) == Approx(tp.S).epsilon(1e-15));
}

TEST_CASE("ensemble files drive the multicharge report", "[cli]") {
    const TempFile file("gfi_test_gge.json",
                        R"({"lambdas":[1.0],"states":[{"charges":[0.0]},{"charges":[1.0]}]})");
    const auto r = run({"ensemble", "--file", file.path.string()});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    REQUIRE(doc.is_array());
    CHECK(doc[0]["m"].get<int>() == 1);
    CHECK(doc[0]["F_S"].get<double>() == Approx(5.0861612696304876).epsilon(1e-12));
    CHECK(doc[0]["mean_0"].get<double>() == Approx(0.26894142136999512).epsilon(1e-12));
    CHECK(doc[0]["fisher_0_0"].get<double>() == Approx(0.19661193324148185).epsilon(1e-12));
}

TEST_CASE("two-parameter ensemble files report both directions", "[cli]") {
    const TempFile file("gfi_test_gce.json",
                        R"({"states":[{"e":0,"n":0},{"e":1,"n":1}],"beta":1,"mu":0.5})");
    const auto r = run({"ensemble", "--file", file.path.string()});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    const double q = std::exp(-0.5);
    const double p = q / (1.0 + q);
    const double v = p * (1.0 - p);
    CHECK(doc[0]["F_S_gce"].get<double>() == Approx(4.0 / v).epsilon(1e-12));
    REQUIRE(doc[0]["C_v_fixed_N"].is_number());
    CHECK(std::abs(doc[0]["C_v_fixed_N"].get<double>()) < 1e-15);

    // Frozen particle number: the fixed-N column goes null.
    const TempFile frozen("gfi_test_gce_frozen.json",
                          R"({"states":[{"e":0,"n":2},{"e":1,"n":2}],"beta":1})");
    const auto rf = run({"ensemble", "--file", frozen.path.string()});
    REQUIRE(rf.code == 0);
    const auto docf = nlohmann::json::parse(rf.out);
    CHECK(docf[0]["C_v_fixed_N"].is_null());

    // In CSV the same cell is empty.
    const auto rc = run({"ensemble", "--file", frozen.path.string(), "--format", "csv"});
    REQUIRE(rc.code == 0);
    const auto lines = lines_of(rc.out);
    const auto header = fields_of(lines[0]);
    const auto row = fields_of(lines[1]);
    REQUIRE(header.size() == row.size());
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == "C_v_fixed_N") CHECK(row[i].empty());
}

TEST_CASE("scaling appends the requested fit", "[cli]") {
    const auto r = run({"scaling", "--L", "2,3,4", "--T", "3.0", "--backend", "enumerate",
                        "--fit", "log"});
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 7);  // series, blank, fit table
    CHECK(lines[0] == "L,T,t,Cv_total,Cv_per_spin,F_S");
    CHECK(lines[4].empty());
    CHECK(lines[5] == "fit_mode,slope_or_amplitude,intercept,r_squared");
    CHECK(fields_of(lines[6])[0] == "logarithmic");
    const double fs2 = std::stod(fields_of(lines[1])[5]);
    const double fs4 = std::stod(fields_of(lines[3])[5]);
    CHECK(fs4 < fs2);

    const auto rj = run({"scaling", "--L", "2,3,4", "--T", "3.0", "--backend", "enumerate",
                         "--format", "json"});
    REQUIRE(rj.code == 0);
    const auto doc = nlohmann::json::parse(rj.out);
    REQUIRE(doc["series"].size() == 3);
    CHECK(doc["fit"]["mode"] == "logarithmic");
    CHECK(doc["fit"]["r_squared"].is_number());

    // Under three sizes there is nothing to fit.
    const auto r2 = run({"scaling", "--L", "2,3", "--T", "3.0", "--backend", "enumerate",
                         "--format", "json"});
    REQUIRE(r2.code == 0);
    CHECK(nlohmann::json::parse(r2.out)["fit"].is_null());
}

TEST_CASE("--output writes the same bytes to a file", "[cli]") {
    const auto ref = run({"fisher", "--model", "two-level", "--gap", "1", "--T", "0.5:2:4:lin"});
    REQUIRE(ref.code == 0);
    const auto path = std::filesystem::temp_directory_path() / "gfi_test_out.csv";
    const auto r = run({"fisher", "--model", "two-level", "--gap", "1", "--T", "0.5:2:4:lin",
                        "--output", path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream f(path);
    std::stringstream buf;
    buf << f.rdbuf();
    CHECK(buf.str() == ref.out);
    std::filesystem::remove(path);
}

TEST_CASE("help returns success", "[cli]") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("fisher") != std::string::npos);
    CHECK(r.out.find("scaling") != std::string::npos);
}

TEST_CASE("argument errors exit 2", "[cli]") {
    CHECK(run({}).code == 2);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({"fisher", "--T", "1"}).code == 2);                      // no model given
    CHECK(run({"fisher", "--model", "nope", "--T", "1"}).code == 2);   // unknown kind
    CHECK(run({"fisher", "--model", "two-level", "--T", "1"}).code == 2);  // missing gap
    CHECK(run({"fisher", "--model", "two-level", "--gap", "1", "--T", "5:1:10:log"}).code == 2);
    CHECK(run({"fisher", "--model", "two-level", "--gap", "1", "--T", "1", "--beta", "1"}).code ==
          2);  // both grids
    CHECK(run({"fisher", "--model", "two-level", "--gap", "1"}).code == 2);  // no grid
    const auto r = run({"fisher", "--model", "two-level", "--gap", "1", "--T", "0:1:5:log"});
    CHECK(r.code == 2);
    CHECK(r.err.find("error: parse:") != std::string::npos);

    const TempFile bad("gfi_test_bad.json", "{not json");
    CHECK(run({"thermo", "--model-file", bad.path.string(), "--beta", "1"}).code == 2);
}

TEST_CASE("domain errors exit 3", "[cli]") {
    CHECK(run({"fisher", "--model", "two-level", "--gap", "1", "--beta=-1"}).code == 3);
    CHECK(run({"simulate", "--model", "two-level", "--gap", "1", "--beta", "1", "--n", "1",
               "--trials", "5"}).code == 3);
    CHECK(run({"scaling", "--L", "1,2,3", "--T", "3.0", "--backend", "enumerate"}).code == 3);
    const TempFile single("gfi_test_single.json",
                          R"({"model":"spectrum","levels":[{"e":1.0,"g":4}]})");
    const auto r = run({"fisher", "--model-file", single.path.string(), "--T", "1"});
    CHECK(r.code == 3);
    CHECK(r.err.find("error: domain:") != std::string::npos);
}

TEST_CASE("filesystem errors exit 4", "[cli]") {
    CHECK(run({"thermo", "--model-file", "/nonexistent/gfi.json", "--beta", "1"}).code == 4);
    CHECK(run({"fisher", "--model", "two-level", "--gap", "1", "--T", "1", "--output",
               "/nonexistent_dir/out.csv"}).code == 4);
}
