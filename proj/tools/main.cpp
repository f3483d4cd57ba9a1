#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "vrmhd/config.hpp"
#include "vrmhd/errors.hpp"
#include "vrmhd/runner.hpp"
#include "vrmhd/verification.hpp"

namespace fs = std::filesystem;
using namespace vrmhd;

namespace {

enum Exit { Ok = 0, BadConfig = 2, SolverFailure = 3, Violation = 4 };

void apply_thread_env() {
    const char* env = std::getenv("VRMHD_NUM_THREADS");
    if (!env || !*env) return;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1 || n > 4096)
        throw ConfigError(std::string("VRMHD_NUM_THREADS must be a positive integer, got '") + env + "'");
    Eigen::setNbThreads(static_cast<int>(n));
}

std::ofstream open_csv(const fs::path& p) {
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + p.string());
    return out;
}

void read_trace(const fs::path& p, std::vector<double>& x, std::vector<double>& t, Eigen::MatrixXd& v) {
    const CsvTable tab = read_csv(p);
    if (tab.header.empty() || tab.header[0] != "time") throw ConfigError("unexpected trace header in " + p.string());
    x.clear();
    for (size_t i = 1; i < tab.header.size(); ++i) x.push_back(std::stod(tab.header[i]));
    t.clear();
    v.resize(static_cast<Eigen::Index>(tab.rows.size()), static_cast<Eigen::Index>(x.size()));
    for (size_t r = 0; r < tab.rows.size(); ++r) {
        t.push_back(tab.rows[r][0]);
        for (size_t i = 0; i < x.size(); ++i) v(r, i) = tab.rows[r][i + 1];
    }
}

int cmd_run(const fs::path& config, const std::string& output, long max_steps, const std::string& restart,
            bool quiet) {
    RunConfig cfg = load_config(config);
    if (!output.empty()) cfg.output.dir = output;
    if (max_steps > 0) cfg.max_steps = max_steps;
    if (!restart.empty()) cfg.restart = fs::path(restart);
    const RunResult r = run(cfg, quiet ? nullptr : &std::cerr);
    if (!quiet) std::cerr << "done in " << r.wall_seconds << " s, output in " << cfg.output.dir << "\n";
    return Ok;
}

int cmd_verify(const std::string& name, const std::string& output, bool quiet) {
    const CaseName c = parse_case_name(name);
    const fs::path dir = output.empty() ? fs::path("verify") / name : fs::path(output);
    bool ok = true;
    for (const CheckResult& r : verify_case(c, dir, quiet ? nullptr : &std::cerr)) {
        std::cout << format_check(r) << "\n";
        ok = ok && r.passed;
    }
    return ok ? Ok : Violation;
}

int cmd_spectrum(const fs::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw ConfigError("no manifest.json in " + dir.string());
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("unreadable manifest.json: " + std::string(e.what()));
    }
    const RunConfig cfg = parse_config(manifest.at("config").get<std::string>());
    const CaseSpec& spec = cfg.spec;
    int written = 0;

    if (fs::exists(dir / "trace_ux.csv")) {
        std::vector<double> x, t;
        Eigen::MatrixXd u[3];
        const char* comp[3] = {"ux", "uy", "uz"};
        for (int c = 0; c < 3; ++c) {
            read_trace(dir / ("trace_" + std::string(comp[c]) + ".csv"), x, t, u[c]);
            const Spectrum s = spacetime_spectrum(x, t, u[c]);
            std::ofstream out = open_csv(dir / ("spectrum_" + std::string(comp[c]) + ".csv"));
            out << "omega\\k";
            for (double k : s.k) out << ',' << format_double(k);
            out << '\n';
            for (size_t i = 0; i < s.omega.size(); ++i) {
                out << format_double(s.omega[i]);
                for (Eigen::Index j = 0; j < s.power.cols(); ++j) out << ',' << format_double(s.power(i, j));
                out << '\n';
            }
            ++written;
        }
        const double length = spec.axes[0].domain.length();
        const int n_modes = std::min<int>(8, static_cast<int>(x.size()) / 4);
        const Eos eos(spec.gamma);
        const double p0 = eos.pressure(spec.rho0, spec.s0);
        std::ofstream out = open_csv(dir / "dispersion.csv");
        out << "mode,k,shear,shear_theory,slow,slow_theory,fast,fast_theory\n";
        for (const Ridge& r : dispersion_ridges(x, t, length, u[0], u[1], u[2], n_modes)) {
            const DispersionBranches th = dispersion_branches(r.k, spec.rho0, p0, spec.gamma, spec.B0);
            out << r.mode << ',' << format_double(r.k) << ',' << format_double(r.measured.shear) << ','
                << format_double(th.shear) << ',' << format_double(r.measured.slow) << ',' << format_double(th.slow)
                << ',' << format_double(r.measured.fast) << ',' << format_double(th.fast) << '\n';
        }
        ++written;
    }

    if (fs::exists(dir / "modes.csv")) {
        const CsvTable tab = read_csv(dir / "modes.csv");
        std::vector<double> t;
        for (const auto& row : tab.rows) t.push_back(row[1]);
        std::ofstream out = open_csv(dir / "growth_rates.csv");
        out << "mode,rate,r2,points,t0,t1\n";
        for (size_t c = 2; c < tab.header.size(); ++c) {
            std::vector<double> e;
            for (const auto& row : tab.rows) e.push_back(row[c]);
            const GrowthFit g = fit_growth(t, e, cfg.growth_t0, cfg.growth_t1);
            out << c - 1 << ',' << format_double(g.rate) << ',' << format_double(g.r2) << ',' << g.points << ','
                << format_double(cfg.growth_t0) << ',' << format_double(cfg.growth_t1) << '\n';
        }
        ++written;
    }
    if (written == 0) throw ConfigError("no velocity traces or mode energies in " + dir.string());
    return Ok;
}

int cmd_cases() {
    for (CaseName c : all_cases()) {
        const CaseSpec p = published_case(c);
        const CaseSpec d = desk_case(c);
        std::cout << to_string(c) << ": published " << p.axes[0].cells;
        if (p.axes[1].active) std::cout << "x" << p.axes[1].cells;
        std::cout << " dt=" << p.dt << " T=" << p.t_end << "; desk " << d.axes[0].cells;
        if (d.axes[1].active) std::cout << "x" << d.axes[1].cells;
        std::cout << " dt=" << d.dt << " T=" << d.t_end << "\n";
    }
    return Ok;
}

int cmd_config(const std::string& name, bool published) {
    const CaseName c = parse_case_name(name);
    // desk preset with the outputs verify uses
    RunConfig cfg = verification_config(c, "output");
    if (published) cfg.spec = published_case(c);
    cfg.output.dir = fs::path("output") / (std::string(to_string(c)) + "_" + cfg.spec.preset);
    std::cout << dump_config(cfg);
    return Ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structure-preserving viscoresistive MHD on spline de Rham complexes"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    std::string config, output, restart, case_name, dir;
    long max_steps = 0;
    bool quiet = false;

    auto* run_cmd = app.add_subcommand("run", "Run a simulation described by a YAML file");
    run_cmd->add_option("config", config, "Run configuration")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("-o,--output", output, "Output directory (overrides the config)");
    run_cmd->add_option("--max-steps", max_steps, "Stop after this many steps")->check(CLI::PositiveNumber);
    run_cmd->add_option("--restart", restart, "Continue from a snapshot")->check(CLI::ExistingFile);
    run_cmd->add_flag("-q,--quiet", quiet, "No progress output");

    auto* verify_cmd = app.add_subcommand("verify", "Run the desk preset of a case and check it");
    verify_cmd->add_option("case", case_name, "Case name")->required();
    verify_cmd->add_option("-o,--output", output, "Output directory");
    verify_cmd->add_flag("-q,--quiet", quiet, "No progress output");

    auto* spectrum_cmd = app.add_subcommand("spectrum", "Spectra, dispersion ridges and growth rates of a run");
    spectrum_cmd->add_option("dir", dir, "Run output directory")->required()->check(CLI::ExistingDirectory);

    auto* cases_cmd = app.add_subcommand("cases", "List the cases with their published and desk parameters");

    bool published = false;
    auto* config_cmd = app.add_subcommand("config", "Print the YAML configuration of a case preset");
    config_cmd->add_option("case", case_name, "Case name")->required();
    config_cmd->add_flag("--published", published, "Published instead of desk parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Ok : BadConfig;
    }

    try {
        apply_thread_env();
        if (*run_cmd) return cmd_run(config, output, max_steps, restart, quiet);
        if (*verify_cmd) return cmd_verify(case_name, output, quiet);
        if (*spectrum_cmd) return cmd_spectrum(dir);
        if (*cases_cmd) return cmd_cases();
        if (*config_cmd) return cmd_config(case_name, published);
    } catch (const NumericalError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return SolverFailure;
    } catch (const StateError& e) {
        std::cerr << "invalid state: " << e.what() << "\n";
        return Violation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return BadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return BadConfig;
    }
    return Ok;
}
