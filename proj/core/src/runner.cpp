#include "vrmhd/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "vrmhd/cases.hpp"
#include "vrmhd/errors.hpp"
#include "vrmhd/snapshot.hpp"

#ifndef VRMHD_VERSION
#define VRMHD_VERSION "0.0.0"
#endif
#ifndef VRMHD_GIT_REVISION
#define VRMHD_GIT_REVISION "unknown"
#endif

namespace vrmhd {

namespace fs = std::filesystem;

const char* version_string() { return VRMHD_VERSION; }

namespace {

class CsvWriter {
public:
    CsvWriter(const fs::path& p, const std::string& header) : out_(p, std::ios::trunc) {
        if (!out_) throw ConfigError("cannot write " + p.string());
        out_ << header << '\n';
    }
    void row(const std::string& r) {
        out_ << r << '\n';
        out_.flush();
    }

private:
    std::ofstream out_;
};

std::string join(const std::vector<double>& v, const std::string& lead = "") {
    std::string s = lead;
    for (double x : v) s += (s.empty() ? "" : ",") + format_double(x);
    return s;
}

std::array<std::vector<double>, 3> line_points(const DeRhamComplex& cx, int nx) {
    std::array<std::vector<double>, 3> pts;
    const Axis& ax = cx.axis(0);
    pts[0] = uniform_points(ax.high.domain(), nx, ax.high.boundary() == Boundary::Periodic);
    for (int a = 1; a < 3; ++a)
        if (cx.axis(a).active) pts[a] = {0.5 * (cx.axis(a).high.domain().lo + cx.axis(a).high.domain().hi)};
    return pts;
}

void check_finite(const DiagnosticsRecord& r) {
    for (double v : {r.mass, r.entropy, r.e_kin, r.e_int, r.e_mag, r.e_total, r.divB_l2})
        if (!std::isfinite(v)) throw StateError("non-finite diagnostics at step " + std::to_string(r.step));
}

void write_erf_comparison(const fs::path& p, const DeRhamComplex& cx, const CaseSpec& spec, const State& st) {
    const Axis& ax = cx.axis(0);
    const std::vector<double> xs = uniform_points(ax.high.domain(), 4 * ax.high.n_cells() + 1, false);
    const Eigen::VectorXd by = sample_component(cx, st.B, 1, {xs, {}, {}});
    CsvWriter w(p, "x,By_simulated,By_reference,error");
    for (size_t i = 0; i < xs.size(); ++i) {
        const double ref = reference_erf(xs[i], st.time, spec.eta.value, spec.t0, spec.By0);
        w.row(join({xs[i], by[i], ref, by[i] - ref}));
    }
}

void write_fields(const fs::path& p, const DeRhamComplex& cx, const Eos& eos, const State& st) {
    std::array<std::vector<double>, 3> pts;
    for (int a = 0; a < 2; ++a) {
        const Axis& ax = cx.axis(a);
        pts[a] = uniform_points(ax.high.domain(), 2 * ax.high.n_cells(), ax.high.boundary() == Boundary::Periodic);
    }
    const Eigen::VectorXd rho = sample_component(cx, st.rho, 0, pts);
    const Eigen::VectorXd s = sample_component(cx, st.s, 0, pts);
    std::array<Eigen::VectorXd, 3> u, B;
    for (int c = 0; c < 3; ++c) {
        u[c] = sample_component(cx, st.u, c, pts);
        B[c] = sample_component(cx, st.B, c, pts);
    }
    CsvWriter w(p, "x,y,rho,p,ux,uy,uz,Bx,By,Bz");
    const size_t nx = pts[0].size();
    for (size_t j = 0; j < pts[1].size(); ++j)
        for (size_t i = 0; i < nx; ++i) {
            const size_t k = j * nx + i;
            const double pr = rho[k] > 0.0 ? eos.pressure(rho[k], s[k]) : std::nan("");
            w.row(join({pts[0][i], pts[1][j], rho[k], pr, u[0][k], u[1][k], u[2][k], B[0][k], B[1][k], B[2][k]}));
        }
}

nlohmann::json timings_json(const StepTimings& t) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, sec] : t.seconds)
        j[name] = {{"seconds", sec}, {"calls", t.calls.at(name)}, {"iterations", t.iterations.at(name)}};
    return j;
}

} // namespace

RunResult run(const RunConfig& cfg, std::ostream* log, const StepObserver& observer) {
    const auto wall0 = std::chrono::steady_clock::now();
    const CaseSpec& spec = cfg.spec;
    const fs::path dir = cfg.output.dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
    if (cfg.output.snapshot_every > 0) fs::create_directories(dir / "snapshots");

    const DeRhamComplex cx = build_complex(complex_params(spec));
    const Galerkin gk(cx);
    const Eos eos(spec.gamma);
    Integrator integ(gk, eos);
    StepConfig sc = step_config(cfg);

    State st = init_case(cx, spec);
    if (spec.linearized_resistivity) sc.linearized_B0 = st.B.coeffs;
    long step = 0;
    if (cfg.restart) {
        SnapshotInfo info;
        st = snapshot_read(*cfg.restart, cx, &info);
        step = info.step;
    }
    const long total = spec.steps();
    const long last = cfg.max_steps ? std::min(total, step + *cfg.max_steps) : total;

    nlohmann::json manifest = {{"program", "vrmhd"},
                               {"version", version_string()},
                               {"git_revision", VRMHD_GIT_REVISION},
                               {"case", to_string(spec.name)},
                               {"preset", spec.preset},
                               {"config", dump_config(cfg)},
                               {"complex", cx.describe()},
                               {"start_step", step},
                               {"planned_steps", total}};
    const auto write_manifest = [&](const std::string& status) {
        manifest["status"] = status;
        manifest["timings"] = timings_json(integ.timings());
        manifest["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
        std::ofstream m(dir / "manifest.json", std::ios::trunc);
        m << manifest.dump(2) << '\n';
    };
    write_manifest("running");

    RunResult res;
    res.first_step = step;
    CsvWriter diag(dir / "diagnostics.csv", csv_header());
    const auto emit_diag = [&](long n) {
        const DiagnosticsRecord r = record(gk, eos, st, n);
        check_finite(r);
        diag.row(csv_row(r));
        res.history.push_back(r);
    };

    std::unique_ptr<CsvWriter> trace[3];
    std::array<std::vector<double>, 3> tpts;
    if (cfg.output.trace_every > 0) {
        const int n = cfg.output.trace_samples > 0 ? cfg.output.trace_samples : 4 * cx.axis(0).high.n_cells();
        tpts = line_points(cx, n);
        const char* names[3] = {"trace_ux.csv", "trace_uy.csv", "trace_uz.csv"};
        for (int c = 0; c < 3; ++c) trace[c] = std::make_unique<CsvWriter>(dir / names[c], join(tpts[0], "time"));
    }
    const auto emit_trace = [&]() {
        for (int c = 0; c < 3; ++c) {
            const Eigen::VectorXd v = sample_component(cx, st.u, c, tpts);
            trace[c]->row(join(std::vector<double>(v.data(), v.data() + v.size()), format_double(st.time)));
        }
    };

    std::unique_ptr<CsvWriter> modes;
    std::vector<int> mode_ids;
    if (cfg.output.modes_every > 0) {
        std::string h = "step,time";
        for (int n = 1; n <= cfg.output.modes_count; ++n) {
            mode_ids.push_back(n);
            h += ",E" + std::to_string(n);
        }
        modes = std::make_unique<CsvWriter>(dir / "modes.csv", h);
    }
    const auto emit_modes = [&](long n) {
        const std::vector<double> e = mode_energies(cx, st.B, mode_ids);
        modes->row(std::to_string(n) + "," + format_double(st.time) + "," + join(e));
    };

    const auto emit_all = [&](long n, bool force) {
        if (force || n % cfg.output.diagnostics_every == 0) emit_diag(n);
        if (trace[0] && (n % cfg.output.trace_every == 0)) emit_trace();
        if (modes && (n % cfg.output.modes_every == 0)) emit_modes(n);
        if (observer) observer(n, st, integ);
    };
    emit_all(step, true);

    const long report = std::max(1L, (last - step) / 20);
    if (log)
        *log << "vrmhd " << version_string() << ": " << to_string(spec.name) << " (" << spec.preset << "), "
             << cx.describe() << ", steps " << step << ".." << last << "\n";
    try {
        while (step < last) {
            State next = integ.strang_step(st, sc);
            // exact time grid: avoids drift from repeated addition
            next.time = (step + 1) * spec.dt;
            st = std::move(next);
            ++step;
            emit_all(step, step == last);
            if (cfg.output.snapshot_every > 0 && step % cfg.output.snapshot_every == 0) {
                char name[32];
                std::snprintf(name, sizeof name, "step_%08ld.bin", step);
                snapshot_write(dir / "snapshots" / name, cx, st, step);
            }
            if (log && (step % report == 0 || step == last)) {
                const auto& r = res.history.back();
                *log << "  step " << step << "/" << last << " t=" << format_double(st.time)
                     << " e_total=" << format_double(r.e_total) << "\n";
            }
        }
    } catch (const Error& e) {
        snapshot_write(dir / "last_valid.bin", cx, st, step);
        write_manifest(std::string("failed at step ") + std::to_string(step + 1) + ": " + e.what());
        throw;
    }

    snapshot_write(dir / "final.bin", cx, st, step);
    if (spec.name == CaseName::CurrentSheet1D) write_erf_comparison(dir / "erf_comparison.csv", cx, spec, st);
    if (cx.axis(0).active && cx.axis(1).active) write_fields(dir / "fields.csv", cx, eos, st);

    res.last_step = step;
    res.final_state = st;
    res.timings = integ.timings();
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    manifest["end_step"] = step;
    write_manifest(step == total ? "completed" : "stopped");
    return res;
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty CSV file " + path.string());
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.header.push_back(cell);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("non-numeric entry '" + cell + "' in " + path.string());
            }
        }
        if (row.size() != t.header.size()) throw ConfigError("ragged row in " + path.string());
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::vector<DiagnosticsRecord> read_diagnostics(const fs::path& csv) {
    const CsvTable t = read_csv(csv);
    if (t.header != diagnostics_columns()) throw ConfigError("unexpected diagnostics header in " + csv.string());
    std::vector<DiagnosticsRecord> out;
    for (const auto& r : t.rows) {
        DiagnosticsRecord d;
        d.step = std::lround(r[0]);
        d.time = r[1];
        d.mass = r[2];
        d.entropy = r[3];
        d.e_kin = r[4];
        d.e_int = r[5];
        d.e_mag = r[6];
        d.e_total = r[7];
        d.divB_l2 = r[8];
        out.push_back(d);
    }
    return out;
}

} // namespace vrmhd
