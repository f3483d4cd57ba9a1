#include "vrmhd/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "vrmhd/errors.hpp"

namespace vrmhd {

namespace fs = std::filesystem;

namespace {

CheckResult at_most(std::string name, double value, double threshold, std::string detail = "") {
    CheckResult r;
    r.name = std::move(name);
    r.value = value;
    r.threshold = threshold;
    r.passed = std::isfinite(value) && value <= threshold;
    r.detail = std::move(detail);
    return r;
}

CheckResult at_least(std::string name, double value, double threshold, std::string detail = "") {
    CheckResult r;
    r.name = std::move(name);
    r.value = value;
    r.threshold = threshold;
    r.passed = std::isfinite(value) && value >= threshold;
    r.detail = std::move(detail);
    return r;
}

double relative_drift(const std::vector<DiagnosticsRecord>& h, double DiagnosticsRecord::*field) {
    const double ref = std::abs(h.front().*field);
    double worst = 0.0;
    for (const auto& r : h) worst = std::max(worst, std::abs(r.*field - h.front().*field));
    return ref > 0.0 ? worst / ref : worst;
}

// Columns of a time x space trace file.
void read_trace(const fs::path& p, std::vector<double>& x, std::vector<double>& t, Eigen::MatrixXd& v) {
    const CsvTable tab = read_csv(p);
    if (tab.header.size() < 2 || tab.header[0] != "time") throw ConfigError("unexpected trace header in " + p.string());
    x.clear();
    for (size_t i = 1; i < tab.header.size(); ++i) x.push_back(std::stod(tab.header[i]));
    t.clear();
    v.resize(static_cast<Eigen::Index>(tab.rows.size()), static_cast<Eigen::Index>(x.size()));
    for (size_t r = 0; r < tab.rows.size(); ++r) {
        t.push_back(tab.rows[r][0]);
        for (size_t i = 0; i < x.size(); ++i) v(r, i) = tab.rows[r][i + 1];
    }
}

std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                      std::vector<double> d) {
    const size_t n = d.size();
    for (size_t i = 1; i < n; ++i) {
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for (size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
    return d;
}

double interpolate(const std::vector<double>& grid, const std::vector<double>& f, double x) {
    const double h = grid[1] - grid[0];
    const double q = std::clamp((x - grid.front()) / h, 0.0, static_cast<double>(grid.size() - 1));
    const size_t i = std::min(static_cast<size_t>(q), grid.size() - 2);
    const double w = q - static_cast<double>(i);
    return (1.0 - w) * f[i] + w * f[i + 1];
}

std::vector<double> sheet_zone(const CaseSpec& spec, double t, int n) {
    const Interval& iv = spec.axes[0].domain;
    const double half = 4.0 * std::sqrt(spec.eta.value * (t + spec.t0));
    std::vector<double> xs;
    for (double x : uniform_points(iv, n, false))
        if (std::abs(x) <= half) xs.push_back(x);
    return xs;
}

} // namespace

std::vector<CheckResult> check_invariants(const std::vector<DiagnosticsRecord>& h, bool ideal,
                                          const InvariantTolerances& tol) {
    if (h.empty()) throw StateError("empty diagnostics history");
    std::vector<CheckResult> out;
    out.push_back(at_most("mass drift", relative_drift(h, &DiagnosticsRecord::mass), tol.mass));
    double div = 0.0;
    for (const auto& r : h) div = std::max(div, r.divB_l2);
    out.push_back(at_most("divergence of B", div, tol.divB));
    out.push_back(at_most("energy drift", relative_drift(h, &DiagnosticsRecord::e_total), tol.energy));
    if (ideal) out.push_back(at_most("entropy drift", relative_drift(h, &DiagnosticsRecord::entropy), tol.entropy));
    return out;
}

CheckResult check_entropy_monotone(const std::vector<DiagnosticsRecord>& h, double rel_tol) {
    double worst = 0.0;
    for (size_t i = 1; i < h.size(); ++i) {
        const double drop = (h[i - 1].entropy - h[i].entropy) / std::max(std::abs(h[i - 1].entropy), 1e-300);
        worst = std::max(worst, drop);
    }
    return at_most("entropy nondecreasing", worst, rel_tol, "largest relative decrease");
}

std::vector<double> heat_oracle(const std::vector<double>& x, double lo, double hi, double t_end, double eta,
                                double t0, double By0, int points, double dt) {
    if (points < 3 || !(hi > lo) || !(dt > 0.0)) throw ConfigError("invalid heat oracle grid");
    const double h = (hi - lo) / (points - 1);
    std::vector<double> grid(points), f(points);
    for (int i = 0; i < points; ++i) {
        grid[i] = lo + i * h;
        f[i] = reference_erf(grid[i], 0.0, eta, t0, By0);
    }
    const long steps = std::max(1L, std::lround(t_end / dt));
    const double r = eta * (t_end / steps) / (h * h);
    std::vector<double> a(points, -0.5 * r), b(points, 1.0 + r), c(points, -0.5 * r);
    a[0] = c[0] = a[points - 1] = c[points - 1] = 0.0;
    b[0] = b[points - 1] = 1.0;
    for (long n = 0; n < steps; ++n) {
        std::vector<double> rhs(f);
        for (int i = 1; i < points - 1; ++i) rhs[i] = f[i] + 0.5 * r * (f[i - 1] - 2.0 * f[i] + f[i + 1]);
        f = solve_tridiagonal(a, b, c, rhs);
    }
    std::vector<double> out;
    out.reserve(x.size());
    for (double xi : x) out.push_back(interpolate(grid, f, xi));
    return out;
}

CheckResult check_heat_oracle(const CaseSpec& spec, double t) {
    const Interval& iv = spec.axes[0].domain;
    const std::vector<double> xs = sheet_zone(spec, t, 4 * spec.axes[0].cells + 1);
    const std::vector<double> fd = heat_oracle(xs, iv.lo, iv.hi, t, spec.eta.value, spec.t0, spec.By0);
    double err = 0.0;
    for (size_t i = 0; i < xs.size(); ++i)
        err = std::max(err, std::abs(fd[i] - reference_erf(xs[i], t, spec.eta.value, spec.t0, spec.By0)));
    return at_most("heat oracle against erf", err / std::abs(spec.By0), 1e-4, "finite differences, relative Linf");
}

CheckResult check_current_sheet(const DeRhamComplex& cx, const CaseSpec& spec, const State& st) {
    const std::vector<double> xs = sheet_zone(spec, st.time, 4 * spec.axes[0].cells + 1);
    const Eigen::VectorXd by = sample_component(cx, st.B, 1, {xs, {}, {}});
    double err = 0.0;
    for (size_t i = 0; i < xs.size(); ++i)
        err = std::max(err, std::abs(by[i] - reference_erf(xs[i], st.time, spec.eta.value, spec.t0, spec.By0)));
    char d[96];
    std::snprintf(d, sizeof d, "t=%g, %zu points in the diffusion zone", st.time, xs.size());
    return at_most("current sheet against erf", err / std::abs(spec.By0), 1e-3, d);
}

double shock_width_cells(const DeRhamComplex& cx, const State& st, int samples_per_cell) {
    const Axis& ax = cx.axis(0);
    const Axis& ay = cx.axis(1);
    const int nx = samples_per_cell * ax.high.n_cells();
    const int ny = 2 * ay.high.n_cells();
    std::array<std::vector<double>, 3> pts;
    pts[0] = uniform_points(ax.high.domain(), nx, ax.high.boundary() == Boundary::Periodic);
    pts[1] = uniform_points(ay.high.domain(), ny, ay.high.boundary() == Boundary::Periodic);
    const Eigen::VectorXd rho = sample_component(cx, st.rho, 0, pts);
    const Eigen::VectorXd grad = sample_component(cx, st.rho, 0, pts, 0);
    Eigen::Index at = 0;
    grad.cwiseAbs().maxCoeff(&at);
    const int row = static_cast<int>(at / nx);
    const int i0 = static_cast<int>(at % nx);
    const bool periodic = ax.high.boundary() == Boundary::Periodic;
    const int n = static_cast<int>(pts[0].size());
    const auto f = [&](int i) { return rho[row * static_cast<Eigen::Index>(n) + i]; };
    const double sgn = grad[at] > 0.0 ? 1.0 : -1.0;
    const auto wrap = [&](int i) { return periodic ? ((i % n) + n) % n : std::clamp(i, 0, n - 1); };

    // extent of the monotone ramp through the steepest point
    int left = 0;
    while (left < n / 2 && sgn * (f(wrap(i0 - left)) - f(wrap(i0 - left - 1))) > 0.0 &&
           (periodic || i0 - left - 1 >= 0))
        ++left;
    int right = 0;
    while (right < n / 2 && sgn * (f(wrap(i0 + right + 1)) - f(wrap(i0 + right))) > 0.0 &&
           (periodic || i0 + right + 1 < n))
        ++right;
    const double lo = f(wrap(i0 - left));
    const double hi = f(wrap(i0 + right));
    const double jump = hi - lo;
    if (jump == 0.0) return 0.0;
    const auto crossing = [&](double level) {
        for (int k = -left; k < right; ++k) {
            const double a = (f(wrap(i0 + k)) - lo) / jump;
            const double b = (f(wrap(i0 + k + 1)) - lo) / jump;
            if (a <= level && b >= level) return k + (b > a ? (level - a) / (b - a) : 0.0);
        }
        return static_cast<double>(right);
    };
    return (crossing(0.9) - crossing(0.1)) / samples_per_cell;
}

std::vector<CheckResult> check_dispersion(const fs::path& dir, const CaseSpec& spec, int n_modes, double rel_tol) {
    std::vector<double> x, t;
    Eigen::MatrixXd ux, uy, uz;
    read_trace(dir / "trace_ux.csv", x, t, ux);
    read_trace(dir / "trace_uy.csv", x, t, uy);
    read_trace(dir / "trace_uz.csv", x, t, uz);
    const double length = spec.axes[0].domain.length();
    const std::vector<Ridge> ridges = dispersion_ridges(x, t, length, ux, uy, uz, n_modes);
    const Eos eos(spec.gamma);
    const double p0 = eos.pressure(spec.rho0, spec.s0);
    double err[3] = {0.0, 0.0, 0.0};
    std::string detail;
    for (const Ridge& r : ridges) {
        const DispersionBranches th = dispersion_branches(r.k, spec.rho0, p0, spec.gamma, spec.B0);
        const double m[3] = {r.measured.shear, r.measured.slow, r.measured.fast};
        const double e[3] = {th.shear, th.slow, th.fast};
        for (int b = 0; b < 3; ++b) err[b] = std::max(err[b], std::abs(m[b] - e[b]) / e[b]);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%sn=%d: %.4f/%.4f %.4f/%.4f %.4f/%.4f", detail.empty() ? "" : "; ", r.mode,
                      m[0], e[0], m[1], e[1], m[2], e[2]);
        detail += buf;
    }
    return {at_most("shear branch", err[0], rel_tol, detail), at_most("slow branch", err[1], rel_tol),
            at_most("fast branch", err[2], rel_tol)};
}

std::vector<CheckResult> check_growth(const fs::path& modes_csv, int n_modes, double t0, double t1, double min_r2) {
    const CsvTable tab = read_csv(modes_csv);
    if (static_cast<int>(tab.header.size()) < 2 + n_modes) throw ConfigError("too few modes in " + modes_csv.string());
    std::vector<double> t;
    for (const auto& r : tab.rows) t.push_back(r[1]);
    std::vector<CheckResult> out;
    for (int n = 1; n <= n_modes; ++n) {
        std::vector<double> e;
        for (const auto& r : tab.rows) e.push_back(r[1 + n]);
        const GrowthFit g = fit_growth(t, e, t0, t1);
        char d[96];
        std::snprintf(d, sizeof d, "rate=%.5g over %d points", g.rate, g.points);
        CheckResult c = at_least("mode " + std::to_string(n) + " log-linear growth", g.r2, min_r2, d);
        c.passed = c.passed && g.rate > 0.0;
        out.push_back(c);
    }
    return out;
}

RunConfig verification_config(CaseName c, const fs::path& dir) {
    RunConfig cfg;
    cfg.spec = desk_case(c);
    cfg.output.dir = dir;
    if (c == CaseName::Dispersion1D) cfg.output.trace_every = 1;
    if (c == CaseName::CurrentSheet2D) cfg.output.modes_every = 1;
    return cfg;
}

std::vector<CheckResult> verify_case(CaseName c, const fs::path& dir, std::ostream* log) {
    const RunConfig cfg = verification_config(c, dir);
    const CaseSpec& spec = cfg.spec;
    std::vector<CheckResult> out;

    if (c == CaseName::CurrentSheet2D) {
        // the unperturbed sheet has to stay put
        RunConfig still = cfg;
        still.spec.amplitude = 0.0;
        still.max_steps = 10;
        still.output.dir = dir / "unperturbed";
        still.output.modes_every = 0;
        Eigen::VectorXd B0;
        double motion = 0.0;
        run(still, log, [&](long, const State& st, const Integrator&) {
            if (B0.size() == 0) B0 = st.B.coeffs;
            motion = std::max({motion, st.u.coeffs.lpNorm<Eigen::Infinity>(),
                               (st.B.coeffs - B0).lpNorm<Eigen::Infinity>() / B0.lpNorm<Eigen::Infinity>()});
        });
        out.push_back(at_most("unperturbed sheet stationary", motion, 1e-9, "max |u|, relative |B - B0| over 10 steps"));
    }

    const RunResult res = run(cfg, log);
    const bool ideal = !spec.mu.active() && !spec.eta.active();
    for (CheckResult& r : check_invariants(res.history, ideal)) out.push_back(std::move(r));

    const DeRhamComplex cx = build_complex(complex_params(spec));
    switch (c) {
        case CaseName::CurrentSheet1D:
            out.push_back(check_heat_oracle(spec, res.final_state.time));
            out.push_back(check_current_sheet(cx, spec, res.final_state));
            break;
        case CaseName::Dispersion1D:
            for (CheckResult& r : check_dispersion(dir, spec)) out.push_back(std::move(r));
            break;
        case CaseName::OrszagTangIdeal:
            out.push_back(at_most("shock width in cells", shock_width_cells(cx, res.final_state), 4.0));
            break;
        case CaseName::OrszagTangVR:
            out.push_back(check_entropy_monotone(res.history));
            out.push_back(at_least("fields.csv written", fs::exists(dir / "fields.csv") ? 1.0 : 0.0, 1.0));
            break;
        case CaseName::CurrentSheet2D:
            for (CheckResult& r : check_growth(dir / "modes.csv", 6, cfg.growth_t0, cfg.growth_t1))
                out.push_back(std::move(r));
            break;
        case CaseName::KelvinHelmholtz:
            break;
    }

    nlohmann::json j = nlohmann::json::array();
    for (const CheckResult& r : out)
        j.push_back({{"name", r.name},
                     {"passed", r.passed},
                     {"value", r.value},
                     {"threshold", r.threshold},
                     {"detail", r.detail}});
    std::ofstream(dir / "verification.json", std::ios::trunc) << j.dump(2) << '\n';
    return out;
}

std::string format_check(const CheckResult& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %s: %.6g (limit %.6g)", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.value,
                  r.threshold);
    std::string s = buf;
    if (!r.detail.empty()) s += " [" + r.detail + "]";
    return s;
}

} // namespace vrmhd
