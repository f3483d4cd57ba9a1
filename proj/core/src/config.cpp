#include "vrmhd/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "vrmhd/errors.hpp"

namespace vrmhd {

namespace {

void check_keys(const YAML::Node& n, const std::string& where, const std::set<std::string>& allowed) {
    if (!n.IsMap()) throw ConfigError(where + ": expected a mapping");
    for (const auto& kv : n) {
        const std::string k = kv.first.as<std::string>();
        if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
    }
}

template <class T>
T get(const YAML::Node& n, const std::string& key, const std::string& where) {
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(where + "." + key + ": invalid value");
    }
}

template <class T>
void read(const YAML::Node& parent, const char* key, const std::string& where, T& out) {
    if (const YAML::Node n = parent[key]) out = get<T>(n, key, where);
}

double min_cell(const CaseSpec& s) {
    double h = std::numeric_limits<double>::infinity();
    for (const auto& a : s.axes)
        if (a.active) h = std::min(h, a.domain.length() / a.cells);
    return h;
}

DissipationSpec parse_dissipation(const YAML::Node& n, const std::string& where, const CaseSpec& spec) {
    if (n.IsScalar()) {
        const std::string v = n.Scalar();
        if (v == "off" || v == "false" || v == "none") return DissipationSpec::off();
        if (v == "artificial") {
            const double h = min_cell(spec);
            return DissipationSpec::artificial(2.0 * h * h);
        }
        const double c = get<double>(n, "", where);
        if (c < 0.0) throw ConfigError(where + ": coefficient must be nonnegative");
        return c == 0.0 ? DissipationSpec::off() : DissipationSpec::constant(c);
    }
    if (n.IsMap()) {
        check_keys(n, where, {"artificial", "constant"});
        if (n["artificial"] && n["constant"]) throw ConfigError(where + ": give either artificial or constant");
        const bool art = static_cast<bool>(n["artificial"]);
        const double c = get<double>(art ? n["artificial"] : n["constant"], art ? "artificial" : "constant", where);
        if (c < 0.0) throw ConfigError(where + ": coefficient must be nonnegative");
        return art ? DissipationSpec::artificial(c) : DissipationSpec::constant(c);
    }
    throw ConfigError(where + ": expected off, a number, artificial, or {artificial: c}");
}

Boundary parse_boundary(const std::string& s, const std::string& where) {
    if (s == "periodic") return Boundary::Periodic;
    if (s == "clamped") return Boundary::Clamped;
    throw ConfigError(where + ": boundary must be periodic or clamped");
}

const char* boundary_name(Boundary b) { return b == Boundary::Periodic ? "periodic" : "clamped"; }

std::vector<int> active_axes(const CaseSpec& s) {
    std::vector<int> a;
    for (int i = 0; i < 3; ++i)
        if (s.axes[i].active) a.push_back(i);
    return a;
}

void emit_dissipation(YAML::Emitter& e, const DissipationSpec& d) {
    switch (d.mode) {
        case DissipationSpec::Mode::Off: e << "off"; break;
        case DissipationSpec::Mode::Constant: e << d.value; break;
        case DissipationSpec::Mode::Artificial:
            e << YAML::Flow << YAML::BeginMap << YAML::Key << "artificial" << YAML::Value << d.value << YAML::EndMap;
            break;
    }
}

} // namespace

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    if (!root || !root.IsMap()) throw ConfigError("configuration must be a mapping");
    check_keys(root, "config",
               {"case", "preset", "grid", "physics", "perturbation", "current_sheet", "stabilization", "time",
                "propagators", "solver", "output", "growth_window", "restart", "max_steps"});
    if (!root["case"]) throw ConfigError("config: missing required key 'case'");

    RunConfig cfg;
    const CaseName name = parse_case_name(get<std::string>(root["case"], "case", "config"));
    std::string preset = "published";
    read(root, "preset", "config", preset);
    if (preset == "published")
        cfg.spec = published_case(name);
    else if (preset == "desk")
        cfg.spec = desk_case(name);
    else
        throw ConfigError("config.preset: expected published or desk");
    CaseSpec& s = cfg.spec;
    const std::vector<int> act = active_axes(s);

    bool grid_changed = false;
    if (const YAML::Node g = root["grid"]) {
        check_keys(g, "grid", {"cells", "degree", "domain", "boundary"});
        if (const YAML::Node c = g["cells"]) {
            const auto cells = get<std::vector<int>>(c, "cells", "grid");
            if (cells.size() != act.size()) throw ConfigError("grid.cells: expected one entry per active axis");
            for (size_t i = 0; i < act.size(); ++i) {
                if (cells[i] < 1) throw ConfigError("grid.cells: must be positive");
                s.axes[act[i]].cells = cells[i];
            }
            grid_changed = true;
        }
        if (const YAML::Node d = g["degree"]) {
            const int p = get<int>(d, "degree", "grid");
            if (p < 0) throw ConfigError("grid.degree: must be nonnegative");
            for (int a : act) s.axes[a].degree = p;
        }
        if (const YAML::Node d = g["domain"]) {
            const auto dom = get<std::vector<std::vector<double>>>(d, "domain", "grid");
            if (dom.size() != act.size()) throw ConfigError("grid.domain: expected one interval per active axis");
            for (size_t i = 0; i < act.size(); ++i) {
                if (dom[i].size() != 2 || !(dom[i][1] > dom[i][0])) throw ConfigError("grid.domain: expected [lo, hi]");
                s.axes[act[i]].domain = {dom[i][0], dom[i][1]};
            }
            grid_changed = true;
        }
        if (const YAML::Node b = g["boundary"]) {
            const auto bs = get<std::vector<std::string>>(b, "boundary", "grid");
            if (bs.size() != act.size()) throw ConfigError("grid.boundary: expected one entry per active axis");
            for (size_t i = 0; i < act.size(); ++i) s.axes[act[i]].boundary = parse_boundary(bs[i], "grid.boundary");
        }
    }
    if (grid_changed) {
        const double h = min_cell(s);
        if (s.mu.mode == DissipationSpec::Mode::Artificial) s.mu.value = 2.0 * h * h;
        if (s.eta.mode == DissipationSpec::Mode::Artificial) s.eta.value = 2.0 * h * h;
    }

    if (const YAML::Node p = root["physics"]) {
        check_keys(p, "physics", {"gamma", "rho0", "s0", "B0"});
        read(p, "gamma", "physics", s.gamma);
        if (!(s.gamma > 1.0)) throw ConfigError("physics.gamma: must exceed 1");
        read(p, "rho0", "physics", s.rho0);
        read(p, "s0", "physics", s.s0);
        if (const YAML::Node b = p["B0"]) {
            const auto v = get<std::vector<double>>(b, "B0", "physics");
            if (v.size() != 3) throw ConfigError("physics.B0: expected three components");
            s.B0 = {v[0], v[1], v[2]};
        }
    }
    if (const YAML::Node p = root["perturbation"]) {
        check_keys(p, "perturbation", {"amplitude", "seed", "modes", "phases", "width"});
        read(p, "amplitude", "perturbation", s.amplitude);
        read(p, "seed", "perturbation", s.seed);
        read(p, "modes", "perturbation", s.n_modes);
        read(p, "phases", "perturbation", s.phases);
        read(p, "width", "perturbation", s.width);
    }
    if (const YAML::Node p = root["current_sheet"]) {
        check_keys(p, "current_sheet", {"By0", "t0"});
        read(p, "By0", "current_sheet", s.By0);
        read(p, "t0", "current_sheet", s.t0);
    }
    if (const YAML::Node p = root["stabilization"]) {
        check_keys(p, "stabilization", {"mu", "eta", "linearized"});
        if (p["mu"]) s.mu = parse_dissipation(p["mu"], "stabilization.mu", s);
        if (p["eta"]) s.eta = parse_dissipation(p["eta"], "stabilization.eta", s);
        read(p, "linearized", "stabilization", s.linearized_resistivity);
    }
    if (const YAML::Node p = root["time"]) {
        check_keys(p, "time", {"dt", "t_end"});
        read(p, "dt", "time", s.dt);
        read(p, "t_end", "time", s.t_end);
    }
    if (!(s.dt > 0.0)) throw ConfigError("time.dt: must be positive");
    if (!(s.t_end >= 0.0)) throw ConfigError("time.t_end: must be nonnegative");
    if (const YAML::Node p = root["propagators"]) {
        check_keys(p, "propagators", {"rho", "m", "s", "B", "visc", "res"});
        read(p, "rho", "propagators", s.enabled.rho);
        read(p, "m", "propagators", s.enabled.m);
        read(p, "s", "propagators", s.enabled.s);
        read(p, "B", "propagators", s.enabled.B);
        read(p, "visc", "propagators", s.enabled.visc);
        read(p, "res", "propagators", s.enabled.res);
    }
    if (const YAML::Node p = root["solver"]) {
        check_keys(p, "solver", {"picard_tol", "picard_max_iters", "linear_tol", "composition"});
        read(p, "picard_tol", "solver", cfg.solver.picard_tol);
        read(p, "picard_max_iters", "solver", cfg.solver.picard_max_iters);
        read(p, "linear_tol", "solver", cfg.solver.linear_tol);
        if (const YAML::Node c = p["composition"]) {
            const auto v = get<std::string>(c, "composition", "solver");
            if (v == "symmetric")
                cfg.solver.composition = Composition::Symmetric;
            else if (v == "palindromic")
                cfg.solver.composition = Composition::Palindromic;
            else
                throw ConfigError("solver.composition: expected symmetric or palindromic");
        }
    }
    if (!(cfg.solver.picard_tol > 0.0) || !(cfg.solver.linear_tol > 0.0))
        throw ConfigError("solver: tolerances must be positive");
    if (cfg.solver.picard_max_iters < 1) throw ConfigError("solver.picard_max_iters: must be positive");
    if (const YAML::Node p = root["output"]) {
        check_keys(p, "output",
                   {"dir", "diagnostics_every", "snapshot_every", "trace_every", "trace_samples", "modes_every",
                    "modes_count"});
        std::string dir = cfg.output.dir.string();
        read(p, "dir", "output", dir);
        cfg.output.dir = dir;
        read(p, "diagnostics_every", "output", cfg.output.diagnostics_every);
        read(p, "snapshot_every", "output", cfg.output.snapshot_every);
        read(p, "trace_every", "output", cfg.output.trace_every);
        read(p, "trace_samples", "output", cfg.output.trace_samples);
        read(p, "modes_every", "output", cfg.output.modes_every);
        read(p, "modes_count", "output", cfg.output.modes_count);
    }
    if (cfg.output.diagnostics_every < 1) throw ConfigError("output.diagnostics_every: must be positive");
    if (cfg.output.snapshot_every < 0 || cfg.output.trace_every < 0 || cfg.output.modes_every < 0 ||
        cfg.output.trace_samples < 0 || cfg.output.modes_count < 1)
        throw ConfigError("output: intervals must be nonnegative");
    if (const YAML::Node w = root["growth_window"]) {
        const auto v = get<std::vector<double>>(w, "growth_window", "config");
        if (v.size() != 2 || !(v[1] > v[0])) throw ConfigError("growth_window: expected [t0, t1] with t1 > t0");
        cfg.growth_t0 = v[0];
        cfg.growth_t1 = v[1];
    }
    if (const YAML::Node r = root["restart"]) cfg.restart = get<std::string>(r, "restart", "config");
    if (const YAML::Node m = root["max_steps"]) {
        cfg.max_steps = get<long>(m, "max_steps", "config");
        if (*cfg.max_steps < 0) throw ConfigError("max_steps: must be nonnegative");
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const RunConfig& cfg) {
    const CaseSpec& s = cfg.spec;
    const std::vector<int> act = active_axes(s);
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    e << YAML::Key << "case" << YAML::Value << to_string(s.name);
    e << YAML::Key << "preset" << YAML::Value << s.preset;
    e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "cells" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (int a : act) e << s.axes[a].cells;
    e << YAML::EndSeq;
    e << YAML::Key << "degree" << YAML::Value << (act.empty() ? 0 : s.axes[act[0]].degree);
    e << YAML::Key << "domain" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (int a : act) e << YAML::Flow << YAML::BeginSeq << s.axes[a].domain.lo << s.axes[a].domain.hi << YAML::EndSeq;
    e << YAML::EndSeq;
    e << YAML::Key << "boundary" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (int a : act) e << boundary_name(s.axes[a].boundary);
    e << YAML::EndSeq << YAML::EndMap;
    e << YAML::Key << "physics" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "gamma" << YAML::Value << s.gamma;
    e << YAML::Key << "rho0" << YAML::Value << s.rho0;
    e << YAML::Key << "s0" << YAML::Value << s.s0;
    e << YAML::Key << "B0" << YAML::Value << YAML::Flow << YAML::BeginSeq << s.B0[0] << s.B0[1] << s.B0[2]
      << YAML::EndSeq;
    e << YAML::EndMap;
    e << YAML::Key << "perturbation" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "amplitude" << YAML::Value << s.amplitude;
    e << YAML::Key << "seed" << YAML::Value << s.seed;
    e << YAML::Key << "modes" << YAML::Value << s.n_modes;
    e << YAML::Key << "phases" << YAML::Value << YAML::Flow << s.phases;
    e << YAML::Key << "width" << YAML::Value << s.width;
    e << YAML::EndMap;
    e << YAML::Key << "current_sheet" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "By0" << YAML::Value << s.By0 << YAML::Key << "t0" << YAML::Value << s.t0;
    e << YAML::EndMap;
    e << YAML::Key << "stabilization" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "mu" << YAML::Value;
    emit_dissipation(e, s.mu);
    e << YAML::Key << "eta" << YAML::Value;
    emit_dissipation(e, s.eta);
    e << YAML::Key << "linearized" << YAML::Value << s.linearized_resistivity;
    e << YAML::EndMap;
    e << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "dt" << YAML::Value << s.dt << YAML::Key << "t_end" << YAML::Value << s.t_end;
    e << YAML::EndMap;
    e << YAML::Key << "propagators" << YAML::Value << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "rho" << YAML::Value << s.enabled.rho << YAML::Key << "m" << YAML::Value << s.enabled.m;
    e << YAML::Key << "s" << YAML::Value << s.enabled.s << YAML::Key << "B" << YAML::Value << s.enabled.B;
    e << YAML::Key << "visc" << YAML::Value << s.enabled.visc << YAML::Key << "res" << YAML::Value << s.enabled.res;
    e << YAML::EndMap;
    e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "picard_tol" << YAML::Value << cfg.solver.picard_tol;
    e << YAML::Key << "picard_max_iters" << YAML::Value << cfg.solver.picard_max_iters;
    e << YAML::Key << "linear_tol" << YAML::Value << cfg.solver.linear_tol;
    e << YAML::Key << "composition" << YAML::Value
      << (cfg.solver.composition == Composition::Symmetric ? "symmetric" : "palindromic");
    e << YAML::EndMap;
    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "dir" << YAML::Value << cfg.output.dir.string();
    e << YAML::Key << "diagnostics_every" << YAML::Value << cfg.output.diagnostics_every;
    e << YAML::Key << "snapshot_every" << YAML::Value << cfg.output.snapshot_every;
    e << YAML::Key << "trace_every" << YAML::Value << cfg.output.trace_every;
    e << YAML::Key << "trace_samples" << YAML::Value << cfg.output.trace_samples;
    e << YAML::Key << "modes_every" << YAML::Value << cfg.output.modes_every;
    e << YAML::Key << "modes_count" << YAML::Value << cfg.output.modes_count;
    e << YAML::EndMap;
    e << YAML::Key << "growth_window" << YAML::Value << YAML::Flow << YAML::BeginSeq << cfg.growth_t0
      << cfg.growth_t1 << YAML::EndSeq;
    if (cfg.restart) e << YAML::Key << "restart" << YAML::Value << cfg.restart->string();
    if (cfg.max_steps) e << YAML::Key << "max_steps" << YAML::Value << *cfg.max_steps;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

StepConfig step_config(const RunConfig& cfg) {
    StepConfig sc;
    sc.dt = cfg.spec.dt;
    sc.picard_tol = cfg.solver.picard_tol;
    sc.picard_max_iters = cfg.solver.picard_max_iters;
    sc.linear_tol = cfg.solver.linear_tol;
    sc.mu = cfg.spec.mu;
    sc.eta = cfg.spec.eta;
    sc.composition = cfg.solver.composition;
    sc.enabled = cfg.spec.enabled;
    return sc;
}

} // namespace vrmhd
