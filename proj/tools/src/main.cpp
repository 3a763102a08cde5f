#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "config.hpp"
#include "ergotrack/localsolve.hpp"
#include "ergotrack/occulp.hpp"
#include "ergotrack/simkit.hpp"
#include "ergotrack/tracker.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ergotrack;
using tools::ConfigError;
using tools::FlatConfig;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CliOptions {
    std::string config_path;
    std::string output_dir;
    std::string format;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool quiet = false;
};

ModelParams params_from_config(const FlatConfig& cfg) {
    ModelParams p;
    p.a = cfg.get_double("model.a");
    p.r = cfg.get_double("model.r");
    p.l = cfg.get_double("model.l", 0.0);
    p.k = cfg.get_double("model.k", 0.0);
    p.h = cfg.get_double("model.h", 0.0);
    return p;
}

ControlClass class_from_config(const FlatConfig& cfg) {
    std::string s = cfg.get_str("run.class");
    auto c = control_class_from_string(s);
    if (!c) throw ConfigError("run.class: unknown control class: " + s);
    return *c;
}

json params_to_json(const ModelParams& p) {
    return {{"a", p.a}, {"r", p.r}, {"l", p.l}, {"k", p.k}, {"h", p.h}};
}

ModelParams params_from_json(const json& j) {
    return {j.at("a"), j.at("r"), j.at("l"), j.at("k"), j.at("h")};
}

json density_to_json(const DensityProfile& d) {
    json j;
    switch (d.kind) {
        case DensityProfile::Kind::Gaussian:
            j["kind"] = "gaussian";
            j["sigma2"] = d.sigma2;
            break;
        case DensityProfile::Kind::Uniform:
            j["kind"] = "uniform";
            break;
        case DensityProfile::Kind::Trapezoid:
            j["kind"] = "trapezoid";
            j["x_tilde"] = d.x_tilde;
            j["x_star"] = d.x_star;
            break;
        case DensityProfile::Kind::Tabulated:
            j["kind"] = "tabulated";
            j["values"] = d.values;
            break;
    }
    j["lo"] = d.lo;
    j["hi"] = d.hi;
    return j;
}

json solution_to_json(const LocalSolution& s) {
    json j;
    j["class"] = to_string(s.cls);
    j["params"] = params_to_json(s.params);
    j["cost"] = s.cost;
    if (s.iota) j["iota"] = *s.iota;
    if (s.U) j["U"] = *s.U;
    if (s.xi_star) j["xi_star"] = *s.xi_star;
    if (s.x_tilde) j["x_tilde"] = *s.x_tilde;
    if (s.theta1) j["theta1"] = *s.theta1;
    if (s.theta2) j["theta2"] = *s.theta2;
    j["density"] = density_to_json(s.density);
    json atoms = json::array();
    for (const auto& a : s.boundary_measure) {
        atoms.push_back(
            {{"location", a.location}, {"jump", a.jump}, {"mass", a.mass}});
    }
    j["boundary_measure"] = atoms;
    return j;
}

occulp::GridSpec grid_from_config(const FlatConfig& cfg, const ModelParams& p,
                                  ControlClass cls) {
    int nx = int(cfg.get_int("grid.nx", 161));
    occulp::GridSpec g = occulp::default_grid(p, cls, nx);
    g.x_lo = cfg.get_double("grid.x_lo", g.x_lo);
    g.x_hi = cfg.get_double("grid.x_hi", g.x_hi);
    g.u_lo = cfg.get_double("grid.u_lo", g.u_lo);
    g.u_hi = cfg.get_double("grid.u_hi", g.u_hi);
    g.nu = int(cfg.get_int("grid.nu", g.nu));
    return g;
}

simkit::PathConfig path_from_config(const FlatConfig& cfg,
                                    const CliOptions& cli) {
    simkit::PathConfig c;
    c.dt = cfg.get_double("path.dt", 1e-3);
    c.horizon = cfg.get_double("path.horizon", 1e4);
    c.n_paths = int(cfg.get_int("path.n_paths", 20));
    c.seed = cfg.get_u64("path.seed", cfg.get_u64("run.seed", 20260823ULL));
    if (cli.seed_set) c.seed = cli.seed;
    c.track_residuals = cfg.get_bool("path.track_residuals", false);
    return c;
}

tracker::CoefficientPath parse_path_spec(const std::string& key,
                                         const std::string& spec, double T) {
    std::vector<std::string> parts;
    std::istringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    auto num = [&](size_t i) {
        char* end = nullptr;
        double d = std::strtod(parts[i].c_str(), &end);
        if (end == parts[i].c_str() || *end != '\0') {
            throw ConfigError(key + ": bad number in path spec: " + parts[i]);
        }
        return d;
    };
    if (parts.empty()) throw ConfigError(key + ": empty path spec");
    if (parts[0] == "const" && parts.size() == 2) {
        return tracker::CoefficientPath::constant(num(1));
    }
    if (parts[0] == "linear" && parts.size() == 3) {
        return tracker::CoefficientPath::linear(num(1), num(2), T);
    }
    if (parts[0] == "sin" && parts.size() == 4) {
        return tracker::CoefficientPath::sinusoid(num(1), num(2), num(3));
    }
    if (parts[0] == "table" && parts.size() >= 5 && parts.size() % 2 == 1) {
        tracker::CoefficientPath p;
        p.kind = tracker::CoefficientPath::Kind::Table;
        for (size_t i = 1; i + 1 < parts.size(); i += 2) {
            p.times.push_back(num(i));
            p.values.push_back(num(i + 1));
        }
        return p;
    }
    throw ConfigError(key + ": bad path spec (const:v | linear:v0:v1 | "
                            "sin:mean:amp:period | table:t:v:...): " +
                      spec);
}

tracker::TrackingProblem tracking_from_config(const FlatConfig& cfg) {
    tracker::TrackingProblem tp;
    tp.cls = class_from_config(cfg);
    tp.T = cfg.get_double("track.T", 1.0);
    auto path = [&](const char* name, const char* dflt) {
        std::string key = std::string("track.") + name;
        return parse_path_spec(key, cfg.get_str(key, dflt), tp.T);
    };
    tp.a_path = path("a", "const:1");
    tp.b_path = path("b", "const:0");
    tp.r_path = path("r", "const:1");
    tp.l_path = path("l", "const:0");
    tp.k_path = path("k", "const:0");
    tp.h_path = path("h", "const:0");
    tp.exponents.zeta_D = cfg.get_double("track.zeta_D", 2.0);
    tp.exponents.zeta_Q = cfg.get_double("track.zeta_Q", 2.0);
    if (cfg.has("track.beta_Q")) {
        tp.exponents.beta_Q = cfg.get_double("track.beta_Q");
    }
    if (cfg.has("track.beta_F")) {
        tp.exponents.beta_F = cfg.get_double("track.beta_F");
    }
    if (cfg.has("track.beta_P")) {
        tp.exponents.beta_P = cfg.get_double("track.beta_P");
    }
    tp.n_checkpoints = int(cfg.get_int("track.n_checkpoints", 33));
    return tp;
}

void write_text(const fs::path& p, const std::string& body) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << body;
}

struct Emitter {
    fs::path dir;
    std::string format;
    bool quiet;

    void emit(const std::string& name, const json& j,
              const std::string& csv_body) const {
        fs::create_directories(dir);
        if (format == "json" || format == "both") {
            write_text(dir / (name + ".json"), j.dump(2) + "\n");
        }
        if (format == "csv" || format == "both") {
            write_text(dir / (name + ".csv"), csv_body);
        }
        if (!quiet) {
            std::cout << name << " -> " << (dir / name).string() << ".{"
                      << format << "}\n";
        }
    }
};

std::string csv_row_end() { return "\n"; }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int cmd_local(const FlatConfig& cfg, const Emitter& em) {
    ModelParams p = params_from_config(cfg);
    ControlClass cls = class_from_config(cfg);
    LocalSolution s = localsolve::solve(p, cls);
    json j = solution_to_json(s);
    std::ostringstream csv;
    csv << "class,cost,iota,U,xi_star,x_tilde,theta1,theta2" << csv_row_end();
    csv << to_string(cls) << ',' << fmt(s.cost) << ','
        << (s.iota ? fmt(*s.iota) : "") << ',' << (s.U ? fmt(*s.U) : "") << ','
        << (s.xi_star ? fmt(*s.xi_star) : "") << ','
        << (s.x_tilde ? fmt(*s.x_tilde) : "") << ','
        << (s.theta1 ? fmt(*s.theta1) : "") << ','
        << (s.theta2 ? fmt(*s.theta2) : "") << csv_row_end();
    em.emit("local", j, csv.str());
    return 0;
}

int cmd_lp(const FlatConfig& cfg, const Emitter& em) {
    ModelParams p = params_from_config(cfg);
    ControlClass cls = class_from_config(cfg);
    occulp::GridSpec g = grid_from_config(cfg, p, cls);
    occulp::DiscreteLP lp = occulp::build_lp(p, cls, g);
    int max_iter = int(cfg.get_int("grid.max_iter", 200000));
    occulp::LPSolution sol = occulp::solve_lp(lp, max_iter);
    const char* status = sol.status == occulp::LPStatus::Optimal ? "optimal"
                         : sol.status == occulp::LPStatus::Infeasible
                             ? "infeasible"
                         : sol.status == occulp::LPStatus::Unbounded
                             ? "unbounded"
                             : "iteration_limit";
    json j{{"class", to_string(cls)},
           {"params", params_to_json(p)},
           {"objective", sol.objective_value},
           {"status", status},
           {"iterations", sol.iterations},
           {"nx", g.nx},
           {"nu", g.nu},
           {"x_lo", g.x_lo},
           {"x_hi", g.x_hi},
           {"n_vars", lp.cols.size()},
           {"n_rows", lp.n_rows}};
    std::ostringstream csv;
    csv << "class,objective,status,iterations,nx,nu" << csv_row_end()
        << to_string(cls) << ',' << fmt(sol.objective_value) << ',' << status
        << ',' << sol.iterations << ',' << g.nx << ',' << g.nu
        << csv_row_end();
    em.emit("lp", j, csv.str());
    if (cfg.get_bool("grid.export_triplets", false)) {
        fs::create_directories(em.dir);
        std::ofstream t(em.dir / "lp_triplets.txt");
        occulp::export_triplets(lp, t);
    }
    if (sol.status != occulp::LPStatus::Optimal) {
        std::cerr << "lp: solver finished with status " << status << "\n";
        return 1;
    }
    return 0;
}

simkit::StrategySpec strategy_from_config(const FlatConfig& cfg,
                                          const ModelParams& p,
                                          ControlClass cls) {
    std::string kind = cfg.get_str("path.strategy", "optimal");
    if (kind == "null") return simkit::StrategySpec{};
    simkit::StrategySpec s = simkit::optimal_strategy(localsolve::solve(p, cls));
    if (kind == "optimal") return s;
    if (kind == "distorted") {
        double lambda = cfg.get_double("path.lambda", 1.5);
        return simkit::distort_strategy(s, lambda);
    }
    throw ConfigError("path.strategy: expected optimal|distorted|null, got " +
                      kind);
}

json hist_to_json(const simkit::Histogram& h) {
    return {{"lo", h.lo}, {"hi", h.hi}, {"mass", h.mass}};
}

int cmd_simulate(const FlatConfig& cfg, const Emitter& em,
                 const CliOptions& cli) {
    ModelParams p = params_from_config(cfg);
    ControlClass cls = class_from_config(cfg);
    simkit::PathConfig c = path_from_config(cfg, cli);
    simkit::StrategySpec s = strategy_from_config(cfg, p, cls);
    simkit::SimulationResult r = simkit::simulate(p, s, c);
    json j{{"class", to_string(cls)},
           {"params", params_to_json(p)},
           {"avg_cost", r.avg_cost},
           {"stderr", simkit::cost_standard_error(r)},
           {"breakdown",
            {{"deviation", r.cost_deviation},
             {"regular", r.cost_regular},
             {"fixed", r.cost_fixed},
             {"proportional", r.cost_proportional}}},
           {"n_interventions", r.n_interventions},
           {"rho_total_mass", r.rho_total_mass},
           {"n_paths", c.n_paths},
           {"dt", c.dt},
           {"horizon", c.horizon},
           {"seed", r.seed},
           {"rng", r.rng_name},
           {"x_hist", hist_to_json(r.x_hist)},
           {"u_hist", hist_to_json(r.u_hist)}};
    if (!r.constraint_residuals.empty()) {
        j["constraint_residuals"] = r.constraint_residuals;
    }
    std::ostringstream csv;
    csv << "seed,avg_cost,deviation,regular,fixed,proportional,interventions"
        << csv_row_end();
    for (const auto& ps : r.per_path) {
        csv << ps.seed << ',' << fmt(ps.cost) << ',' << fmt(ps.deviation)
            << ',' << fmt(ps.regular) << ',' << fmt(ps.fixed) << ','
            << fmt(ps.proportional) << ',' << ps.interventions
            << csv_row_end();
    }
    em.emit("simulate", j, csv.str());
    return 0;
}

tracker::TrackStrategy track_strategy_from_name(const std::string& name) {
    if (name == "optimal") return tracker::TrackStrategy::RescaledOptimal;
    if (name == "distorted") return tracker::TrackStrategy::RescaledDistorted;
    if (name == "null") return tracker::TrackStrategy::NullStrategy;
    throw ConfigError("strategy: expected optimal|distorted|null, got " +
                      name);
}

int cmd_track(const FlatConfig& cfg, const Emitter& em,
              const CliOptions& cli) {
    tracker::TrackingProblem tp = tracking_from_config(cfg);
    double eps = cfg.get_double("track.eps", 0.05);
    simkit::PathConfig c = path_from_config(cfg, cli);
    auto strat =
        track_strategy_from_name(cfg.get_str("path.strategy", "optimal"));
    double lambda = cfg.get_double("path.lambda", 2.0);
    int n_times = int(cfg.get_int("track.n_times", 101));
    double bound = tracker::lower_bound_integral(tp, n_times);
    tracker::TrackResult r =
        tracker::simulate_tracking(tp, eps, c, strat, lambda);
    json j{{"class", to_string(tp.cls)},
           {"eps", eps},
           {"beta", r.beta},
           {"bound", bound},
           {"mean_J", r.mean_J},
           {"mean_normalized", r.mean_normalized},
           {"stderr_normalized", r.stderr_normalized},
           {"n_trials", c.n_paths},
           {"strategy", tracker::to_string(strat)}};
    std::ostringstream csv;
    csv << "trial,normalized" << csv_row_end();
    for (size_t i = 0; i < r.per_trial_normalized.size(); ++i) {
        csv << i << ',' << fmt(r.per_trial_normalized[i]) << csv_row_end();
    }
    em.emit("track", j, csv.str());
    return 0;
}

int cmd_verify(const FlatConfig& cfg, const Emitter& em,
               const CliOptions& cli) {
    tracker::TrackingProblem tp = tracking_from_config(cfg);
    std::vector<double> eps_list = cfg.has("track.eps_list")
                                       ? cfg.get_list("track.eps_list")
                                       : std::vector<double>{0.1, 0.05, 0.02};
    double delta = cfg.get_double("track.delta_frac", 0.05);
    simkit::PathConfig c = path_from_config(cfg, cli);
    double lambda = cfg.get_double("path.lambda", 2.0);
    std::vector<tracker::TrackStrategy> strategies;
    std::istringstream ss(cfg.get_str("track.strategies", "optimal"));
    std::string name;
    while (std::getline(ss, name, ',')) {
        strategies.push_back(track_strategy_from_name(name));
    }
    tracker::VerifyReport rep =
        tracker::verify_lower_bound(tp, eps_list, delta, c, strategies,
                                    lambda);
    json entries = json::array();
    std::ostringstream csv;
    csv << "eps,strategy,fraction,mean_normalized,stderr_normalized,n_trials"
        << csv_row_end();
    for (const auto& e : rep.entries) {
        entries.push_back({{"eps", e.eps},
                           {"strategy", tracker::to_string(e.strategy)},
                           {"fraction", e.fraction},
                           {"mean_normalized", e.mean_normalized},
                           {"stderr_normalized", e.stderr_normalized},
                           {"n_trials", e.n_trials}});
        csv << fmt(e.eps) << ',' << tracker::to_string(e.strategy) << ','
            << fmt(e.fraction) << ',' << fmt(e.mean_normalized) << ','
            << fmt(e.stderr_normalized) << ',' << e.n_trials << csv_row_end();
    }
    json j{{"class", to_string(tp.cls)},
           {"bound", rep.bound},
           {"delta_frac", rep.delta_frac},
           {"entries", entries}};
    em.emit("verify", j, csv.str());
    return 0;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open result file: " + path);
    json j;
    in >> j;
    return j;
}

int cmd_compare(const std::vector<std::string>& files, const Emitter& em) {
    json local = load_json(files[0]);
    json lp = load_json(files[1]);
    json sim = load_json(files[2]);
    ModelParams p0 = params_from_json(local.at("params"));
    for (const json* other : {&lp, &sim}) {
        ModelParams p1 = params_from_json(other->at("params"));
        if (p0.a != p1.a || p0.r != p1.r || p0.l != p1.l || p0.k != p1.k ||
            p0.h != p1.h ||
            local.at("class") != other->at("class")) {
            throw ConfigError("compare: result files have mismatched "
                              "parameters or class");
        }
    }
    double I = local.at("cost");
    double lp_val = lp.at("objective");
    double mc = sim.at("avg_cost");
    double se = sim.at("stderr");
    double lp_gap = (lp_val - I) / I;
    double mc_gap = (mc - I) / I;
    const double kLpTol = 0.03, kMcTol = 0.02;
    json flags = json::array();
    if (std::abs(lp_gap) > kLpTol) {
        std::string msg = "lp gap beyond 3% tolerance";
        if (lp.value("nx", 161) < 161) msg += " (grid-resolution: nx < 161)";
        flags.push_back(msg);
    }
    if (std::abs(mc_gap) > std::max(kMcTol, 2.0 * se / I)) {
        flags.push_back("mc gap beyond 2% / 2-stderr tolerance");
    }
    json j{{"class", local.at("class")},
           {"params", local.at("params")},
           {"closed_form", I},
           {"lp_value", lp_val},
           {"lp_gap", lp_gap},
           {"mc_mean", mc},
           {"mc_stderr", se},
           {"mc_gap", mc_gap},
           {"flags", flags}};
    std::ostringstream csv;
    csv << "closed_form,lp_value,lp_gap,mc_mean,mc_stderr,mc_gap,n_flags"
        << csv_row_end() << fmt(I) << ',' << fmt(lp_val) << ',' << fmt(lp_gap)
        << ',' << fmt(mc) << ',' << fmt(se) << ',' << fmt(mc_gap) << ','
        << flags.size() << csv_row_end();
    em.emit("compare", j, csv.str());
    if (!em.quiet) {
        std::cout << "closed form " << I << " | lp " << lp_val << " (gap "
                  << lp_gap * 100 << "%) | mc " << mc << " +- " << se
                  << " (gap " << mc_gap * 100 << "%) | flags "
                  << flags.size() << "\n";
    }
    return 0;
}

void write_metadata(const Emitter& em, const std::string& command,
                    std::uint64_t seed, const FlatConfig* cfg,
                    double wall_ms) {
    fs::create_directories(em.dir);
    json j{{"tool", "ergotrack"},
           {"version", kVersion},
           {"command", command},
           {"seed", seed},
           {"wall_ms", wall_ms},
           {"rng", "mt19937_64/box-muller"}};
    const char* threads = std::getenv("ERGOTRACK_THREADS");
    j["threads"] = threads ? threads : "1";
    if (cfg) j["config_echo"] = cfg->raw();
    write_text(em.dir / "metadata.json", j.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ergotrack: ergodic-control solvers, LP oracle, Monte Carlo "
                 "verification"};
    app.set_version_flag("--version", kVersion);
    CliOptions cli;
    app.add_option("--config", cli.config_path, "config file (run mode)");
    app.add_option("--output", cli.output_dir, "output directory");
    app.add_option("--format", cli.format, "csv|json|both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    auto* seed_opt =
        app.add_option("--seed", cli.seed, "override config seed");
    app.add_flag("--quiet", cli.quiet, "suppress progress output");
    auto* cmp = app.add_subcommand("compare",
                                   "consolidate local/lp/simulate results");
    cmp->fallthrough();  // global options may trail the positional files
    std::vector<std::string> cmp_files;
    cmp->add_option("files", cmp_files, "local.json lp.json simulate.json")
        ->expected(3);
    CLI11_PARSE(app, argc, argv);
    cli.seed_set = seed_opt->count() > 0;

    auto t0 = std::chrono::steady_clock::now();
    auto wall_ms = [&] {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    };

    try {
        if (*cmp) {
            Emitter em{cli.output_dir.empty() ? "." : cli.output_dir,
                       cli.format.empty() ? "json" : cli.format, cli.quiet};
            int rc = cmd_compare(cmp_files, em);
            write_metadata(em, "compare", 0, nullptr, wall_ms());
            return rc;
        }
        if (cli.config_path.empty()) {
            std::cerr << "error: --config is required (or use `compare`)\n";
            return 2;
        }
        FlatConfig cfg = FlatConfig::parse_file(cli.config_path);
        std::string command = cfg.get_str("run.command");
        Emitter em{cli.output_dir.empty()
                       ? cfg.get_str("run.output", ".")
                       : cli.output_dir,
                   cli.format.empty() ? cfg.get_str("run.format", "json")
                                      : cli.format,
                   cli.quiet};
        if (em.format != "csv" && em.format != "json" && em.format != "both") {
            throw ConfigError("run.format: expected csv|json|both, got " +
                              em.format);
        }
        std::uint64_t seed = cli.seed_set
                                 ? cli.seed
                                 : cfg.get_u64("run.seed", 20260823ULL);
        int rc;
        if (command == "local") {
            rc = cmd_local(cfg, em);
        } else if (command == "lp") {
            rc = cmd_lp(cfg, em);
        } else if (command == "simulate") {
            rc = cmd_simulate(cfg, em, cli);
        } else if (command == "track") {
            rc = cmd_track(cfg, em, cli);
        } else if (command == "verify") {
            rc = cmd_verify(cfg, em, cli);
        } else {
            throw ConfigError(
                "run.command: expected local|lp|simulate|track|verify, got " +
                command);
        }
        write_metadata(em, command, seed, &cfg, wall_ms());
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 1;
    }
}
