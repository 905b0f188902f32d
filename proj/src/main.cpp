#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qlab/ae.hpp"
#include "qlab/burnin.hpp"
#include "qlab/noise.hpp"
#include "qlab/nozzle.hpp"
#include "qlab/resources.hpp"
#include "qlab/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return j;
}

qlab::Regime parse_regime(const std::string& s) {
    if (s == "incompressible") return qlab::Regime::incompressible;
    if (s == "compressible") return qlab::Regime::compressible;
    throw ConfigError("regime must be 'incompressible' or 'compressible', got '" + s + "'");
}

qlab::SolverKind parse_solver(const std::string& s) {
    if (s == "SIMPLE" || s == "simple") return qlab::SolverKind::simple;
    if (s == "coupled") return qlab::SolverKind::coupled;
    throw ConfigError("solver must be 'SIMPLE' or 'coupled', got '" + s + "'");
}

qlab::NozzleCase case_from_config(const json& cfg) {
    int stations = cfg.value("stations", 8);
    qlab::NozzleCase c;
    try {
        c = qlab::build_case(stations, parse_regime(cfg.value("regime", "incompressible")),
                             parse_solver(cfg.value("solver", "SIMPLE")));
    } catch (const qlab::InvalidCase& e) {
        throw ConfigError(e.what());
    }
    c.eps_tol = cfg.value("eps_tol", 1e-9);
    if (c.eps_tol <= 0.0) throw ConfigError("eps_tol must be > 0");
    c.max_outer_iterations = cfg.value("max_iterations", 100000);
    if (cfg.contains("relaxation")) {
        c.omega_u = cfg["relaxation"].value("momentum", 0.7);
        c.omega_p = cfg["relaxation"].value("pressure", 0.3);
    }
    return c;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

void write_manifest(const fs::path& outdir, const std::string& subcommand,
                    const std::string& config_path, const json& config, uint64_t seed) {
    json m;
    m["subcommand"] = subcommand;
    m["config_path"] = config_path;
    m["config"] = config;
    m["seed"] = seed;
    m["out_dir"] = outdir.string();
    m["tool_version"] = kVersion;
    auto now = std::chrono::system_clock::now();
    m["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    write_file(outdir / "manifest.json", m.dump(2) + "\n");
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

int cmd_solve(const std::string& config_path, const fs::path& outdir, uint64_t seed) {
    json cfg = load_config(config_path);
    qlab::NozzleCase c = case_from_config(cfg);
    qlab::ConvergenceReport rep = qlab::run_outer_loop(c, nullptr);
    std::ostringstream os;
    os << "iter,residual_l2,max_correction\n";
    for (size_t i = 0; i < rep.residual_history.size(); ++i)
        os << (i + 1) << ',' << fmt(rep.residual_history[i]) << ','
           << fmt(rep.correction_history[i]) << '\n';
    write_file(outdir / "history.csv", os.str());
    write_manifest(outdir, "solve", config_path, cfg, seed);
    if (!rep.converged) {
        std::cerr << "solve: did not converge within " << c.max_outer_iterations
                  << " iterations (final residual " << rep.final_residual << ")\n";
        return 1;
    }
    std::cout << "converged in " << rep.iterations << " iterations, final residual "
              << rep.final_residual << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const fs::path& outdir, uint64_t seed,
              int threads) {
    json cfg = load_config(config_path);
    qlab::NozzleCase c = case_from_config(cfg);
    if (!cfg.contains("eps_list") || !cfg.contains("alpha_list"))
        throw ConfigError("sweep config requires eps_list and alpha_list");
    std::vector<double> eps_list = cfg["eps_list"].get<std::vector<double>>();
    std::vector<double> alpha_list = cfg["alpha_list"].get<std::vector<double>>();
    int trials = cfg.value("trials", 1);
    int cap = cfg.value("cap", 100000);
    if (eps_list.empty() || alpha_list.empty() || trials < 1)
        throw ConfigError("sweep grid must be nonempty with trials >= 1");
    qlab::SweepResult sw = qlab::run_noisy_sweep(c, eps_list, alpha_list, trials, seed, cap, threads);
    std::ostringstream os;
    os << "eps,alpha,trial,max_error,converged,iterations\n";
    for (const auto& cell : sw.cells)
        os << fmt(cell.eps) << ',' << fmt(cell.alpha) << ',' << cell.trial << ','
           << fmt(cell.max_error) << ',' << (cell.converged ? "true" : "false") << ','
           << cell.iterations << '\n';
    write_file(outdir / "sweep.csv", os.str());
    write_manifest(outdir, "sweep", config_path, cfg, seed);
    return 0;
}

int cmd_ae(const std::string& config_path, const fs::path& outdir, uint64_t seed) {
    json cfg = load_config(config_path);
    double a = cfg.value("a", 0.5);
    if (std::abs(a) > 1.0) throw ConfigError("ae config: |a| <= 1 required");
    qlab::AeConfig ac;
    ac.eps = cfg.value("eps", 1e-3);
    ac.delta = cfg.value("delta", 0.05);
    ac.b0 = cfg.value("b0", 0.5);
    if (!(ac.eps > 0.0 && ac.eps < 1.0) || !(ac.delta > 0.0 && ac.delta < 1.0))
        throw ConfigError("ae config: eps and delta must lie in (0,1)");
    int trials = cfg.value("trials", 100);
    bool use_signed = cfg.value("signed", false);
    if (trials < 1) throw ConfigError("ae config: trials >= 1");

    json per_trial = json::array();
    long long covered = 0;
    double sum_q = 0.0;
    for (int t = 0; t < trials; ++t) {
        auto rng = qlab::substream(seed, "ae", static_cast<uint64_t>(t));
        qlab::AeResult r;
        if (use_signed) {
            qlab::CoinOracle oracle{a, qlab::CoinOracle::Flavour::shifted, ac.b0, false};
            r = qlab::signed_estimate(oracle, ac, rng);
        } else {
            qlab::CoinOracle oracle{a, qlab::CoinOracle::Flavour::plain, 0.5, false};
            r = qlab::chebae_estimate(oracle, ac, rng);
        }
        double target = use_signed ? a : std::abs(a);
        if (std::abs(r.a_hat - target) <= ac.eps) ++covered;
        sum_q += static_cast<double>(r.queries);
        per_trial.push_back({{"a_hat", r.a_hat},
                             {"queries", r.queries},
                             {"rounds", r.rounds},
                             {"converged", r.converged}});
    }
    json out;
    out["trials"] = per_trial;
    out["aggregate"] = {{"coverage", static_cast<double>(covered) / trials},
                        {"mean_queries", sum_q / trials},
                        {"model_queries", qlab::model_query_complexity(ac.eps, use_signed)}};
    write_file(outdir / "ae.json", out.dump(2) + "\n");
    write_manifest(outdir, "ae", config_path, cfg, seed);
    return 0;
}

int cmd_burnin(const std::string& config_path, const fs::path& outdir, uint64_t seed,
               int threads) {
    json cfg = load_config(config_path);
    qlab::BurninGrid grid;
    if (cfg.contains("depths")) grid.depths = cfg["depths"].get<std::vector<int>>();
    if (cfg.contains("a_max_values"))
        grid.a_max_values = cfg["a_max_values"].get<std::vector<double>>();
    if (cfg.contains("n_shots")) grid.n_shots = cfg["n_shots"].get<std::vector<long long>>();
    int trials = cfg.value("trials", 10);
    if (trials < 1) throw ConfigError("burnin config: trials >= 1");
    qlab::SlopeModelBuild built;
    try {
        built = qlab::rebuild_slope_model(grid, trials, seed, threads);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    std::ostringstream os;
    os << "depth,n_peaks,a_max,slope\n";
    for (const auto& row : built.table)
        os << row.depth << ',' << row.n_peaks << ',' << fmt(row.a_max) << ',' << fmt(row.slope)
           << '\n';
    write_file(outdir / "slopes.csv", os.str());
    json coeffs = {{"c2", built.model.c2},
                   {"c1", built.model.c1},
                   {"c0", built.model.c0},
                   {"monotone_decreasing", built.model.monotone_decreasing_on_unit()}};
    write_file(outdir / "coefficients.json", coeffs.dump(2) + "\n");
    write_manifest(outdir, "burnin", config_path, cfg, seed);
    return 0;
}

int cmd_resources(const std::string& config_path, const fs::path& outdir, uint64_t seed) {
    json cfg = load_config(config_path);
    if (!cfg.contains("fixture")) throw ConfigError("resources config requires a 'fixture' path");
    fs::path fixture = cfg["fixture"].get<std::string>();
    if (fixture.is_relative()) fixture = fs::path(config_path).parent_path() / fixture;
    qlab::ErrorCorrectionParams params;
    if (cfg.contains("params")) {
        const json& p = cfg["params"];
        params.p_phys = p.value("p_phys", params.p_phys);
        params.p_threshold = p.value("p_threshold", params.p_threshold);
        params.fowler_prefactor = p.value("fowler_prefactor", params.fowler_prefactor);
        params.p_fail_logical = p.value("p_fail_logical", params.p_fail_logical);
        params.p_fail_msd = p.value("p_fail_msd", params.p_fail_msd);
        params.t_cycle_s = p.value("t_cycle_s", params.t_cycle_s);
        params.toffoli_magic_factor = p.value("toffoli_magic_factor", params.toffoli_magic_factor);
        params.factory.footprint_qubits =
            p.value("factory_footprint_qubits", params.factory.footprint_qubits);
        params.factory.count = p.value("factory_count", params.factory.count);
    }
    std::vector<qlab::TableFixtureRow> rows;
    try {
        rows = qlab::load_fixture_rows(fixture.string());
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    auto table = qlab::build_table(rows, params);
    write_file(outdir / "resources.csv", qlab::table_csv(table));
    write_manifest(outdir, "resources", config_path, cfg, seed);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Measurement-scheme laboratory for quantum linear-equation solver costing"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    int64_t seed_flag = -1;
    int threads = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--seed", seed_flag, "override the config seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads");
    };
    CLI::App* solve = app.add_subcommand("solve", "noiseless CFD convergence run");
    CLI::App* sweep = app.add_subcommand("sweep", "noise/cutoff sweep through the CFD loop");
    CLI::App* ae = app.add_subcommand("ae", "amplitude-estimation simulation");
    CLI::App* burnin = app.add_subcommand("burnin", "burn-in slope model rebuild");
    CLI::App* resources = app.add_subcommand("resources", "resource-table generation");
    for (CLI::App* sub : {solve, sweep, ae, burnin, resources}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        fs::path outdir(out_dir);
        fs::create_directories(outdir);
        json cfg = load_config(config_path);
        uint64_t seed = cfg.value("seed", 0ULL);
        if (seed_flag >= 0) seed = static_cast<uint64_t>(seed_flag);
        if (solve->parsed()) return cmd_solve(config_path, outdir, seed);
        if (sweep->parsed()) return cmd_sweep(config_path, outdir, seed, threads);
        if (ae->parsed()) return cmd_ae(config_path, outdir, seed);
        if (burnin->parsed()) return cmd_burnin(config_path, outdir, seed, threads);
        if (resources->parsed()) return cmd_resources(config_path, outdir, seed);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
