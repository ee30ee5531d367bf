// plasthom: command-line front end.
//
//   plasthom <eps|cell|macro|average|korn|ergodic> [--config run.json] [--out dir] [--seed s] [--threads n]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 budget
// exhausted, 1 anything else (I/O).

#include "plasthom/config.hpp"
#include "plasthom/errors.hpp"
#include "plasthom/experiments.hpp"
#include "plasthom/macro.hpp"
#include "plasthom/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace plasthom;

namespace {

std::vector<std::string> mandel_columns(const std::string& prefix, int dim) {
    std::vector<std::string> out;
    for (int i = 0; i < mandel_size(dim); ++i) out.push_back(prefix + "_" + std::to_string(i + 1));
    return out;
}

void append(std::vector<ReportValue>& row, const MandelVector& v) {
    for (int i = 0; i < v.size(); ++i) row.emplace_back(v[i]);
}

double field_l2(const std::vector<MandelVector>& f, const std::vector<double>& vol) {
    double s = 0;
    for (std::size_t k = 0; k < f.size(); ++k) s += vol[k] * f[k].squaredNorm();
    return std::sqrt(s);
}

ReportTable eps_table(const RunConfig& rc) {
    const EpsProblemConfig cfg = rc.eps_config();
    const PlasticTrajectory traj = solve_eps(cfg);
    const P1Space space(cfg.mesh, DofConstraint::DirichletBoundary);
    const auto avg = average_stress(traj, all_elements(traj));
    ReportTable t;
    t.name = "eps";
    t.columns = {"t"};
    for (const auto& c : mandel_columns("avg_stress", rc.dim)) t.columns.push_back(c);
    for (const auto& c : {"norm_u", "norm_e", "norm_p", "norm_sigma", "newton_iters", "residual"}) t.columns.push_back(c);
    for (int m = 0; m < traj.num_steps(); ++m) {
        std::vector<ReportValue> row{traj.times[m]};
        append(row, avg[m].comps());
        row.emplace_back(l2_norm(space, traj.u[m]));
        row.emplace_back(field_l2(traj.e[m], traj.element_volume));
        row.emplace_back(field_l2(traj.p[m], traj.element_volume));
        row.emplace_back(field_l2(traj.sigma[m], traj.element_volume));
        row.emplace_back(std::int64_t(traj.newton_iterations[m]));
        row.emplace_back(traj.residuals[m]);
        t.add_row(std::move(row));
    }
    return t;
}

ReportTable cell_table(const RunConfig& rc) {
    const SigmaResult res = sigma(rc.rve_config(), rc.xi, rc.time_grid());
    ReportTable t;
    t.name = "cell";
    t.columns = {"t"};
    for (const auto& c : mandel_columns("sigma", rc.dim)) t.columns.push_back(c);
    for (const auto& c : mandel_columns("pi", rc.dim)) t.columns.push_back(c);
    t.columns.push_back("sigma_stderr");
    t.columns.push_back("pi_stderr");
    for (std::size_t m = 0; m < res.times.size(); ++m) {
        std::vector<ReportValue> row{res.times[m]};
        append(row, res.sigma[m].comps());
        append(row, res.pi[m].comps());
        row.emplace_back(res.sigma_stderr[m].norm());
        row.emplace_back(res.pi_stderr[m].norm());
        t.add_row(std::move(row));
    }
    return t;
}

ReportTable macro_table(const RunConfig& rc) {
    const MacroConfig cfg = rc.macro_config();
    const EffectiveSolution sol = solve_effective(cfg);
    const P1Space space(cfg.mesh, DofConstraint::DirichletBoundary);
    ReportTable t;
    t.name = "macro";
    t.columns = {"t"};
    for (const auto& c : mandel_columns("avg_sigma", rc.dim)) t.columns.push_back(c);
    for (const auto& c : mandel_columns("avg_pi", rc.dim)) t.columns.push_back(c);
    for (const auto& c : {"norm_u", "newton_iters", "residual"}) t.columns.push_back(c);
    double vol = 0;
    for (double v : sol.element_volume) vol += v;
    for (int m = 0; m < sol.num_steps(); ++m) {
        MandelVector s = MandelVector::Zero(mandel_size(rc.dim)), p = s;
        for (int k = 0; k < sol.num_elements(); ++k) {
            s += sol.element_volume[k] * sol.sigma[m][k];
            p += sol.element_volume[k] * sol.pi[m][k];
        }
        std::vector<ReportValue> row{sol.times[m]};
        append(row, s / vol);
        append(row, p / vol);
        row.emplace_back(l2_norm(space, sol.u[m]));
        row.emplace_back(std::int64_t(sol.newton_iterations[m]));
        row.emplace_back(sol.residuals[m]);
        t.add_row(std::move(row));
    }
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic homogenization of elastoplasticity with kinematic hardening"};
    app.require_subcommand(1, 1);
    std::string config_path, out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "base random seed (overrides the configuration)");
    app.add_option("--threads", threads, "worker threads (overrides the configuration)");
    for (const char* name : {"eps", "cell", "macro", "average", "korn", "ergodic"}) app.add_subcommand(name);
    auto sub = [&](const char* name) { return app.get_subcommand(name); };
    for (const char* name : {"eps", "cell", "macro", "average", "korn", "ergodic"}) sub(name)->fallthrough();
    sub("eps")->description("heterogeneous problem at scale epsilon -> eps.csv");
    sub("cell")->description("effective stress of the RVE along bc.xi -> cell.csv");
    std::optional<int> cell_N, cell_r, cell_M;
    std::optional<double> cell_delta;
    std::string cell_law, cell_xi;
    sub("cell")->add_option("--N", cell_N, "cells per torus side");
    sub("cell")->add_option("--r", cell_r, "grid intervals per cell");
    sub("cell")->add_option("--M", cell_M, "Monte-Carlo samples");
    sub("cell")->add_option("--delta", cell_delta, "regularization parameter");
    sub("cell")->add_option("--law", cell_law, "JSON file with the law")->check(CLI::ExistingFile);
    sub("cell")->add_option("--xi", cell_xi, "strain path CSV (t, Mandel components)")->check(CLI::ExistingFile);
    sub("macro")->description("effective macroscopic problem (FE^2) -> macro.csv");
    sub("average")->description("averaging experiment -> averaging.csv, averaging.svg");
    sub("korn")->description("Korn ratio on the torus -> korn.csv, korn.svg");
    sub("ergodic")->description("ergodic decay -> ergodic.csv, ergodic.svg");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        RunConfig rc = config_path.empty() ? parse_run_config("{}") : load_run_config(config_path);
        if (seed) rc.seed = *seed;
        if (threads) {
            if (*threads < 1) throw ConfigError("--threads must be >= 1");
            rc.threads = *threads;
        }
        if (cmd == "cell") {
            if (cell_N) rc.rve_N = *cell_N;
            if (cell_r) rc.rve_r = *cell_r;
            if (cell_M) rc.rve_M = *cell_M;
            if (cell_delta) rc.delta = *cell_delta;
            if (!cell_law.empty()) rc.law = load_law(cell_law, rc.dim);
            if (!cell_xi.empty()) {
                std::ifstream is(cell_xi);
                rc.xi = StrainPath::read_csv(is, rc.dim);
            }
        }
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) throw std::runtime_error("cannot create output directory '" + out_dir + "': " + ec.message());
        const std::filesystem::path out(out_dir);

        ReportTable table;
        std::string base = cmd;
        bool plot = false;
        if (cmd == "eps") {
            table = eps_table(rc);
        } else if (cmd == "cell") {
            table = cell_table(rc);
        } else if (cmd == "macro") {
            table = macro_table(rc);
        } else if (cmd == "average") {
            const AveragingResult r = run_averaging_experiment(rc.averaging_spec());
            table = r.table;
            base = "averaging";
            plot = true;
            for (std::size_t i = 0; i < r.mean_l2_discrepancy.size(); ++i)
                std::cout << "epsilon " << rc.epsilons[i] << "  mean L2 discrepancy " << r.mean_l2_discrepancy[i] << "\n";
        } else if (cmd == "korn") {
            const KornResult r = run_korn_check(rc.korn_spec());
            table = r.table;
            plot = true;
            std::cout << "max ratio " << r.max_ratio << "  skipped " << r.skipped << "\n";
        } else {
            const ErgodicResult r = run_ergodic_check(rc.ergodic_spec());
            table = r.table;
            plot = true;
            for (double e : r.exponent) std::cout << "fitted exponent " << e << "\n";
        }
        const std::string csv = (out / (base + ".csv")).string();
        emit_report(table, csv, plot ? (out / (base + ".svg")).string() : std::string());
        std::cout << "wrote " << csv << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const BudgetError& e) {
        std::cerr << "budget exhausted: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
