#include "plasthom/experiments.hpp"

#include "plasthom/errors.hpp"
#include "plasthom/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace plasthom {

namespace {

SmallVector point(double a, double b) {
    SmallVector v(2);
    v << a, b;
    return v;
}

std::vector<std::string> component_columns(const std::string& prefix, int dim) {
    std::vector<std::string> out;
    for (int i = 0; i < mandel_size(dim); ++i) out.push_back(prefix + "_" + std::to_string(i + 1));
    return out;
}

}  // namespace

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit_loglog_slope: need two or more points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw ConfigError("fit_loglog_slope: values must be positive");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    if (sxx == 0) throw ConfigError("fit_loglog_slope: x values coincide");
    return sxy / sxx;
}

// ---------------------------------------------------------------- averaging

void AveragingSpec::validate() const {
    if (!law) throw ConfigError("averaging: law is missing");
    const int d = law->dim();
    if (!simplex.empty() && static_cast<int>(simplex.size()) != d + 1)
        throw ConfigError("averaging: simplex needs d+1 vertices");
    if (simplex.empty() && d != 2) throw ConfigError("averaging: the default simplex is two-dimensional");
    if (divisions < 1) throw ConfigError("averaging: divisions must be >= 1");
    if (xi.knots().empty() || xi.dim() != d) throw ConfigError("averaging: strain path missing or of wrong dimension");
    if (epsilons.empty()) throw ConfigError("averaging: no epsilon values");
    for (double e : epsilons)
        if (!(e > 0) || !std::isfinite(e)) throw ConfigError("averaging: epsilon must be positive");
    if (seeds.empty()) throw ConfigError("averaging: no seeds");
    check_time_grid(time_grid);
    if (!(delta > 0)) throw ConfigError("averaging: delta must be positive");
    if (rve_N < 1 || rve_r < 1 || rve_M < 1) throw ConfigError("averaging: invalid RVE size");
}

AveragingResult run_averaging_experiment(const AveragingSpec& spec) {
    spec.validate();
    const int d = spec.law->dim();
    const int k = mandel_size(d);
    const std::vector<SmallVector> T =
        spec.simplex.empty() ? std::vector<SmallVector>{point(0, 0), point(1, 0), point(1, 1)} : spec.simplex;
    const auto mesh = std::make_shared<const SimplicialMesh>(mesh_simplex_divisions(T, spec.divisions));

    RveConfig rve;
    rve.N = spec.rve_N;
    rve.r = spec.rve_r;
    rve.M = spec.rve_M;
    rve.delta = spec.delta;
    rve.flow = spec.flow;
    rve.law = spec.law;
    rve.base_seed = spec.rve_seed;
    rve.threads = spec.threads;
    const SigmaResult ref = sigma(rve, spec.xi, spec.time_grid);

    AveragingResult res;
    res.times = spec.time_grid;
    res.sigma_reference = ref.sigma;
    const int ne = static_cast<int>(spec.epsilons.size()), ns = static_cast<int>(spec.seeds.size());
    const int nt = static_cast<int>(spec.time_grid.size());
    res.average_stress.assign(ne, std::vector<std::vector<SymTensor>>(ns));
    res.discrepancy.assign(ne, std::vector<std::vector<double>>(ns));
    res.l2_discrepancy.assign(ne, std::vector<double>(ns, 0.0));
    res.mean_l2_discrepancy.assign(ne, 0.0);

    parallel_for(ne * ns, spec.threads, [&](int job) {
        const int ie = job / ns, is = job % ns;
        const Realization w = sample_realization(spec.law, spec.seeds[is]);
        EpsProblemConfig cfg;
        cfg.mesh = mesh;
        cfg.medium = shifted(w, -w.shift());
        cfg.epsilon = spec.epsilons[ie];
        cfg.flow = spec.flow;
        cfg.delta = spec.delta;
        cfg.time_grid = spec.time_grid;
        cfg.dirichlet = DirichletData::affine(spec.xi, spec.translation);
        const PlasticTrajectory traj = solve_eps(cfg);
        auto avg = average_stress(traj, all_elements(traj));
        std::vector<double> disc(nt);
        for (int m = 0; m < nt; ++m) disc[m] = (avg[m] - ref.sigma[m]).norm();
        res.l2_discrepancy[ie][is] = l2_time_distance(spec.time_grid, avg, ref.sigma);
        res.average_stress[ie][is] = std::move(avg);
        res.discrepancy[ie][is] = std::move(disc);
    });
    for (int ie = 0; ie < ne; ++ie) {
        double s = 0;
        for (int is = 0; is < ns; ++is) s += res.l2_discrepancy[ie][is];
        res.mean_l2_discrepancy[ie] = s / ns;
    }

    ReportTable& tab = res.table;
    tab.name = "averaging";
    tab.columns = {"experiment", "kind", "epsilon", "seed", "t", "discrepancy", "rve_stderr", "delta", "tolerance"};
    for (const auto& c : component_columns("avg_stress", d)) tab.columns.push_back(c);
    for (const auto& c : component_columns("sigma", d)) tab.columns.push_back(c);
    tab.plot_x = "t";
    tab.plot_y = "discrepancy";
    tab.series_column = "epsilon";
    tab.filter_column = "kind";
    tab.filter_value = "mean_step";
    const double T_end = spec.time_grid.back();
    auto row = [&](const std::string& kind, double eps, const ReportValue& seed, double t, double disc, double se,
                   const MandelVector& avg, const MandelVector& sig) {
        std::vector<ReportValue> r{std::string("averaging"), kind, eps, seed, t, disc, se, spec.delta, spec.tolerance};
        for (int i = 0; i < k; ++i) r.emplace_back(avg.size() ? avg[i] : std::numeric_limits<double>::quiet_NaN());
        for (int i = 0; i < k; ++i) r.emplace_back(sig.size() ? sig[i] : std::numeric_limits<double>::quiet_NaN());
        tab.add_row(std::move(r));
    };
    const MandelVector none;
    for (int ie = 0; ie < ne; ++ie) {
        const double eps = spec.epsilons[ie];
        for (int is = 0; is < ns; ++is) {
            for (int m = 0; m < nt; ++m)
                row("step", eps, spec.seeds[is], spec.time_grid[m], res.discrepancy[ie][is][m],
                    ref.sigma_stderr[m].norm(), res.average_stress[ie][is][m].comps(), ref.sigma[m].comps());
            row("l2", eps, spec.seeds[is], T_end, res.l2_discrepancy[ie][is], 0.0, none, none);
        }
        for (int m = 0; m < nt; ++m) {
            MandelVector mean = MandelVector::Zero(k);
            double dm = 0;
            for (int is = 0; is < ns; ++is) {
                mean += res.average_stress[ie][is][m].comps();
                dm += res.discrepancy[ie][is][m];
            }
            row("mean_step", eps, std::string("all"), spec.time_grid[m], dm / ns, ref.sigma_stderr[m].norm(),
                mean / ns, ref.sigma[m].comps());
        }
        row("mean_l2", eps, std::string("all"), T_end, res.mean_l2_discrepancy[ie], 0.0, none, none);
    }
    return res;
}

// ---------------------------------------------------------------- korn

void KornSpec::validate() const {
    if (N < 1 || r < 1) throw ConfigError("korn: N and r must be >= 1");
    check_dim(dim);
    if (samples < 0) throw ConfigError("korn: sample count must be non-negative");
}

double korn_ratio(const P1Space& space, const Eigen::VectorXd& phi) {
    const int d = space.dim();
    const int ne = space.mesh().num_elements();
    std::vector<SmallMatrix> grads(ne);
    SmallMatrix mean = SmallMatrix::Zero(d, d);
    double vol = 0;
    for (int e = 0; e < ne; ++e) {
        grads[e] = element_gradient(space, phi, e);
        mean += space.volume(e) * grads[e];
        vol += space.volume(e);
    }
    mean /= vol;
    double full = 0, sym = 0;
    for (int e = 0; e < ne; ++e) {
        const SmallMatrix f = grads[e] - mean;
        full += space.volume(e) * f.squaredNorm();
        sym += space.volume(e) * (0.5 * (f + f.transpose())).squaredNorm();
    }
    if (!(sym > 1e-300) || sym <= 1e-28 * full) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(full / sym);
}

KornResult run_korn_check(const KornSpec& spec) {
    spec.validate();
    const int d = spec.dim;
    const auto mesh = std::make_shared<const SimplicialMesh>(mesh_torus(spec.N, spec.r, d));
    const P1Space space(mesh, DofConstraint::None);
    const double L = static_cast<double>(spec.N);
    static const char* families[] = {"nodal", "fourier", "rotational"};

    KornResult res;
    res.ratios.assign(spec.samples, 0.0);
    parallel_for(spec.samples, spec.threads, [&](int s) {
        std::mt19937_64 rng(splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(s) + 1)));
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        const int family = s % 3;
        Eigen::VectorXd phi;
        if (family == 0) {
            Eigen::VectorXd vals(space.num_nodal());
            for (int i = 0; i < vals.size(); ++i) vals[i] = U(rng);
            phi.resize(space.num_nodal());
            for (int v = 0; v < mesh->num_vertices(); ++v)
                for (int i = 0; i < d; ++i) phi[d * v + i] = vals[d * mesh->master(v) + i];
        } else {
            // A few low Fourier modes: phi_i = sum a cos(2 pi k.x / N) + b sin(...), or for the
            // rotational family the curl-type field of scalar potentials.
            struct Mode {
                SmallVector k;
                Eigen::VectorXd a, b;
            };
            std::vector<Mode> modes(4);
            for (auto& m : modes) {
                m.k = SmallVector::Zero(d);
                for (int i = 0; i < d; ++i) m.k[i] = std::round(U(rng) * 2.0);
                if (m.k.norm() == 0) m.k[0] = 1;
                m.a = Eigen::VectorXd(d);
                m.b = Eigen::VectorXd(d);
                for (int i = 0; i < d; ++i) {
                    m.a[i] = U(rng);
                    m.b[i] = U(rng);
                }
            }
            const double w = 2.0 * std::numbers::pi / L;
            const bool rotational = family == 2;
            phi = space.interpolate([&](const SmallVector& x) {
                SmallVector out = SmallVector::Zero(d);
                for (const auto& m : modes) {
                    const double th = w * m.k.dot(x);
                    if (!rotational) {
                        for (int i = 0; i < d; ++i) out[i] += m.a[i] * std::cos(th) + m.b[i] * std::sin(th);
                    } else {
                        // Gradient of the potential psi = a_0 cos + b_0 sin, rotated by 90 degrees in
                        // the (0,1) plane; divergence free.
                        const double dpsi = w * (-m.a[0] * std::sin(th) + m.b[0] * std::cos(th));
                        out[0] += -dpsi * m.k[1];
                        out[1] += dpsi * m.k[0];
                    }
                }
                return out;
            });
        }
        res.ratios[s] = korn_ratio(space, phi);
    });

    ReportTable& tab = res.table;
    tab.name = "korn";
    tab.columns = {"experiment", "N", "r", "dim", "seed", "sample", "family", "ratio", "bound", "tolerance"};
    tab.plot_x = "sample";
    tab.plot_y = "ratio";
    tab.series_column = "family";
    for (int s = 0; s < spec.samples; ++s) {
        const double q = res.ratios[s];
        if (std::isnan(q)) {
            ++res.skipped;
        } else {
            res.max_ratio = std::max(res.max_ratio, q);
        }
        tab.add_row({std::string("korn"), std::int64_t(spec.N), std::int64_t(spec.r), std::int64_t(d), spec.seed,
                     std::int64_t(s), std::string(families[s % 3]), q, 2.0, spec.tolerance});
    }
    return res;
}

// ---------------------------------------------------------------- ergodic

void ErgodicSpec::validate() const {
    if (!law) throw ConfigError("ergodic: law is missing");
    if (box_sizes.size() < 2) throw ConfigError("ergodic: need at least two box sizes");
    for (double L : box_sizes)
        if (!(L >= 1.0)) throw ConfigError("ergodic: box sizes must be >= 1");
    if (seeds < 1) throw ConfigError("ergodic: need at least one seed");
}

ErgodicResult run_ergodic_check(const ErgodicSpec& spec) {
    spec.validate();
    std::vector<ErgodicStatistic> stats = spec.statistics;
    if (stats.empty()) {
        stats.push_back({"E", [](const CellParameters& p) { return p.E; }, spec.law->E().mean()});
        stats.push_back(
            {"yield_stress", [](const CellParameters& p) { return p.yield_stress; }, spec.law->yield_stress().mean()});
    }
    const int nstat = static_cast<int>(stats.size()), nL = static_cast<int>(spec.box_sizes.size());
    // [stat][L][seed]
    std::vector<std::vector<std::vector<double>>> values(
        nstat, std::vector<std::vector<double>>(nL, std::vector<double>(spec.seeds)));
    std::vector<std::uint64_t> seeds(spec.seeds);
    for (int s = 0; s < spec.seeds; ++s) seeds[s] = sample_seed(spec.base_seed, s);
    parallel_for(spec.seeds, spec.threads, [&](int s) {
        const Realization w = sample_realization(spec.law, seeds[s]);
        for (int i = 0; i < nstat; ++i)
            for (int j = 0; j < nL; ++j) values[i][j][s] = ergodic_average_parameters(w, stats[i].g, spec.box_sizes[j]);
    });

    ErgodicResult res;
    ReportTable& tab = res.table;
    tab.name = "ergodic";
    tab.columns = {"experiment", "kind", "statistic", "L", "seed", "value", "expectation", "error", "tolerance"};
    tab.plot_x = "L";
    tab.plot_y = "error";
    tab.series_column = "statistic";
    tab.filter_column = "kind";
    tab.filter_value = "rms";
    tab.log_x = tab.log_y = true;
    res.rms_error.assign(nstat, std::vector<double>(nL, 0.0));
    res.exponent.assign(nstat, std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < nstat; ++i) {
        for (int j = 0; j < nL; ++j) {
            double sq = 0;
            for (int s = 0; s < spec.seeds; ++s) {
                const double err = std::abs(values[i][j][s] - stats[i].expectation);
                sq += err * err;
                tab.add_row({std::string("ergodic"), std::string("sample"), stats[i].name, spec.box_sizes[j], seeds[s],
                             values[i][j][s], stats[i].expectation, err, spec.tolerance});
            }
            res.rms_error[i][j] = std::sqrt(sq / spec.seeds);
            tab.add_row({std::string("ergodic"), std::string("rms"), stats[i].name, spec.box_sizes[j],
                         std::string("all"), std::numeric_limits<double>::quiet_NaN(), stats[i].expectation,
                         res.rms_error[i][j], spec.tolerance});
        }
        // Errors at rounding level (degenerate statistic) carry no decay rate.
        bool resolved = true;
        for (double e : res.rms_error[i]) resolved = resolved && e > 1e-12 * (1.0 + std::abs(stats[i].expectation));
        if (resolved) res.exponent[i] = fit_loglog_slope(spec.box_sizes, res.rms_error[i]);
        tab.add_row({std::string("ergodic"), std::string("exponent"), stats[i].name, std::string("fit"),
                     std::string("all"), res.exponent[i], -0.5 * spec.law->dim(),
                     std::abs(res.exponent[i] + 0.5 * spec.law->dim()), spec.tolerance});
    }
    return res;
}

}  // namespace plasthom
