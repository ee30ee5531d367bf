#include "plasthom/macro.hpp"

#include "plasthom/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace plasthom {

namespace {

using Clock = std::chrono::steady_clock;

// One worker's copies of the M sample problems (the solvers hold mutable
// factorization caches, so workers never share them).
using SampleSet = std::vector<std::unique_ptr<CellProblem>>;

struct ElementResponse {
    MandelVector sigma, pi;
    MandelMatrix tangent;
    std::vector<CellState> states;
};

double finite_difference_step(const MandelVector& xi) { return 1e-6 * xi.norm() + 1e-10; }

}  // namespace

void MacroConfig::validate() const {
    if (!mesh) throw ConfigError("macro configuration has no mesh");
    if (mesh->is_periodic()) throw ConfigError("the macro problem needs a bounded (non-periodic) mesh");
    rve.validate();
    if (rve.law->dim() != mesh->dim) throw ConfigError("RVE law and macro mesh differ in dimension");
    check_time_grid(time_grid);
    if (time_grid.size() < 2) throw ConfigError("time grid needs at least one step");
    if (!(rtol > 0.0) || !(accept_rtol >= rtol)) throw ConfigError("macro tolerances must satisfy 0 < rtol <= accept_rtol");
    if (max_iterations < 1) throw ConfigError("macro Newton needs at least one iteration");
    if (max_seconds < 0.0) throw ConfigError("wall-clock budget must be non-negative");
}

MandelVector EffectiveSolution::sigma_increment(int m, int k) const {
    if (m < 1 || m >= num_steps() || k < 0 || k >= num_elements()) throw ConfigError("step or element out of range");
    return sigma[m][k] - sigma[m - 1][k];
}

EffectiveSolution solve_effective(const MacroConfig& cfg) {
    cfg.validate();
    const auto start = Clock::now();
    const SimplicialMesh& mesh = *cfg.mesh;
    if (mesh.num_elements() > cfg.max_elements)
        throw BudgetError("macro mesh has " + std::to_string(mesh.num_elements()) + " elements, budget is " +
                          std::to_string(cfg.max_elements));
    check_mesh(mesh, 1e3);
    const int d = mesh.dim;
    const int ne = mesh.num_elements();
    const int ncomp = mandel_size(d);
    const int M = cfg.rve.M;

    for (int v = 0; v < mesh.num_vertices(); ++v)
        if (mesh.boundary[v] && cfg.dirichlet.evaluate(0.0, mesh.vertices[v]).cwiseAbs().maxCoeff() > 1e-14)
            throw ConfigError("boundary data must vanish at t = 0");
    if (cfg.load)
        for (int k = 0; k < ne; ++k)
            if (cfg.load(0.0, mesh.barycenter(k)).cwiseAbs().maxCoeff() > 1e-14)
                throw ConfigError("load must vanish at t = 0");

    const P1Space space(cfg.mesh, DofConstraint::DirichletBoundary);
    const int workers = std::max(1, std::min(cfg.threads > 0 ? cfg.threads : 1, ne));

    EffectiveSolution sol;
    sol.dim = d;
    sol.times = {0.0};
    sol.seeds.resize(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) sol.seeds[i] = sample_seed(cfg.rve.base_seed, i);
    std::vector<SampleSet> samples(static_cast<std::size_t>(workers));
    for (auto& set : samples)
        for (int i = 0; i < M; ++i)
            set.push_back(std::make_unique<CellProblem>(PeriodicMedium(sample_realization(cfg.rve.law, sol.seeds[i]), cfg.rve.N),
                                                        cfg.rve.r, cfg.rve.flow, cfg.rve.delta, cfg.rve.newton));
    sol.element_volume.resize(static_cast<std::size_t>(ne));
    for (int k = 0; k < ne; ++k) sol.element_volume[k] = space.volume(k);
    sol.cells.resize(static_cast<std::size_t>(ne));
    for (int k = 0; k < ne; ++k)
        for (int i = 0; i < M; ++i) sol.cells[k].push_back(samples[0][i]->initial_state());

    const std::vector<MandelVector> zero(static_cast<std::size_t>(ne), MandelVector::Zero(ncomp));
    auto translate = [&](Eigen::VectorXd u, double t) {
        if (cfg.dirichlet.translation) {
            const SmallVector a = cfg.dirichlet.translation(t);
            for (int v = 0; v < mesh.num_vertices(); ++v) u.segment(d * v, d) += a;
        }
        return u;
    };
    auto lifting = [&](double t) {
        return space.interpolate([&](const SmallVector& x) {
            return cfg.dirichlet.field ? cfg.dirichlet.field(t, x) : SmallVector(SmallVector::Zero(d));
        });
    };
    auto check_clock = [&](int step) {
        if (cfg.max_seconds <= 0.0) return;
        const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
        if (elapsed > cfg.max_seconds) {
            std::ostringstream msg;
            msg << "wall-clock budget of " << cfg.max_seconds << " s exhausted at step " << step << " after "
                << sol.num_steps() - 1 << " completed steps";
            throw PartialResultError(msg.str(), sol);
        }
    };

    sol.u.push_back(translate(Eigen::VectorXd::Zero(space.num_nodal()), 0.0));
    sol.strain.push_back(zero);
    sol.sigma.push_back(zero);
    sol.pi.push_back(zero);
    sol.newton_iterations.push_back(0);
    sol.residuals.push_back(0.0);
    sol.residual_history.push_back({});

    Eigen::VectorXd u_int = Eigen::VectorXd::Zero(space.num_nodal());
    Eigen::VectorXd lift_prev = lifting(0.0);
    LinearSolver linear;

    for (std::size_t m = 1; m < cfg.time_grid.size(); ++m) {
        const int step = static_cast<int>(m);
        const double t = cfg.time_grid[m];
        const double dt = t - cfg.time_grid[m - 1];
        const Eigen::VectorXd lift = lifting(t);
        Eigen::VectorXd f = Eigen::VectorXd::Zero(space.num_free());
        if (cfg.load) f = assemble_load(space, [&](const SmallVector& x) { return cfg.load(t, x); });
        const auto& prev = sol.cells;

        std::vector<ElementResponse> resp(static_cast<std::size_t>(ne));
        double reference = 0.0;
        auto evaluate = [&](const Eigen::VectorXd& u, std::vector<ElementResponse>& out) -> Eigen::VectorXd {
            std::vector<MandelVector> strains(static_cast<std::size_t>(ne));
            for (int k = 0; k < ne; ++k) strains[k] = space.strain_matrix(k) * space.element_values(u, k);
            parallel_for(workers, workers, [&](int w) {
                for (int k = w; k < ne; k += workers) {
                    check_clock(step);
                    ElementResponse& r = out[k];
                    const MandelVector& xi = strains[k];
                    const double h = finite_difference_step(xi);
                    r.sigma = MandelVector::Zero(ncomp);
                    r.pi = MandelVector::Zero(ncomp);
                    r.tangent = MandelMatrix::Zero(ncomp, ncomp);
                    r.states.resize(static_cast<std::size_t>(M));
                    for (int i = 0; i < M; ++i) {
                        const CellProblem& cell = *samples[w][i];
                        try {
                            r.states[i] = cell.advance(prev[k][i], SymTensor(d, xi), dt, step);
                            const MandelVector z = cell.average_z(r.states[i]);
                            r.sigma += z;
                            r.pi += cell.average_p(r.states[i]);
                            for (int j = 0; j < ncomp; ++j) {
                                MandelVector probe = xi;
                                probe[j] += h;
                                // advance is pure: probes leave prev[k][i] untouched.
                                const CellState s = cell.advance(prev[k][i], SymTensor(d, probe), dt, step);
                                r.tangent.col(j) += (cell.average_z(s) - z) / h;
                            }
                        } catch (const NumericalError& e) {
                            throw NumericalError(std::string(e.what()) + " [macro element " + std::to_string(k) +
                                                     ", sample seed " + std::to_string(sol.seeds[i]) + "]",
                                                 step, e.residual());
                        }
                    }
                    r.sigma /= M;
                    r.pi /= M;
                    r.tangent /= M;
                    r.tangent = (0.5 * (r.tangent + r.tangent.transpose())).eval();
                }
            });
            std::vector<MandelVector> sig(static_cast<std::size_t>(ne));
            double ref2 = 0.0;
            for (int k = 0; k < ne; ++k) {
                sig[k] = out[k].sigma;
                ref2 += (space.volume(k) * space.strain_matrix(k).transpose() * sig[k]).squaredNorm();
            }
            reference = std::sqrt(ref2) + f.norm();
            return assemble_internal(space, sig) - f;
        };
        auto relative = [&](double n) { return reference > 0.0 ? n / reference : n; };

        const Eigen::VectorXd predictor = u_int + (lift - lift_prev);
        Eigen::VectorXd u = space.expand(space.restrict_free(predictor), lift);
        Eigen::VectorXd r = evaluate(u, resp);
        double rnorm = r.norm();
        std::vector<double> history{relative(rnorm)};
        int it = 0;
        while (relative(rnorm) > cfg.rtol && it < cfg.max_iterations && space.num_free() > 0) {
            check_clock(step);
            ++it;
            std::vector<MandelMatrix> tangents(static_cast<std::size_t>(ne));
            for (int k = 0; k < ne; ++k) tangents[k] = resp[k].tangent;
            Eigen::VectorXd du;
            try {
                du = linear.solve(assemble_stiffness(space, tangents), -r);
            } catch (const NumericalError& e) {
                throw NumericalError(std::string("macro tangent solve failed: ") + e.what(), step, relative(rnorm));
            }
            const Eigen::VectorXd free0 = space.restrict_free(u);
            bool accepted = false;
            double lambda = 1.0;
            for (int ls = 0; ls < 9; ++ls, lambda *= 0.5) {
                std::vector<ElementResponse> trial(static_cast<std::size_t>(ne));
                const Eigen::VectorXd u_new = space.expand(free0 + lambda * du, u);
                const Eigen::VectorXd r_new = evaluate(u_new, trial);
                if (r_new.norm() < rnorm) {
                    u = u_new;
                    r = r_new;
                    rnorm = r.norm();
                    resp = std::move(trial);
                    accepted = true;
                    break;
                }
            }
            history.push_back(relative(rnorm));
            if (!accepted) break;
        }
        const double rel = relative(rnorm);
        if (!(rel <= cfg.accept_rtol)) {
            // Element-wise worst residual contributions.
            std::vector<std::pair<double, int>> worst;
            for (int k = 0; k < ne; ++k) {
                double acc = 0.0;
                for (int g : space.element_dofs(k))
                    if (g >= 0) acc += r[g] * r[g];
                worst.emplace_back(std::sqrt(acc), k);
            }
            std::sort(worst.begin(), worst.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
            std::ostringstream msg;
            msg << "macro Newton did not converge; worst elements:";
            for (std::size_t i = 0; i < std::min<std::size_t>(3, worst.size()); ++i)
                msg << ' ' << worst[i].second << " (" << worst[i].first << ")";
            throw NumericalError(msg.str(), step, rel);
        }

        std::vector<MandelVector> strain(static_cast<std::size_t>(ne)), sig(static_cast<std::size_t>(ne)),
            pi(static_cast<std::size_t>(ne));
        for (int k = 0; k < ne; ++k) {
            strain[k] = space.strain_matrix(k) * space.element_values(u, k);
            sig[k] = resp[k].sigma;
            pi[k] = resp[k].pi;
            sol.cells[k] = std::move(resp[k].states);
        }
        sol.committed_advances += static_cast<long long>(ne) * M;
        u_int = u;
        lift_prev = lift;
        sol.times.push_back(t);
        sol.u.push_back(translate(u, t));
        sol.strain.push_back(std::move(strain));
        sol.sigma.push_back(std::move(sig));
        sol.pi.push_back(std::move(pi));
        sol.newton_iterations.push_back(it);
        sol.residuals.push_back(rel);
        sol.residual_history.push_back(std::move(history));
    }
    return sol;
}

double max_weak_residual(const EffectiveSolution& sol, const MacroConfig& cfg) {
    if (!cfg.mesh) throw ConfigError("macro configuration has no mesh");
    if (sol.num_elements() != cfg.mesh->num_elements()) throw ConfigError("solution does not belong to this mesh");
    const P1Space space(cfg.mesh, DofConstraint::DirichletBoundary);
    const int ne = sol.num_elements();
    double worst = 0.0;
    for (int m = 1; m < sol.num_steps(); ++m) {
        const double t = sol.times[m];
        Eigen::VectorXd f = Eigen::VectorXd::Zero(space.num_free());
        if (cfg.load) f = assemble_load(space, [&](const SmallVector& x) { return cfg.load(t, x); });
        double ref2 = 0.0;
        for (int k = 0; k < ne; ++k)
            ref2 += (space.volume(k) * space.strain_matrix(k).transpose() * sol.sigma[m][k]).squaredNorm();
        const double reference = std::sqrt(ref2) + f.norm();
        // One entry per free basis function: int Sigma : grad phi_i - int f . phi_i.
        const Eigen::VectorXd r = assemble_internal(space, sol.sigma[m]) - f;
        if (r.size() == 0) continue;
        const double res = r.cwiseAbs().maxCoeff();
        worst = std::max(worst, reference > 0.0 ? res / reference : res);
    }
    return worst;
}

}  // namespace plasthom
