#include "plasthom/cell_sigma.hpp"

#include "plasthom/errors.hpp"
#include "plasthom/parallel.hpp"

#include <cmath>

namespace plasthom {

void RveConfig::validate() const {
    if (N < 1 || r < 1) throw ConfigError("RVE needs N >= 1 and r >= 1");
    if (M < 1) throw ConfigError("RVE needs at least one Monte-Carlo sample");
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    if (!law) throw ConfigError("RVE configuration has no probability law");
}

std::uint64_t sample_seed(std::uint64_t base_seed, int i) {
    return splitmix64(base_seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i + 1));
}

CellProblem::CellProblem(const PeriodicMedium& medium, int r, FlowKind flow, double delta, NewtonOptions newton) {
    const int d = medium.base().dim();
    mesh_ = std::make_shared<SimplicialMesh>(mesh_torus(medium.N(), r, d));
    materials_.reserve(static_cast<std::size_t>(mesh_->num_elements()));
    const ProbabilityLaw& law = medium.base().law();
    for (int k = 0; k < mesh_->num_elements(); ++k) {
        MaterialPoint m = medium.material_at(mesh_->barycenter(k));
        m.validate(law.gamma() * (1.0 - 1e-12), law.beta() * (1.0 - 1e-12));
        materials_.push_back(std::move(m));
    }
    init(r, flow, delta, newton);
}

CellProblem::CellProblem(const MaterialPoint& material, int N, int r, FlowKind flow, double delta,
                         NewtonOptions newton) {
    material.validate(1e-12, 1e-12);
    mesh_ = std::make_shared<SimplicialMesh>(mesh_torus(N, r, material.dim()));
    materials_.assign(static_cast<std::size_t>(mesh_->num_elements()), material);
    init(r, flow, delta, newton);
}

CellProblem::CellProblem(int N, int r, int dim, const std::function<MaterialPoint(const SmallVector&)>& material_at,
                         FlowKind flow, double delta, NewtonOptions newton) {
    mesh_ = std::make_shared<SimplicialMesh>(mesh_torus(N, r, dim));
    materials_.reserve(static_cast<std::size_t>(mesh_->num_elements()));
    for (int k = 0; k < mesh_->num_elements(); ++k) {
        MaterialPoint m = material_at(mesh_->barycenter(k));
        if (m.dim() != dim) throw ConfigError("material has the wrong dimension");
        m.validate(1e-12, 1e-12);
        materials_.push_back(std::move(m));
    }
    init(r, flow, delta, newton);
}

void CellProblem::init(int, FlowKind flow, double delta, NewtonOptions newton) {
    space_ = std::make_unique<P1Space>(mesh_, DofConstraint::PinFirstVertex);
    std::vector<LocalLaw> laws;
    laws.reserve(materials_.size());
    for (const auto& m : materials_) laws.emplace_back(m, flow, delta);
    solver_ = std::make_unique<EquilibriumSolver>(*space_, std::move(laws), newton);
    volume_ = 0.0;
    for (int k = 0; k < mesh_->num_elements(); ++k) volume_ += space_->volume(k);
}

CellState CellProblem::initial_state() const {
    const int ne = mesh_->num_elements();
    const MandelVector zero = MandelVector::Zero(mandel_size(dim()));
    CellState s;
    s.phi = Eigen::VectorXd::Zero(space_->num_nodal());
    s.p.assign(static_cast<std::size_t>(ne), zero);
    s.z.assign(static_cast<std::size_t>(ne), zero);
    return s;
}

CellState CellProblem::advance(const CellState& prev, const SymTensor& xi, double dt, int step) const {
    if (xi.dim() != dim()) throw ConfigError("macroscopic strain has the wrong dimension");
    StepState st = solver_->solve(prev.phi, xi.comps(), prev.p, dt, Eigen::VectorXd(), step);
    CellState s;
    s.phi = std::move(st.u);
    s.p = std::move(st.p);
    s.z = std::move(st.sigma);
    s.iterations = st.iterations;
    s.residual = st.residual;
    return s;
}

MandelVector CellProblem::average_z(const CellState& s) const {
    MandelVector acc = MandelVector::Zero(mandel_size(dim()));
    for (int k = 0; k < mesh_->num_elements(); ++k) acc += space_->volume(k) * s.z[k];
    return acc / volume_;
}

MandelVector CellProblem::average_p(const CellState& s) const {
    MandelVector acc = MandelVector::Zero(mandel_size(dim()));
    for (int k = 0; k < mesh_->num_elements(); ++k) acc += space_->volume(k) * s.p[k];
    return acc / volume_;
}

std::vector<SmallMatrix> CellProblem::corrector_gradients(const CellState& s) const {
    std::vector<SmallMatrix> out(static_cast<std::size_t>(mesh_->num_elements()));
    for (int k = 0; k < mesh_->num_elements(); ++k) out[k] = element_gradient(*space_, s.phi, k);
    return out;
}

Eigen::VectorXd CellProblem::corrector(const CellState& s) const {
    Eigen::VectorXd phi = s.phi;
    space_->remove_mean(phi);
    return phi;
}

CellTrajectory solve_cell(const CellProblem& problem, const StrainPath& xi, const std::vector<double>& time_grid) {
    check_time_grid(time_grid);
    if (xi.dim() != problem.dim()) throw ConfigError("strain path and cell problem differ in dimension");
    CellTrajectory traj;
    traj.dim = problem.dim();
    traj.times = time_grid;
    const int ne = problem.mesh().num_elements();
    traj.element_volume.resize(static_cast<std::size_t>(ne));
    for (int k = 0; k < ne; ++k) traj.element_volume[k] = problem.space().volume(k);

    CellState s = problem.initial_state();
    auto record = [&](const SymTensor& x) {
        traj.xi.push_back(x);
        traj.p.push_back(s.p);
        traj.z.push_back(s.z);
        traj.v.push_back(problem.corrector_gradients(s));
        traj.phi.push_back(problem.corrector(s));
        traj.newton_iterations.push_back(s.iterations);
        traj.residuals.push_back(s.residual);
    };
    record(xi.at(0.0));
    for (std::size_t m = 1; m < time_grid.size(); ++m) {
        const SymTensor x = xi.at(time_grid[m]);
        s = problem.advance(s, x, time_grid[m] - time_grid[m - 1], static_cast<int>(m));
        record(x);
    }
    return traj;
}

CellTrajectory solve_cell(const PeriodicMedium& medium, const StrainPath& xi, const RveConfig& cfg,
                          const std::vector<double>& time_grid) {
    cfg.validate();
    CellProblem problem(medium, cfg.r, cfg.flow, cfg.delta, cfg.newton);
    return solve_cell(problem, xi, time_grid);
}

CellInvariants check_invariants(const CellProblem& problem, const CellTrajectory& traj) {
    CellInvariants inv;
    const SimplicialMesh& mesh = problem.mesh();
    const int d = mesh.dim;
    const int ne = mesh.num_elements();
    P1Space full(problem.space().mesh_ptr(), DofConstraint::None);

    // |grad psi|_L2 for the vector hat function of each free dof.
    Eigen::VectorXd basis_norm2 = Eigen::VectorXd::Zero(full.num_free());
    for (int k = 0; k < ne; ++k) {
        const BarycentricGradients& G = full.gradients(k);
        for (int a = 0; a <= d; ++a)
            for (int i = 0; i < d; ++i)
                basis_norm2[full.dof(mesh.simplices[k][a], i)] += full.volume(k) * G.row(a).squaredNorm();
    }

    const std::size_t ns = traj.times.size();
    for (std::size_t m = 0; m < ns; ++m) {
        double zl2 = 0.0;
        SmallMatrix vmean = SmallMatrix::Zero(d, d);
        double vol = 0.0;
        for (int k = 0; k < ne; ++k) {
            const MandelVector& z = traj.z[m][k];
            const MandelVector& p = traj.p[m][k];
            const SmallMatrix& v = traj.v[m][k];
            const MandelVector vs = symmetrize(v).comps();
            const MandelVector lhs = problem.materials()[k].compliance.matrix() * z;
            const double scale = traj.xi[m].norm() + v.norm() + p.norm() + 1.0;
            inv.closure = std::max(inv.closure, (lhs - traj.xi[m].comps() - vs + p).norm() / scale);
            const SmallMatrix zm = SymTensor(d, z).to_matrix();
            inv.symmetry = std::max(inv.symmetry, (zm - zm.transpose()).cwiseAbs().maxCoeff());
            zl2 += traj.element_volume[k] * z.squaredNorm();
            vmean += traj.element_volume[k] * v;
            vol += traj.element_volume[k];
            if (m == 0) inv.initial_stress = std::max(inv.initial_stress, z.norm());
        }
        inv.mean_gradient = std::max(inv.mean_gradient, (vmean / vol).cwiseAbs().maxCoeff());
        zl2 = std::sqrt(zl2);
        if (zl2 > 0.0) {
            const Eigen::VectorXd r = assemble_internal(full, traj.z[m]);
            for (int i = 0; i < full.num_free(); ++i)
                inv.solenoidal = std::max(inv.solenoidal, std::abs(r[i]) / (zl2 * std::sqrt(basis_norm2[i])));
        }
        if (m > 0) {
            double dot = 0.0, dvl2 = 0.0;
            for (int k = 0; k < ne; ++k) {
                const SmallMatrix dv = traj.v[m][k] - traj.v[m - 1][k];
                const SmallMatrix zm = SymTensor(d, traj.z[m][k]).to_matrix();
                dot += traj.element_volume[k] * (zm.cwiseProduct(dv)).sum();
                dvl2 += traj.element_volume[k] * dv.squaredNorm();
            }
            dvl2 = std::sqrt(dvl2);
            if (zl2 > 0.0 && dvl2 > 0.0) inv.orthogonality = std::max(inv.orthogonality, std::abs(dot) / (zl2 * dvl2));
        }
    }
    return inv;
}

CellNorms cell_norms(const CellTrajectory& traj) {
    const std::size_t ns = traj.times.size();
    const std::size_t ne = traj.element_volume.size();
    double vol = 0.0;
    for (double v : traj.element_volume) vol += v;
    std::vector<double> sp(ns, 0.0), dsp(ns, 0.0), sz(ns, 0.0), dsz(ns, 0.0), sv(ns, 0.0), dsv(ns, 0.0);
    for (std::size_t m = 0; m < ns; ++m) {
        for (std::size_t k = 0; k < ne; ++k) {
            const double w = traj.element_volume[k] / vol;
            sp[m] += w * traj.p[m][k].squaredNorm();
            sz[m] += w * traj.z[m][k].squaredNorm();
            sv[m] += w * traj.v[m][k].squaredNorm();
            if (m > 0) {
                dsp[m] += w * (traj.p[m][k] - traj.p[m - 1][k]).squaredNorm();
                dsz[m] += w * (traj.z[m][k] - traj.z[m - 1][k]).squaredNorm();
                dsv[m] += w * (traj.v[m][k] - traj.v[m - 1][k]).squaredNorm();
            }
        }
    }
    CellNorms n;
    n.p = discrete_h1_norm(traj.times, sp, dsp);
    n.z = discrete_h1_norm(traj.times, sz, dsz);
    n.v = discrete_h1_norm(traj.times, sv, dsv);
    return n;
}

SigmaResult sigma(const RveConfig& cfg, const StrainPath& xi, const std::vector<double>& time_grid) {
    cfg.validate();
    check_time_grid(time_grid);
    if (xi.dim() != cfg.law->dim()) throw ConfigError("strain path and law differ in dimension");
    const int M = cfg.M;
    const std::size_t ns = time_grid.size();
    SigmaResult res;
    res.times = time_grid;
    res.N = cfg.N;
    res.r = cfg.r;
    res.M = M;
    res.delta = cfg.delta;
    res.seeds.resize(static_cast<std::size_t>(M));
    res.sample_sigma.resize(static_cast<std::size_t>(M));
    res.sample_pi.resize(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) res.seeds[i] = sample_seed(cfg.base_seed, i);

    parallel_for(M, cfg.threads, [&](int i) {
        const std::uint64_t seed = res.seeds[i];
        try {
            PeriodicMedium medium(sample_realization(cfg.law, seed), cfg.N);
            CellProblem problem(medium, cfg.r, cfg.flow, cfg.delta, cfg.newton);
            CellState s = problem.initial_state();
            auto& zs = res.sample_sigma[i];
            auto& ps = res.sample_pi[i];
            zs.push_back(problem.average_z(s));
            ps.push_back(problem.average_p(s));
            for (std::size_t m = 1; m < ns; ++m) {
                s = problem.advance(s, xi.at(time_grid[m]), time_grid[m] - time_grid[m - 1], static_cast<int>(m));
                zs.push_back(problem.average_z(s));
                ps.push_back(problem.average_p(s));
            }
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " [sample seed " + std::to_string(seed) + "]", e.step(),
                                 e.residual());
        }
    });

    const int k = mandel_size(xi.dim());
    for (std::size_t m = 0; m < ns; ++m) {
        MandelVector ms = MandelVector::Zero(k), mp = MandelVector::Zero(k);
        for (int i = 0; i < M; ++i) {
            ms += res.sample_sigma[i][m];
            mp += res.sample_pi[i][m];
        }
        ms /= M;
        mp /= M;
        MandelVector vs = MandelVector::Zero(k), vp = MandelVector::Zero(k);
        if (M > 1) {
            for (int i = 0; i < M; ++i) {
                vs += (res.sample_sigma[i][m] - ms).cwiseAbs2();
                vp += (res.sample_pi[i][m] - mp).cwiseAbs2();
            }
            vs = (vs / ((M - 1.0) * M)).cwiseSqrt();
            vp = (vp / ((M - 1.0) * M)).cwiseSqrt();
        }
        res.sigma.emplace_back(xi.dim(), ms);
        res.pi.emplace_back(xi.dim(), mp);
        res.sigma_stderr.push_back(vs);
        res.pi_stderr.push_back(vp);
    }
    return res;
}

double causality_check(const RveConfig& cfg, const StrainPath& xi1, const StrainPath& xi2,
                       const std::vector<double>& time_grid, double t_star) {
    const SigmaResult a = sigma(cfg, xi1, time_grid);
    const SigmaResult b = sigma(cfg, xi2, time_grid);
    double dev = 0.0;
    for (std::size_t m = 0; m < time_grid.size() && time_grid[m] <= t_star; ++m)
        dev = std::max(dev, (a.sigma[m] - b.sigma[m]).norm());
    return dev;
}

StrainPath unit_perturbation(int dim, double T) {
    check_dim(dim);
    const int k = mandel_size(dim);
    const MandelVector e = MandelVector::Ones(k) / std::sqrt(static_cast<double>(k));
    const double h1 = std::sqrt(T / 3.0 + 1.0 / T);
    return StrainPath::linear(SymTensor(dim, e / h1), T);
}

double continuity_probe(const RveConfig& cfg, const StrainPath& xi, double eta, const std::vector<double>& time_grid) {
    if (eta < 0.0) throw ConfigError("perturbation size must be non-negative");
    if (eta == 0.0) return 0.0;
    const StrainPath zeta = unit_perturbation(xi.dim(), xi.end_time());
    const SigmaResult base = sigma(cfg, xi, time_grid);
    const SigmaResult pert = sigma(cfg, combine(xi, 1.0, zeta, eta), time_grid);
    return l2_time_distance(time_grid, pert.sigma, base.sigma);
}

double l2_time_distance(const std::vector<double>& times, const std::vector<SymTensor>& a,
                        const std::vector<SymTensor>& b) {
    if (a.size() != times.size() || b.size() != times.size()) throw ConfigError("series length mismatch");
    double acc = 0.0;
    for (std::size_t m = 1; m < times.size(); ++m) acc += (times[m] - times[m - 1]) * (a[m] - b[m]).comps().squaredNorm();
    return std::sqrt(acc);
}

}  // namespace plasthom
