#include "plasthom/eps_solver.hpp"

#include "plasthom/errors.hpp"

#include <cmath>

namespace plasthom {

namespace {

double sq_l2(const PlasticTrajectory& traj, const std::vector<MandelVector>& field) {
    double s = 0.0;
    for (int k = 0; k < traj.num_elements(); ++k) s += traj.element_volume[k] * field[k].squaredNorm();
    return s;
}

double sq_l2_diff(const PlasticTrajectory& traj, const std::vector<MandelVector>& a,
                  const std::vector<MandelVector>& b) {
    double s = 0.0;
    for (int k = 0; k < traj.num_elements(); ++k) s += traj.element_volume[k] * (a[k] - b[k]).squaredNorm();
    return s;
}

Eigen::VectorXd boundary_lifting(const P1Space& space, const DirichletData& data, double t) {
    if (!data.field) return Eigen::VectorXd::Zero(space.num_nodal());
    return space.interpolate([&](const SmallVector& x) { return data.field(t, x); });
}

std::vector<SymTensor> weighted_average(const PlasticTrajectory& traj,
                                        const std::vector<std::vector<MandelVector>>& field,
                                        const std::vector<int>& region) {
    if (region.empty()) throw ConfigError("averaging region is empty");
    double vol = 0.0;
    for (int k : region) {
        if (k < 0 || k >= traj.num_elements()) throw ConfigError("averaging region has an invalid element");
        vol += traj.element_volume[k];
    }
    std::vector<SymTensor> out;
    out.reserve(field.size());
    const int ncomp = mandel_size(traj.dim);
    for (const auto& step : field) {
        MandelVector acc = MandelVector::Zero(ncomp);
        for (int k : region) acc += traj.element_volume[k] * step[k];
        out.emplace_back(traj.dim, acc / vol);
    }
    return out;
}

}  // namespace

DirichletData DirichletData::affine(const StrainPath& xi, std::function<SmallVector(double t)> a) {
    DirichletData d;
    d.field = [xi](double t, const SmallVector& x) -> SmallVector { return xi.at(t).to_matrix() * x; };
    d.translation = std::move(a);
    return d;
}

SmallVector DirichletData::evaluate(double t, const SmallVector& x) const {
    SmallVector v = field ? field(t, x) : SmallVector(SmallVector::Zero(x.size()));
    if (translation) v += translation(t);
    return v;
}

std::vector<MaterialPoint> element_materials(const EpsProblemConfig& config) {
    if (!config.mesh) throw ConfigError("configuration has no mesh");
    const SimplicialMesh& mesh = *config.mesh;
    if (!config.element_materials.empty()) {
        if (static_cast<int>(config.element_materials.size()) != mesh.num_elements())
            throw ConfigError("one material per element required");
        for (const auto& m : config.element_materials) {
            if (m.dim() != mesh.dim) throw ConfigError("material has the wrong dimension");
            m.validate(1e-12, 1e-12);
        }
        return config.element_materials;
    }
    if (!config.medium) throw ConfigError("configuration has neither a medium nor element materials");
    if (config.medium->dim() != mesh.dim) throw ConfigError("medium and mesh differ in dimension");
    if (!(config.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    const ProbabilityLaw& law = config.medium->law();
    std::vector<MaterialPoint> out;
    out.reserve(static_cast<std::size_t>(mesh.num_elements()));
    for (int k = 0; k < mesh.num_elements(); ++k) {
        MaterialPoint m = config.medium->evaluate(mesh.barycenter(k), config.epsilon);
        m.validate(law.gamma() * (1.0 - 1e-12), law.beta() * (1.0 - 1e-12));
        out.push_back(std::move(m));
    }
    return out;
}

PlasticTrajectory solve_eps(const EpsProblemConfig& config) {
    if (!config.mesh) throw ConfigError("configuration has no mesh");
    const SimplicialMesh& mesh = *config.mesh;
    if (mesh.is_periodic()) throw ConfigError("the eps-problem needs a bounded (non-periodic) mesh");
    check_mesh(mesh, 1e3);
    check_time_grid(config.time_grid);
    if (config.time_grid.size() < 2) throw ConfigError("time grid needs at least one step");
    if (!(config.delta > 0.0)) throw ConfigError("delta must be positive");
    const int d = mesh.dim;
    const int ne = mesh.num_elements();
    const int ncomp = mandel_size(d);

    // Compatibility at t = 0.
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.boundary[v]) continue;
        if (config.dirichlet.evaluate(0.0, mesh.vertices[v]).cwiseAbs().maxCoeff() > 1e-14)
            throw ConfigError("boundary data must vanish at t = 0");
    }
    if (config.load)
        for (int k = 0; k < ne; ++k)
            if (config.load(0.0, mesh.barycenter(k)).cwiseAbs().maxCoeff() > 1e-14)
                throw ConfigError("load must vanish at t = 0");

    const auto materials = element_materials(config);
    std::vector<LocalLaw> laws;
    laws.reserve(materials.size());
    for (const auto& m : materials) laws.emplace_back(m, config.flow, config.delta);

    P1Space space(config.mesh, DofConstraint::DirichletBoundary);
    EquilibriumSolver solver(space, std::move(laws), config.newton);

    PlasticTrajectory traj;
    traj.dim = d;
    traj.times = config.time_grid;
    traj.element_volume.resize(static_cast<std::size_t>(ne));
    for (int k = 0; k < ne; ++k) traj.element_volume[k] = space.volume(k);
    const std::vector<MandelVector> zero(static_cast<std::size_t>(ne), MandelVector::Zero(ncomp));

    auto translate = [&](Eigen::VectorXd u, double t) {
        if (config.dirichlet.translation) {
            const SmallVector a = config.dirichlet.translation(t);
            for (int v = 0; v < mesh.num_vertices(); ++v) u.segment(d * v, d) += a;
        }
        return u;
    };

    Eigen::VectorXd u_int = Eigen::VectorXd::Zero(space.num_nodal());
    Eigen::VectorXd lift_prev = boundary_lifting(space, config.dirichlet, 0.0);
    traj.u.push_back(translate(u_int, 0.0));
    traj.sigma.push_back(zero);
    traj.e.push_back(zero);
    traj.p.push_back(zero);
    traj.newton_iterations.push_back(0);
    traj.residuals.push_back(0.0);

    for (std::size_t m = 1; m < config.time_grid.size(); ++m) {
        const double t = config.time_grid[m];
        const double dt = t - config.time_grid[m - 1];
        const Eigen::VectorXd lift = boundary_lifting(space, config.dirichlet, t);
        const Eigen::VectorXd predictor = u_int + (lift - lift_prev);
        const Eigen::VectorXd guess = space.expand(space.restrict_free(predictor), lift);
        Eigen::VectorXd load;
        if (config.load) load = assemble_load(space, [&](const SmallVector& x) { return config.load(t, x); });
        StepState st = solver.solve(guess, MandelVector(), traj.p.back(), dt, load, static_cast<int>(m));

        std::vector<MandelVector> e(static_cast<std::size_t>(ne));
        for (int k = 0; k < ne; ++k) e[k] = materials[k].compliance.matrix() * st.sigma[k];
        u_int = st.u;
        lift_prev = lift;
        traj.u.push_back(translate(u_int, t));
        traj.sigma.push_back(std::move(st.sigma));
        traj.e.push_back(std::move(e));
        traj.p.push_back(std::move(st.p));
        traj.newton_iterations.push_back(st.iterations);
        traj.residuals.push_back(st.residual);
    }
    return traj;
}

std::vector<SymTensor> average_stress(const PlasticTrajectory& traj, const std::vector<int>& region) {
    return weighted_average(traj, traj.sigma, region);
}

std::vector<SymTensor> average_plastic_strain(const PlasticTrajectory& traj, const std::vector<int>& region) {
    return weighted_average(traj, traj.p, region);
}

std::vector<int> all_elements(const PlasticTrajectory& traj) {
    std::vector<int> r(static_cast<std::size_t>(traj.num_elements()));
    for (int k = 0; k < traj.num_elements(); ++k) r[k] = k;
    return r;
}

ResidualReport residual_report(const PlasticTrajectory& traj, const EpsProblemConfig& config) {
    ResidualReport rep;
    if (!config.mesh) throw ConfigError("configuration has no mesh");
    const SimplicialMesh& mesh = *config.mesh;
    const int ns = traj.num_steps();
    const int ne = traj.num_elements();
    if (ne != mesh.num_elements()) throw ConfigError("trajectory does not belong to this mesh");
    if (ns == 0) return rep;
    const int d = mesh.dim;

    const auto materials = element_materials(config);
    std::vector<LocalLaw> laws;
    for (const auto& m : materials) laws.emplace_back(m, config.flow, config.delta);
    P1Space space(config.mesh, DofConstraint::DirichletBoundary);
    P1Space full(config.mesh, DofConstraint::None);

    std::vector<double> su(ns, 0.0), dsu(ns, 0.0), se(ns, 0.0), dse(ns, 0.0), sp(ns, 0.0), dsp(ns, 0.0),
        ss(ns, 0.0), dss(ns, 0.0), sU(ns, 0.0), dsU(ns, 0.0), sf(ns, 0.0), dsf(ns, 0.0);
    std::vector<Eigen::VectorXd> lift(static_cast<std::size_t>(ns));
    std::vector<Eigen::VectorXd> fvec(static_cast<std::size_t>(ns));
    const auto zero_grad = [d](const SmallVector&) -> SmallMatrix { return SmallMatrix::Zero(d, d); };

    for (int m = 0; m < ns; ++m) {
        const double t = traj.times[m];
        lift[m] = full.interpolate([&](const SmallVector& x) { return config.dirichlet.evaluate(t, x); });
        fvec[m] = config.load ? assemble_load(full, [&](const SmallVector& x) { return config.load(t, x); })
                              : Eigen::VectorXd::Zero(full.num_nodal());
        su[m] = std::pow(l2_norm(full, traj.u[m]), 2);
        se[m] = sq_l2(traj, traj.e[m]);
        sp[m] = sq_l2(traj, traj.p[m]);
        ss[m] = sq_l2(traj, traj.sigma[m]);
        sU[m] = std::pow(l2_norm(full, lift[m]), 2) + std::pow(h1_seminorm_error(full, lift[m], zero_grad), 2);
        if (config.load) {
            const TimeVectorField& f = config.load;
            sf[m] = std::pow(l2_error(full, Eigen::VectorXd::Zero(full.num_nodal()),
                                      [&](const SmallVector& x) { return f(t, x); }),
                             2);
        }
        if (m > 0) {
            const Eigen::VectorXd du = traj.u[m] - traj.u[m - 1];
            const Eigen::VectorXd dU = lift[m] - lift[m - 1];
            dsu[m] = std::pow(l2_norm(full, du), 2);
            dse[m] = sq_l2_diff(traj, traj.e[m], traj.e[m - 1]);
            dsp[m] = sq_l2_diff(traj, traj.p[m], traj.p[m - 1]);
            dss[m] = sq_l2_diff(traj, traj.sigma[m], traj.sigma[m - 1]);
            dsU[m] = std::pow(l2_norm(full, dU), 2) + std::pow(h1_seminorm_error(full, dU, zero_grad), 2);
            if (config.load) {
                const TimeVectorField& f = config.load;
                const double t0 = traj.times[m - 1];
                dsf[m] = std::pow(l2_error(full, Eigen::VectorXd::Zero(full.num_nodal()),
                                           [&](const SmallVector& x) { return f(t, x) - f(t0, x); }),
                                  2);
            }
        }
    }
    rep.norm_u = discrete_h1_norm(traj.times, su, dsu);
    rep.norm_e = discrete_h1_norm(traj.times, se, dse);
    rep.norm_p = discrete_h1_norm(traj.times, sp, dsp);
    rep.norm_sigma = discrete_h1_norm(traj.times, ss, dss);
    rep.norm_data = discrete_h1_norm(traj.times, sU, dsU) + discrete_h1_norm(traj.times, sf, dsf);
    const double total = rep.norm_u + rep.norm_e + rep.norm_p + rep.norm_sigma;
    rep.bound_ratio = rep.norm_data > 0.0 ? total / rep.norm_data : 0.0;

    double defect_sum = 0.0, scale = 0.0, numerical = 0.0;
    bool first_diss = true;
    for (int m = 0; m < ns; ++m) {
        for (int k = 0; k < ne; ++k) {
            const MandelVector eps = element_strain(space, traj.u[m], k).comps();
            const MandelVector& e = traj.e[m][k];
            const MandelVector& p = traj.p[m][k];
            const double dec = (eps - e - p).norm() / (e.norm() + p.norm() + 1.0);
            rep.max_decomposition_residual = std::max(rep.max_decomposition_residual, dec);
            const double con = (e - materials[k].compliance.matrix() * traj.sigma[m][k]).norm() / (e.norm() + 1.0);
            rep.max_constitutive_residual = std::max(rep.max_constitutive_residual, con);
        }
        rep.max_newton_iterations = std::max(rep.max_newton_iterations, traj.newton_iterations[m]);
        rep.max_equilibrium_residual = std::max(rep.max_equilibrium_residual, traj.residuals[m]);
        if (m == 0) continue;
        const double dt = traj.times[m] - traj.times[m - 1];
        double dE = 0.0, num = 0.0, diss = 0.0, work = 0.0;
        for (int k = 0; k < ne; ++k) {
            const double vol = traj.element_volume[k];
            const MandelVector& s1 = traj.sigma[m][k];
            const MandelVector& s0 = traj.sigma[m - 1][k];
            const MandelVector& p1 = traj.p[m][k];
            const MandelVector& p0 = traj.p[m - 1][k];
            const MandelMatrix& C = materials[k].compliance.matrix();
            const MandelMatrix& B = materials[k].hardening.matrix();
            const MandelVector ds = s1 - s0, dp = p1 - p0;
            const MandelVector eff = s1 - B * p1;
            const double inc = dp.dot(eff);
            rep.min_dissipation_increment = first_diss ? inc : std::min(rep.min_dissipation_increment, inc);
            first_diss = false;
            const double fr = (dp / dt - laws[k].rate(s1, p1)).norm();
            rep.max_flow_rule_residual = std::max(rep.max_flow_rule_residual, fr);
            dE += vol * 0.5 * (s1.dot(C * s1) - s0.dot(C * s0) + p1.dot(B * p1) - p0.dot(B * p0));
            num += vol * 0.5 * (ds.dot(C * ds) + dp.dot(B * dp));
            diss += vol * inc;
            const Eigen::VectorXd dU = lift[m] - lift[m - 1];
            const MandelVector dstrainU = full.strain_matrix(k) * full.element_values(dU, k);
            work += vol * s1.dot(dstrainU);
        }
        const Eigen::VectorXd phi = (traj.u[m] - traj.u[m - 1]) - (lift[m] - lift[m - 1]);
        work += fvec[m].dot(phi);
        defect_sum += std::abs(dE + num + diss - work);
        scale += std::abs(dE) + num + std::abs(diss) + std::abs(work);
        numerical += num;
    }
    rep.energy_defect = scale > 0.0 ? defect_sum / scale : 0.0;
    rep.numerical_dissipation = scale > 0.0 ? numerical / scale : 0.0;
    return rep;
}

}  // namespace plasthom
