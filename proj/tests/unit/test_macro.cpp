#include "plasthom/errors.hpp"
#include "plasthom/macro.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace plasthom;

namespace {

SmallVector vec(double a, double b) {
    SmallVector v(2);
    v << a, b;
    return v;
}

SymTensor sym(double a, double b, double c) {
    SmallMatrix m(2, 2);
    m << a, c, c, b;
    return SymTensor::from_symmetric_matrix(m);
}

StrainPath non_proportional() {
    return StrainPath({0.0, 0.5, 1.0}, {SymTensor::zero(2), sym(0.02, -0.01, 0.0), sym(0.01, 0.0, 0.02)});
}

std::shared_ptr<const ProbabilityLaw> point_law(double sy) {
    return std::make_shared<const ProbabilityLaw>(ProbabilityLaw::constant(2, CellParameters{1.0, 0.3, sy, 0.1}));
}

MacroConfig macro(std::shared_ptr<const SimplicialMesh> mesh, std::shared_ptr<const ProbabilityLaw> law, int steps) {
    MacroConfig cfg;
    cfg.mesh = std::move(mesh);
    cfg.rve.law = std::move(law);
    cfg.rve.N = 1;
    cfg.rve.r = 1;
    cfg.rve.M = 1;
    cfg.rve.delta = 0.05;
    cfg.time_grid = uniform_grid(1.0, steps);
    cfg.dirichlet = DirichletData::affine(non_proportional());
    return cfg;
}

std::shared_ptr<const SimplicialMesh> triangle(int n) {
    return std::make_shared<SimplicialMesh>(mesh_simplex_divisions({vec(0, 0), vec(1, 0), vec(1, 1)}, n));
}

EpsProblemConfig matching_eps(const MacroConfig& m) {
    EpsProblemConfig e;
    e.mesh = m.mesh;
    e.element_materials.assign(m.mesh->num_elements(), m.rve.law->material(CellParameters{1.0, 0.3, m.rve.law->yield_stress().mean(), 0.1}));
    e.flow = m.rve.flow;
    e.delta = m.rve.delta;
    e.time_grid = m.time_grid;
    e.dirichlet = m.dirichlet;
    e.load = m.load;
    return e;
}

}  // namespace

TEST_CASE("homogeneous single-cell RVE reproduces the heterogeneous solver with constant coefficients") {
    for (int n : {1, 4}) {
        MacroConfig cfg = macro(triangle(n), point_law(0.01), 8);
        cfg.load = [](double t, const SmallVector& x) { return vec(0.02 * t * x[1], -0.01 * t); };
        const EffectiveSolution sol = solve_effective(cfg);
        const PlasticTrajectory ref = solve_eps(matching_eps(cfg));
        for (int m = 0; m < sol.num_steps(); ++m) {
            for (int k = 0; k < sol.num_elements(); ++k)
                CHECK((sol.sigma[m][k] - ref.sigma[m][k]).norm() <= 1e-8 * (1e-12 + ref.sigma[m][k].norm()));
            CHECK((sol.u[m] - ref.u[m]).norm() <= 1e-8 * (1e-12 + ref.u[m].norm()));
        }
        CHECK(max_weak_residual(sol, cfg) <= 1e-6);
        CHECK(sol.committed_advances == static_cast<long long>(sol.num_elements()) * (sol.num_steps() - 1));
    }
}

TEST_CASE("single element with affine data follows the effective stress operator") {
    const auto law = std::make_shared<const ProbabilityLaw>(
        2, ParameterDistribution::discrete({1.0, 2.0}, {0.5, 0.5}), ParameterDistribution::point(0.3),
        ParameterDistribution::discrete({0.004, 0.008}, {0.5, 0.5}), ParameterDistribution::point(0.1));
    MacroConfig cfg = macro(triangle(1), law, 6);
    cfg.rve.N = 2;
    cfg.rve.r = 2;
    cfg.rve.M = 2;
    cfg.rve.delta = 1e-3;
    const EffectiveSolution sol = solve_effective(cfg);
    const SigmaResult ref = sigma(cfg.rve, non_proportional(), cfg.time_grid);
    for (int m = 0; m < sol.num_steps(); ++m) {
        CHECK((sol.sigma[m][0] - ref.sigma[m].comps()).norm() <= 1e-12 * (1e-12 + ref.sigma[m].norm()));
        CHECK((sol.strain[m][0] - non_proportional().at(sol.times[m]).comps()).norm() <= 1e-14);
    }
    CHECK(sol.seeds == ref.seeds);
    CHECK(sol.sigma_increment(1, 0).norm() > 0.0);
}

TEST_CASE("elastic regime matches linear elasticity") {
    MacroConfig cfg = macro(triangle(4), point_law(1e9), 3);
    cfg.load = [](double t, const SmallVector& x) { return vec(t * x[0], t); };
    const EffectiveSolution sol = solve_effective(cfg);
    const P1Space space(cfg.mesh, DofConstraint::DirichletBoundary);
    const std::vector<FourthOrderMap> S(cfg.mesh->num_elements(), isotropic_compliance(1.0, 0.3, 2).inverse(MapRole::Stiffness));
    for (int m = 1; m < sol.num_steps(); ++m) {
        const double t = sol.times[m];
        const Eigen::VectorXd u = solve_elastic(space, S, [&](const SmallVector& x) { return cfg.load(t, x); },
                                                [&](const SmallVector& x) { return cfg.dirichlet.evaluate(t, x); });
        CHECK(l2_norm(space, sol.u[m] - u) <= 1e-6 * l2_norm(space, u));
    }
}

TEST_CASE("zero data gives the zero solution") {
    MacroConfig cfg = macro(triangle(3), point_law(0.01), 2);
    cfg.dirichlet = DirichletData{};
    const EffectiveSolution sol = solve_effective(cfg);
    for (const auto& u : sol.u) CHECK(u.norm() == 0.0);
}

TEST_CASE("budgets and configuration errors") {
    MacroConfig cfg = macro(triangle(4), point_law(0.01), 4);
    cfg.max_elements = 4;
    CHECK_THROWS_AS(solve_effective(cfg), BudgetError);
    cfg.max_elements = 4096;
    cfg.max_seconds = 1e-9;
    try {
        solve_effective(cfg);
        FAIL("budget not enforced");
    } catch (const PartialResultError& e) {
        CHECK(e.partial().num_steps() >= 1);
    }
    MacroConfig bad = macro(triangle(2), point_law(0.01), 2);
    bad.rve.law.reset();
    CHECK_THROWS_AS(solve_effective(bad), ConfigError);
    bad = macro(std::make_shared<SimplicialMesh>(mesh_torus(1, 2)), point_law(0.01), 2);
    CHECK_THROWS_AS(solve_effective(bad), ConfigError);
    bad = macro(triangle(2), point_law(0.01), 2);
    bad.dirichlet.translation = [](double) { return vec(1, 1); };
    CHECK_THROWS_AS(solve_effective(bad), ConfigError);
}

TEST_CASE("threaded element loop is deterministic") {
    const auto law = std::make_shared<const ProbabilityLaw>(
        2, ParameterDistribution::discrete({1.0, 2.0}, {0.5, 0.5}), ParameterDistribution::point(0.3),
        ParameterDistribution::discrete({0.004, 0.008}, {0.5, 0.5}), ParameterDistribution::point(0.1));
    MacroConfig cfg = macro(triangle(3), law, 3);
    cfg.rve.N = 2;
    cfg.rve.M = 2;
    cfg.rve.delta = 1e-2;
    const EffectiveSolution a = solve_effective(cfg);
    cfg.threads = 3;
    const EffectiveSolution b = solve_effective(cfg);
    for (int m = 0; m < a.num_steps(); ++m) CHECK((a.u[m] - b.u[m]).norm() == 0.0);
    CHECK(max_weak_residual(a, cfg) <= 1e-6);
}
