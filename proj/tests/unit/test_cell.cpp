#include "plasthom/cell_sigma.hpp"
#include "plasthom/errors.hpp"

#include "../oracles.hpp"
#include "generators.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace plasthom;

namespace {

SymTensor sym(double a, double b, double c) {
    SmallMatrix m(2, 2);
    m << a, c, c, b;
    return SymTensor::from_symmetric_matrix(m);
}

StrainPath non_proportional() {
    return StrainPath({0.0, 0.5, 1.0}, {SymTensor::zero(2), sym(0.02, -0.01, 0.0), sym(0.01, 0.0, 0.02)});
}

std::shared_ptr<const ProbabilityLaw> two_phase() {
    return std::make_shared<const ProbabilityLaw>(
        2, ParameterDistribution::discrete({1.0, 2.0}, {0.5, 0.5}), ParameterDistribution::point(0.3),
        ParameterDistribution::discrete({0.004, 0.008}, {0.5, 0.5}), ParameterDistribution::point(0.1));
}

RveConfig rve(std::shared_ptr<const ProbabilityLaw> law, int N, int r, int M) {
    RveConfig cfg;
    cfg.law = std::move(law);
    cfg.N = N;
    cfg.r = r;
    cfg.M = M;
    cfg.delta = 1e-3;
    return cfg;
}

bool bitwise_equal(const MandelVector& a, const MandelVector& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("homogeneous cell: zero corrector and material-point stress") {
    oracle::ZeroD z;
    const auto law = std::make_shared<const ProbabilityLaw>(
        ProbabilityLaw::constant(2, CellParameters{z.E, z.nu, z.sy, z.H}));
    RveConfig cfg = rve(law, 2, 2, 1);
    cfg.delta = z.delta;
    const auto grid = uniform_grid(1.0, 16);
    const SigmaResult res = sigma(cfg, non_proportional(), grid);
    const StrainPath xi = non_proportional();
    const auto ref = z.run(grid, [&](double t) { return Eigen::MatrixXd(xi.at(t).to_matrix()); }, 1);
    for (std::size_t m = 0; m < grid.size(); ++m)
        CHECK((res.sigma[m].comps() - oracle::to_mandel(ref[m])).norm() <= 1e-10 * (1e-3 + ref[m].norm()));

    const CellProblem cell(law->material(CellParameters{z.E, z.nu, z.sy, z.H}), 2, 2, FlowKind::VonMisesIndicator,
                           z.delta);
    const CellTrajectory traj = solve_cell(cell, xi, grid);
    for (const auto& step : traj.v)
        for (const auto& v : step) CHECK(v.norm() <= 1e-12);
}

TEST_CASE("elastic homogeneous cell returns the stiffness applied to xi") {
    const auto law = std::make_shared<const ProbabilityLaw>(ProbabilityLaw::constant(2, CellParameters{1.7, 0.25, 1e9, 0.1}));
    const RveConfig cfg = rve(law, 2, 1, 1);
    const SigmaResult res = sigma(cfg, non_proportional(), uniform_grid(1.0, 4));
    const FourthOrderMap S = law->material(CellParameters{1.7, 0.25, 1e9, 0.1}).compliance.inverse(MapRole::Stiffness);
    const StrainPath xi = non_proportional();
    for (std::size_t m = 0; m < res.times.size(); ++m)
        CHECK((res.sigma[m] - apply_map(S, xi.at(res.times[m]))).norm() <= 1e-10 * (1e-3 + xi.at(res.times[m]).norm()));
    CHECK(res.sigma_stderr.back().norm() == 0.0);
}

TEST_CASE("elastic laminate against the layered closed form") {
    // Phases alternate with floor(x_n); the exact corrector is piecewise affine on the grid.
    const double sy = 1e9;
    const MaterialPoint soft{isotropic_compliance(1.0, 0.3, 2), FourthOrderMap::identity(2, 0.1), sy};
    const MaterialPoint hard{isotropic_compliance(3.0, 0.2, 2), FourthOrderMap::identity(2, 0.1), sy};
    const Eigen::MatrixXd S1 = soft.compliance.inverse(MapRole::Stiffness).matrix();
    const Eigen::MatrixXd S2 = hard.compliance.inverse(MapRole::Stiffness).matrix();
    for (int n : {0, 1}) {
        const CellProblem cell(
            2, 2, 2, [&](const SmallVector& x) { return static_cast<int>(std::floor(x[n])) % 2 == 0 ? soft : hard; },
            FlowKind::VonMisesIndicator, 1e-3);
        const SymTensor xi = sym(0.01, -0.004, 0.007);
        const CellState s = cell.advance(cell.initial_state(), xi, 1.0);
        const Eigen::MatrixXd ref = oracle::laminate_average_stress(S1, S2, 0.5, xi.to_matrix(), n);
        CHECK((cell.average_z(s) - oracle::to_mandel(ref)).norm() <= 1e-10 * ref.norm());
    }
}

TEST_CASE("cell invariants on a random checkerboard") {
    const RveConfig cfg = rve(two_phase(), 4, 2, 1);
    for (FlowKind kind : {FlowKind::VonMisesIndicator, FlowKind::NormType}) {
        RveConfig c = cfg;
        c.flow = kind;
        const PeriodicMedium medium(sample_realization(c.law, sample_seed(c.base_seed, 0)), c.N);
        const CellProblem cell(medium, c.r, c.flow, c.delta);
        const CellTrajectory traj = solve_cell(cell, non_proportional(), uniform_grid(1.0, 8));
        const CellInvariants inv = check_invariants(cell, traj);
        CHECK(inv.closure <= 1e-9);
        CHECK(inv.solenoidal <= 1e-8);
        CHECK(inv.mean_gradient <= 1e-10);
        CHECK(inv.initial_stress == 0.0);
        CHECK(inv.symmetry == 0.0);
        // Fluctuations are present, and p is active somewhere.
        double vmax = 0, pmax = 0;
        for (const auto& v : traj.v.back()) vmax = std::max(vmax, v.norm());
        for (const auto& p : traj.p.back()) pmax = std::max(pmax, p.norm());
        CHECK(vmax > 1e-4);
        CHECK(pmax > 0.0);
        // Corrector has zero mean.
        double mean = 0;
        for (int k = 0; k < cell.mesh().num_elements(); ++k) {
            const Eigen::VectorXd ue = cell.space().element_values(traj.phi.back(), k);
            mean += cell.space().volume(k) * (ue[0] + ue[2] + ue[4]) / 3.0;
        }
        CHECK(std::abs(mean) <= 1e-12);
        const CellNorms norms = cell_norms(traj);
        CHECK(norms.z > 0.0);
        CHECK(norms.v > 0.0);
    }
}

TEST_CASE("causality: paths that agree up to t* give identical stresses up to t*") {
    const RveConfig cfg = rve(two_phase(), 2, 2, 2);
    const StrainPath a = non_proportional();
    const StrainPath b({0.0, 0.5, 1.0}, {SymTensor::zero(2), sym(0.02, -0.01, 0.0), sym(-0.03, 0.01, -0.01)});
    const auto grid = uniform_grid(1.0, 8);
    CHECK(causality_check(cfg, a, b, grid, 0.5) == 0.0);
    CHECK(causality_check(cfg, a, b, grid, 1.0) > 0.0);
}

TEST_CASE("Monte-Carlo bookkeeping") {
    RveConfig cfg = rve(two_phase(), 2, 1, 3);
    const auto grid = uniform_grid(1.0, 4);
    const SigmaResult a = sigma(cfg, non_proportional(), grid);
    cfg.threads = 2;
    const SigmaResult b = sigma(cfg, non_proportional(), grid);
    REQUIRE(a.seeds.size() == 3);
    CHECK(a.seeds == b.seeds);
    for (std::size_t m = 0; m < grid.size(); ++m) {
        CHECK(bitwise_equal(a.sigma[m].comps(), b.sigma[m].comps()));
        MandelVector mean = MandelVector::Zero(3);
        for (int i = 0; i < 3; ++i) mean += a.sample_sigma[i][m];
        CHECK((mean / 3.0 - a.sigma[m].comps()).norm() <= 1e-15);
    }
    CHECK(a.sigma_stderr.back().norm() > 0.0);
    CHECK(a.seeds[0] != a.seeds[1]);
    CHECK(sample_seed(0, 0) == sample_seed(0, 0));

    CHECK(continuity_probe(cfg, non_proportional(), 0.0, grid) == 0.0);
    CHECK(continuity_probe(cfg, non_proportional(), 1e-3, grid) > 0.0);
    CHECK_THROWS_AS(continuity_probe(cfg, non_proportional(), -1.0, grid), ConfigError);
    CHECK(unit_perturbation(2, 1.0).h1_norm() == doctest::Approx(1.0));

    RveConfig bad = cfg;
    bad.M = 0;
    CHECK_THROWS_AS(sigma(bad, non_proportional(), grid), ConfigError);
    bad = cfg;
    bad.law.reset();
    CHECK_THROWS_AS(sigma(bad, non_proportional(), grid), ConfigError);
}

TEST_CASE("stress continuity in the strain path") {
    // |Sigma(xi + eta zeta) - Sigma(xi)| decreases with eta.
    const RveConfig cfg = rve(two_phase(), 2, 1, 1);
    const auto grid = uniform_grid(1.0, 8);
    double prev = 1e300;
    for (double eta : {1e-2, 1e-3, 1e-4}) {
        const double d = continuity_probe(cfg, non_proportional(), eta, grid);
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 1e-3);
}
