#include "plasthom/errors.hpp"
#include "plasthom/experiments.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

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

std::shared_ptr<const ProbabilityLaw> two_phase(int d = 2) {
    return std::make_shared<const ProbabilityLaw>(
        d, ParameterDistribution::discrete({1.0, 2.0}, {0.5, 0.5}), ParameterDistribution::point(0.3),
        ParameterDistribution::discrete({0.004, 0.008}, {0.5, 0.5}), ParameterDistribution::point(0.1));
}

AveragingSpec small_averaging(std::shared_ptr<const ProbabilityLaw> law) {
    AveragingSpec s;
    s.law = std::move(law);
    s.divisions = 8;
    s.xi = StrainPath({0.0, 0.5, 1.0}, {SymTensor::zero(2), sym(0.02, -0.01, 0.0), sym(0.01, 0.0, 0.02)});
    s.epsilons = {0.5, 0.25};
    s.seeds = {1, 2};
    s.time_grid = uniform_grid(1.0, 4);
    s.rve_N = 2;
    s.rve_r = 2;
    s.rve_M = 2;
    return s;
}

// Barycentric coordinates of x in element k.
Eigen::VectorXd barycentric(const SimplicialMesh& mesh, int k, const SmallVector& x) {
    const int d = mesh.dim;
    Eigen::MatrixXd A(d + 1, d + 1);
    Eigen::VectorXd b(d + 1);
    for (int j = 0; j <= d; ++j) {
        A(0, j) = 1.0;
        for (int i = 0; i < d; ++i) A(i + 1, j) = mesh.vertices[mesh.simplices[k][j]][i];
    }
    b[0] = 1.0;
    b.tail(d) = x;
    return A.lu().solve(b);
}

bool covered(const SimplicialMesh& mesh, const SmallVector& x) {
    for (int k = 0; k < mesh.num_elements(); ++k)
        if (barycentric(mesh, k, x).minCoeff() >= -1e-12) return true;
    return false;
}

double dist_to_segment(const SmallVector& x, const SmallVector& a, const SmallVector& b) {
    const SmallVector ab = b - a;
    const double s = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (x - a - s * ab).norm();
}

}  // namespace

TEST_CASE("needle-grid conformity: interior points at distance >= h lie in the mesh") {
    gen::Source g(3);
    const std::vector<SmallVector> T{vec(0, 0), vec(1, 0), vec(1, 1)};
    for (double h : {0.5, 0.2, 0.07}) {
        const SimplicialMesh mesh = mesh_simplex(T, h);
        CHECK(mesh.h() < h);
        int tested = 0;
        for (int i = 0; i < 400; ++i) {
            const SmallVector x = vec(g.uniform(0, 1), g.uniform(0, 1));
            if (x[1] > x[0]) continue;
            double dist = 1e9;
            for (int e = 0; e < 3; ++e) dist = std::min(dist, dist_to_segment(x, T[e], T[(e + 1) % 3]));
            if (dist < h) continue;
            ++tested;
            CHECK(covered(mesh, x));
        }
        if (h < 0.3) CHECK(tested > 0);
        // Elements stay inside the domain.
        for (int k = 0; k < mesh.num_elements(); ++k) {
            const SmallVector c = mesh.barycenter(k);
            CHECK(c[1] <= c[0] + 1e-14);
            CHECK(c[0] <= 1.0);
            CHECK(c[1] >= 0.0);
        }
        CHECK(std::abs(mesh.total_volume() - 0.5) <= 1e-14);
    }
    const SimplicialMesh box = mesh_box(vec(-1, 0), vec(1, 2), 7);
    for (int i = 0; i < 200; ++i) CHECK(covered(box, vec(g.uniform(-1, 1), g.uniform(0, 2))));
}

TEST_CASE("averaging with a point-mass law: homogeneous medium is its own average") {
    const auto law = std::make_shared<const ProbabilityLaw>(ProbabilityLaw::constant(2, CellParameters{1.0, 0.3, 0.01, 0.1}));
    AveragingSpec s = small_averaging(law);
    s.delta = 0.05;
    const AveragingResult r = run_averaging_experiment(s);
    for (const auto& per_eps : r.discrepancy)
        for (const auto& per_seed : per_eps)
            for (double d : per_seed) CHECK(d <= 1e-8);
    // Rows: per (eps, seed) steps + l2, per eps mean steps + mean l2.
    const std::size_t nt = s.time_grid.size();
    CHECK(r.table.rows.size() == 2 * (2 * (nt + 1) + nt + 1));
    for (const auto& row : r.table.rows) {
        CHECK(format_value(row[r.table.column("seed")]) != "");
        CHECK(std::holds_alternative<double>(row[r.table.column("epsilon")]));
        CHECK(std::holds_alternative<double>(row[r.table.column("tolerance")]));
    }
}

TEST_CASE("averaging: translations do not change averaged stresses; threads do not change anything") {
    AveragingSpec s = small_averaging(two_phase());
    const AveragingResult a = run_averaging_experiment(s);
    s.translation = [](double t) { return vec(t, 0.0); };
    s.threads = 2;
    const AveragingResult b = run_averaging_experiment(s);
    for (std::size_t i = 0; i < a.average_stress.size(); ++i)
        for (std::size_t j = 0; j < a.average_stress[i].size(); ++j)
            for (std::size_t m = 0; m < a.average_stress[i][j].size(); ++m)
                CHECK(std::memcmp(a.average_stress[i][j][m].comps().data(), b.average_stress[i][j][m].comps().data(),
                                  3 * sizeof(double)) == 0);
    CHECK(to_csv(a.table) == to_csv(b.table));
    CHECK(a.mean_l2_discrepancy[0] > 0.0);

    AveragingSpec bad = s;
    bad.seeds.clear();
    CHECK_THROWS_AS(run_averaging_experiment(bad), ConfigError);
    bad = s;
    bad.epsilons = {0.0};
    CHECK_THROWS_AS(run_averaging_experiment(bad), ConfigError);
}

TEST_CASE("Korn ratio: zero field skipped, shear and rotational examples") {
    const auto mesh = std::make_shared<const SimplicialMesh>(mesh_torus(8, 1, 2));
    const P1Space space(mesh, DofConstraint::None);
    CHECK(std::isnan(korn_ratio(space, Eigen::VectorXd::Zero(space.num_nodal()))));
    // Pure shear-like: phi = (sin(2 pi y / 8), 0); the gradient is a single off-diagonal entry, ratio sqrt 2.
    const double w = 2.0 * std::numbers::pi / 8.0;
    const Eigen::VectorXd shear = space.interpolate([&](const SmallVector& x) { return vec(std::sin(w * x[1]), 0.0); });
    const double q = korn_ratio(space, shear);
    CHECK(q <= 2.0);
    CHECK(q == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    // Symmetric gradient (phi = grad of a potential): ratio 1.
    const Eigen::VectorXd grad = space.interpolate([&](const SmallVector& x) {
        return vec(std::cos(w * x[0]), 0.0);
    });
    CHECK(korn_ratio(space, grad) == doctest::Approx(1.0).epsilon(1e-12));
    // Constant fields have zero gradient.
    CHECK(std::isnan(korn_ratio(space, space.interpolate([](const SmallVector&) { return vec(1.0, -2.0); }))));
}

TEST_CASE("Korn check on random periodic fields") {
    for (int d : {2, 3}) {
        KornSpec s;
        s.N = d == 2 ? 8 : 3;
        s.dim = d;
        s.samples = d == 2 ? 300 : 30;
        s.seed = 5;
        const KornResult r = run_korn_check(s);
        CHECK(r.skipped == 0);
        CHECK(r.max_ratio <= 2.0 + 1e-10);
        CHECK(r.max_ratio >= 1.0);
        for (double q : r.ratios) CHECK(q >= 1.0 - 1e-12);
        CHECK(r.table.rows.size() == static_cast<std::size_t>(s.samples));
        s.threads = 2;
        CHECK(to_csv(run_korn_check(s).table) == to_csv(r.table));
    }
    KornSpec bad;
    bad.N = 0;
    CHECK_THROWS_AS(run_korn_check(bad), ConfigError);
}

TEST_CASE("ergodic check: point mass is exact, Bernoulli decays like L^(-d/2)") {
    ErgodicSpec s;
    s.law = std::make_shared<const ProbabilityLaw>(ProbabilityLaw::constant(2, CellParameters{1.0, 0.3, 0.01, 0.1}));
    s.seeds = 5;
    const ErgodicResult p = run_ergodic_check(s);
    for (const auto& per_stat : p.rms_error)
        for (double e : per_stat) CHECK(e <= 1e-14);

    s.law = two_phase();
    s.seeds = 50;
    const ErgodicResult b = run_ergodic_check(s);
    for (double ex : b.exponent) {
        CHECK(ex >= -1.5);
        CHECK(ex <= -0.5);
    }
    // Doubling L roughly halves the error (d = 2), within a factor 2.
    for (const auto& e : b.rms_error)
        for (std::size_t j = 1; j < e.size(); ++j) {
            CHECK(e[j] / e[j - 1] >= 0.25);
            CHECK(e[j] / e[j - 1] <= 1.0);
        }
    CHECK(fit_loglog_slope({1, 2, 4}, {1, 0.25, 0.0625}) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(fit_loglog_slope({1}, {1}), ConfigError);
    s.box_sizes = {8};
    CHECK_THROWS_AS(run_ergodic_check(s), ConfigError);
}
