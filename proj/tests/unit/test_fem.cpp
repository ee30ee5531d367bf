#include "plasthom/errors.hpp"
#include "plasthom/fem.hpp"
#include "plasthom/mesh.hpp"

#include "../oracles.hpp"
#include "generators.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace plasthom;

namespace {

SmallVector vec(std::initializer_list<double> v) {
    SmallVector x(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double a : v) x[i++] = a;
    return x;
}

std::vector<SmallVector> reference_triangle() { return {vec({0, 0}), vec({1, 0}), vec({1, 1})}; }

std::vector<SmallVector> reference_tetrahedron() {
    return {vec({0, 0, 0}), vec({1, 0, 0}), vec({1, 1, 0}), vec({1, 1, 1})};
}

std::vector<FourthOrderMap> random_stiffness(const SimplicialMesh& mesh, gen::Source& g) {
    std::vector<FourthOrderMap> S;
    for (int k = 0; k < mesh.num_elements(); ++k)
        S.push_back(isotropic_compliance(g.uniform(0.5, 4.0), g.uniform(0.0, 0.45), mesh.dim).inverse(MapRole::Stiffness));
    return S;
}

}  // namespace

TEST_CASE("simplex meshes") {
    for (int n : {1, 2, 5}) {
        const SimplicialMesh m = mesh_simplex_divisions(reference_triangle(), n);
        CHECK(m.num_elements() == n * n);
        CHECK(m.num_vertices() == (n + 1) * (n + 2) / 2);
        CHECK(m.total_volume() == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(m.h() == doctest::Approx(std::sqrt(2.0) / n));
        CHECK_NOTHROW(check_mesh(m));
        int nb = 0;
        for (char b : m.boundary) nb += b;
        CHECK(nb == 3 * n);
    }
    const SimplicialMesh t = mesh_simplex_divisions(reference_tetrahedron(), 3);
    CHECK(t.num_elements() == 27);
    CHECK(t.total_volume() == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK_NOTHROW(check_mesh(t));
    const SimplicialMesh mh = mesh_simplex(reference_triangle(), 0.1);
    CHECK(mh.h() < 0.1);
    CHECK_THROWS_AS(mesh_simplex(reference_triangle(), 0.0), ConfigError);
    CHECK_THROWS_AS(mesh_simplex(reference_triangle(), -1.0), ConfigError);
    CHECK_THROWS_AS(mesh_simplex({vec({0, 0}), vec({1, 0}), vec({2, 0})}, 0.1), ConfigError);
}

TEST_CASE("torus meshes identify opposite faces") {
    for (int d : {2, 3}) {
        const SimplicialMesh m = mesh_torus(3, 2, d);
        const int n = 6;
        CHECK(m.num_elements() == (d == 2 ? 2 : 6) * static_cast<int>(std::pow(n, d)));
        CHECK(m.total_volume() == doctest::Approx(std::pow(3.0, d)));
        CHECK(m.period == 3.0);
        int masters = 0;
        for (int v = 0; v < m.num_vertices(); ++v) {
            masters += m.master(v) == v;
            const SmallVector diff = m.vertices[v] - m.vertices[m.master(v)];
            for (int i = 0; i < d; ++i) CHECK(std::abs(diff[i] - 3.0 * std::round(diff[i] / 3.0)) < 1e-14);
        }
        CHECK(masters == static_cast<int>(std::pow(n, d)));
        // No element straddles a unit cell.
        for (int k = 0; k < m.num_elements(); ++k) {
            const SmallVector b = m.barycenter(k);
            for (int j = 0; j <= d; ++j)
                for (int i = 0; i < d; ++i) {
                    const double x = m.vertices[m.simplices[k][j]][i];
                    CHECK(x >= std::floor(b[i]) - 1e-14);
                    CHECK(x <= std::floor(b[i]) + 1.0 + 1e-14);
                }
        }
    }
}

TEST_CASE("mesh text round trip") {
    for (const SimplicialMesh& m : {mesh_simplex_divisions(reference_triangle(), 3), mesh_torus(2, 2, 2)}) {
        std::stringstream ss;
        write_mesh(m, ss);
        const SimplicialMesh r = read_mesh(ss);
        CHECK(r.num_vertices() == m.num_vertices());
        CHECK(r.num_elements() == m.num_elements());
        CHECK(r.periodic_master == m.periodic_master);
        CHECK(r.total_volume() == doctest::Approx(m.total_volume()));
    }
    std::stringstream bad("dim 2\nvertices 1\n0 0\nsimplices 1\n0 0 5\n");
    CHECK_THROWS_AS(read_mesh(bad), ConfigError);
}

TEST_CASE("quadrature integrates quadratics exactly") {
    gen::Source g(3);
    for (int d : {2, 3}) {
        const SimplicialMesh m = mesh_simplex_divisions(d == 2 ? reference_triangle() : reference_tetrahedron(), 2);
        std::vector<SmallVector> pts;
        std::vector<double> w;
        double acc = 0;
        for (int k = 0; k < m.num_elements(); ++k) {
            element_quadrature(m, k, pts, w);
            for (std::size_t q = 0; q < pts.size(); ++q) acc += w[q] * pts[q][0] * pts[q][0];
        }
        // int x^2 over the reference simplices.
        const double exact = d == 2 ? 0.25 : 0.1;
        CHECK(acc == doctest::Approx(exact).epsilon(1e-13));
    }
}

TEST_CASE("stiffness is symmetric positive definite with rigid motions removed") {
    gen::Source g(5);
    const auto mesh = std::make_shared<SimplicialMesh>(mesh_simplex_divisions(reference_triangle(), 6));
    const P1Space space(mesh, DofConstraint::DirichletBoundary);
    std::vector<MandelMatrix> S;
    for (const auto& s : random_stiffness(*mesh, g)) S.push_back(s.matrix());
    const SparseMatrix A = assemble_stiffness(space, S);
    CHECK(A.rows() == space.num_free());
    CHECK_NOTHROW(check_symmetric(A));
    CHECK(oracle::lanczos_min_ritz(A, A.rows()) > 0.0);

    // Without constraints the kernel contains the rigid motions.
    const P1Space free_space(mesh, DofConstraint::None);
    const SparseMatrix K = assemble_stiffness(free_space, S);
    const Eigen::VectorXd rot = free_space.interpolate([](const SmallVector& x) { return vec({-x[1], x[0]}); });
    const Eigen::VectorXd tr = free_space.interpolate([](const SmallVector&) { return vec({1.0, -2.0}); });
    CHECK((K * rot).norm() <= 1e-12 * sparse_inf_norm(K) * rot.norm());
    CHECK((K * tr).norm() <= 1e-12 * sparse_inf_norm(K) * tr.norm());

    SparseMatrix B = A;
    B.coeffRef(0, 1) += 1.0;
    CHECK_THROWS_AS(check_symmetric(B), NumericalError);
}

TEST_CASE("patch test: affine displacements are reproduced exactly") {
    gen::Source g(17);
    for (int d : {2, 3}) {
        const auto mesh =
            std::make_shared<SimplicialMesh>(mesh_simplex_divisions(d == 2 ? reference_triangle() : reference_tetrahedron(), d == 2 ? 8 : 4));
        const P1Space space(mesh, DofConstraint::DirichletBoundary);
        for (int trial = 0; trial < 5; ++trial) {
            const SmallMatrix grad = g.matrix(d);
            const SmallVector a = g.tensor(d).comps().head(d);
            const H1Function U = affine_field(grad, a);
            for (LinearSolverKind kind : {LinearSolverKind::Direct, LinearSolverKind::ConjugateGradient}) {
                // One (anisotropic) stiffness for all elements: affine fields are then exact solutions.
                const std::vector<FourthOrderMap> S(mesh->num_elements(), FourthOrderMap(d, g.spd(d, 0.5, 4.0)));
                const Eigen::VectorXd u = solve_elastic(space, S, {}, U.value, kind);
                const Eigen::VectorXd exact = space.interpolate(U.value);
                const double tol = kind == LinearSolverKind::Direct ? 1e-12 : 1e-8;
                CHECK((u - exact).lpNorm<Eigen::Infinity>() <= tol * (grad.norm() + a.norm()));
                for (int k = 0; k < mesh->num_elements(); ++k)
                    CHECK((element_gradient(space, u, k) - grad).norm() <= 100.0 * tol * grad.norm());
            }
        }
    }
}

TEST_CASE("manufactured solution converges at second order in L2") {
    // u = (s, s), s = sin(pi x) sin(pi y), isotropic plane strain.
    const double E = 1.0, nu = 0.3;
    const double mu = E / (2 * (1 + nu)), lambda = E * nu / ((1 + nu) * (1 - 2 * nu));
    const double pi = std::numbers::pi;
    auto exact = [&](const SmallVector& x) {
        const double s = std::sin(pi * x[0]) * std::sin(pi * x[1]);
        return vec({s, s});
    };
    auto grad = [&](const SmallVector& x) {
        SmallMatrix G(2, 2);
        const double a = pi * std::cos(pi * x[0]) * std::sin(pi * x[1]);
        const double b = pi * std::sin(pi * x[0]) * std::cos(pi * x[1]);
        G << a, b, a, b;
        return G;
    };
    auto load = [&](const SmallVector& x) {
        const double s = std::sin(pi * x[0]) * std::sin(pi * x[1]);
        const double cc = std::cos(pi * x[0]) * std::cos(pi * x[1]);
        const double f = 2 * mu * pi * pi * s - (lambda + mu) * pi * pi * (cc - s);
        return vec({f, f});
    };
    std::vector<double> hs, l2, h1;
    for (int n : {8, 16, 32, 64}) {
        const auto mesh = std::make_shared<SimplicialMesh>(mesh_simplex_divisions(reference_triangle(), n));
        const P1Space space(mesh, DofConstraint::DirichletBoundary);
        const std::vector<FourthOrderMap> S(mesh->num_elements(), isotropic_compliance(E, nu, 2).inverse(MapRole::Stiffness));
        const Eigen::VectorXd u = solve_elastic(space, S, load, exact);
        hs.push_back(mesh->h());
        l2.push_back(l2_error(space, u, exact));
        h1.push_back(h1_seminorm_error(space, u, grad));
    }
    const double rate = oracle::loglog_slope(hs, l2);
    MESSAGE("L2 rate " << rate << ", H1 rate " << oracle::loglog_slope(hs, h1));
    CHECK(rate >= 1.7);
    CHECK(rate <= 2.3);
    CHECK(oracle::loglog_slope(hs, h1) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("load assembly integrates affine loads exactly") {
    const auto mesh = std::make_shared<SimplicialMesh>(mesh_simplex_divisions(reference_triangle(), 4));
    const P1Space space(mesh, DofConstraint::None);
    const Eigen::VectorXd F = assemble_load(space, [](const SmallVector& x) { return vec({1.0 + x[0], 2.0 * x[1]}); });
    // Testing against the constant field (1, 0) integrates f_1 = 1 + x.
    const Eigen::VectorXd one = space.interpolate([](const SmallVector&) { return vec({1.0, 0.0}); });
    CHECK(F.dot(one) == doctest::Approx(0.5 + 1.0 / 3.0).epsilon(1e-14));
    // Testing against (0, y) integrates 2 y^2.
    const Eigen::VectorXd yy = space.interpolate([](const SmallVector& x) { return vec({0.0, x[1]}); });
    CHECK(F.dot(yy) == doctest::Approx(2.0 / 12.0).epsilon(1e-14));
}

TEST_CASE("periodic spaces remove the mean") {
    const auto mesh = std::make_shared<SimplicialMesh>(mesh_torus(2, 3, 2));
    const P1Space space(mesh, DofConstraint::PinFirstVertex);
    CHECK(space.num_free() == 2 * (36 - 1));
    gen::Source g(1);
    Eigen::VectorXd free(space.num_free());
    for (int i = 0; i < free.size(); ++i) free[i] = g.normal();
    Eigen::VectorXd u = space.expand(free);
    space.remove_mean(u);
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (int k = 0; k < mesh->num_elements(); ++k) {
        const Eigen::VectorXd ue = space.element_values(u, k);
        for (int j = 0; j < 3; ++j) mean += space.volume(k) / 3.0 * ue.segment<2>(2 * j);
    }
    CHECK(mean.norm() <= 1e-14 * u.norm());
    // Copies carry their master's value.
    for (int v = 0; v < mesh->num_vertices(); ++v)
        CHECK((u.segment<2>(2 * v) - u.segment<2>(2 * mesh->master(v))).norm() == 0.0);
}

TEST_CASE("Riesz projection reproduces P1 functions") {
    const auto mesh = std::make_shared<SimplicialMesh>(mesh_simplex_divisions(reference_triangle(), 5));
    const RieszProjector R(mesh);
    SmallMatrix G(2, 2);
    G << 1, 2, -3, 0.5;
    const H1Function U = affine_field(G, vec({0.1, 0.2}));
    const Eigen::VectorXd u = R.project(U);
    CHECK((u - R.space().interpolate(U.value)).norm() <= 1e-12 * u.norm());
    const auto series = riesz_project({U, U}, mesh);
    CHECK(series.size() == 2);
    CHECK_THROWS_AS(RieszProjector(std::make_shared<SimplicialMesh>(mesh_torus(1, 2))), ConfigError);
}

TEST_CASE("linear solver failures are reported") {
    SparseMatrix A(2, 2);
    A.insert(0, 0) = 1.0;
    A.insert(1, 1) = -1.0;
    LinearSolver direct;
    CHECK_THROWS_AS(direct.solve(A, Eigen::Vector2d(1, 1)), NumericalError);
    LinearSolver cg(LinearSolverKind::ConjugateGradient);
    SparseMatrix B(2, 2);
    B.insert(0, 0) = 2.0;
    B.insert(1, 1) = 4.0;
    LinearSolveInfo info;
    const Eigen::VectorXd x = cg.solve(B, Eigen::Vector2d(2, 4), &info);
    CHECK((x - Eigen::Vector2d(1, 1)).norm() < 1e-12);
    CHECK(info.relative_residual <= 1e-10);
    CHECK(direct.solve(SparseMatrix(0, 0), Eigen::VectorXd()).size() == 0);
}
