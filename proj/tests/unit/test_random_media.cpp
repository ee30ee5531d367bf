#include "plasthom/errors.hpp"
#include "plasthom/random_media.hpp"

#include "../oracles.hpp"
#include "generators.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace plasthom;

namespace {

std::shared_ptr<const ProbabilityLaw> two_phase(int d = 2) {
    return std::make_shared<const ProbabilityLaw>(d, ParameterDistribution::discrete({1.0, 2.0}, {0.5, 0.5}),
                                                  ParameterDistribution::point(0.3),
                                                  ParameterDistribution::uniform(0.5, 1.5),
                                                  ParameterDistribution::point(0.1));
}

SmallVector vec(double a, double b) {
    SmallVector v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("parameter distributions") {
    const auto u = ParameterDistribution::uniform(1.0, 3.0);
    CHECK(u.mean() == doctest::Approx(2.0));
    CHECK(u.variance() == doctest::Approx(4.0 / 12.0));
    CHECK(u.sample(0.25) == doctest::Approx(1.5));
    const auto d = ParameterDistribution::discrete({1.0, 2.0, 5.0}, {1.0, 1.0, 2.0});
    CHECK(d.mean() == doctest::Approx(3.25));
    CHECK(d.sample(0.1) == 1.0);
    CHECK(d.sample(0.3) == 2.0);
    CHECK(d.sample(0.99) == 5.0);
    CHECK(d.min() == 1.0);
    CHECK(d.max() == 5.0);
    CHECK(ParameterDistribution::point(4.0).variance() == 0.0);
    CHECK_THROWS_AS(ParameterDistribution::uniform(2.0, 1.0), ConfigError);
    CHECK_THROWS_AS(ParameterDistribution::discrete({1.0}, {-1.0}), ConfigError);
    CHECK_THROWS_AS(ParameterDistribution::discrete({1.0, 2.0}, {0.0, 0.0}), ConfigError);
}

TEST_CASE("law validation") {
    CHECK_THROWS_AS(ProbabilityLaw(2, ParameterDistribution::point(1.0), ParameterDistribution::uniform(0.3, 0.5),
                                   ParameterDistribution::point(1.0), ParameterDistribution::point(0.1)),
                    ConfigError);
    CHECK_THROWS_AS(ProbabilityLaw(2, ParameterDistribution::uniform(-1.0, 1.0), ParameterDistribution::point(0.3),
                                   ParameterDistribution::point(1.0), ParameterDistribution::point(0.1)),
                    ConfigError);
    CHECK_THROWS_AS(ProbabilityLaw(2, ParameterDistribution::point(1.0), ParameterDistribution::point(0.3),
                                   ParameterDistribution::point(0.0), ParameterDistribution::point(0.1)),
                    ConfigError);
    const auto law = two_phase();
    CHECK(law->gamma() > 0.0);
    CHECK(law->beta() == doctest::Approx(0.1));
    CHECK_FALSE(law->is_point_mass());
    CHECK(ProbabilityLaw::constant(2, CellParameters{}).is_point_mass());
    // Every realizable compliance passes the law-level ellipticity check.
    for (double E : {1.0, 2.0}) {
        const MaterialPoint m = law->material(CellParameters{E, 0.3, 1.0, 0.1});
        CHECK_NOTHROW(m.validate(law->gamma(), law->beta()));
    }
}

TEST_CASE("realizations are pure functions of seed and position") {
    const auto law = two_phase();
    const Realization w = sample_realization(law, 42);
    const Realization w2 = sample_realization(law, 42);
    gen::Source g(1);
    for (int i = 0; i < 200; ++i) {
        const SmallVector x = vec(g.uniform(-10, 10), g.uniform(-10, 10));
        const CellParameters a = w.evaluate_parameters(x, 0.25), b = w2.evaluate_parameters(x, 0.25);
        CHECK(a.E == b.E);
        CHECK(a.yield_stress == b.yield_stress);
    }
    CHECK(w.shift().minCoeff() >= 0.0);
    CHECK(w.shift().maxCoeff() < 1.0);
    // Different seeds give different fields.
    const Realization w3 = sample_realization(law, 43);
    int differ = 0;
    for (int z = 0; z < 50; ++z)
        differ += w.cell_parameters({z, 0, 0}).yield_stress != w3.cell_parameters({z, 0, 0}).yield_stress;
    CHECK(differ > 40);
}

TEST_CASE("shift group action") {
    const auto law = two_phase();
    const Realization w = sample_realization(law, 7);
    gen::Source g(2);
    for (int i = 0; i < 200; ++i) {
        const SmallVector x = vec(g.uniform(-5, 5), g.uniform(-5, 5));
        const SmallVector y = vec(g.integer(-3, 3), g.integer(-3, 3));
        // (tau_y w)(x) = w(x + y) at unit scale.
        const CellParameters a = shifted(w, y).evaluate_parameters(x, 1.0);
        const CellParameters b = w.evaluate_parameters(x + y, 1.0);
        CHECK(a.E == b.E);
        CHECK(a.yield_stress == b.yield_stress);
        const SmallVector y2 = vec(g.uniform(-1, 1), g.uniform(-1, 1));
        // tau_a tau_b = tau_{a+b}
        const Realization ab = shifted(shifted(w, y), y2), c = shifted(w, y + y2);
        CHECK((ab.shift() - c.shift()).norm() <= 1e-14);
    }
}

TEST_CASE("cell values are i.i.d. with the prescribed marginals") {
    const auto law = two_phase();
    const Realization w = sample_realization(law, 3);
    std::vector<double> u, left, right;
    int heavy = 0;
    const int n = 4000;
    for (int z = 0; z < n; ++z) {
        const CellParameters c = w.cell_parameters({z, 17, 0});
        u.push_back(c.yield_stress - 0.5);  // uniform on [0.5, 1.5)
        heavy += c.E == 2.0;
        (z % 2 ? left : right).push_back(c.yield_stress);
    }
    // KS critical value at level 1e-3 is about 1.95 / sqrt(n).
    CHECK(oracle::ks_uniform(u) < 1.95 / std::sqrt(double(n)));
    CHECK(std::abs(heavy / double(n) - 0.5) < 4.0 * 0.5 / std::sqrt(double(n)));
    CHECK(oracle::ks_two_sample(left, right) < 1.95 * std::sqrt(2.0 / (n / 2.0)));
    // E and sigma_y of one cell are independent: correlation near zero.
    double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
    for (int z = 0; z < n; ++z) {
        const CellParameters c = w.cell_parameters({3, z, 0});
        sx += c.E;
        sy += c.yield_stress;
        sxy += c.E * c.yield_stress;
        sxx += c.E * c.E;
        syy += c.yield_stress * c.yield_stress;
    }
    const double cov = sxy / n - sx / n * sy / n;
    const double corr = cov / std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
    CHECK(std::abs(corr) < 4.0 / std::sqrt(double(n)));
}

TEST_CASE("ergodic average of the point mass is exact") {
    const auto law = std::make_shared<const ProbabilityLaw>(ProbabilityLaw::constant(2, CellParameters{2.0, 0.3, 0.7, 0.1}));
    const Realization w = sample_realization(law, 1);
    CHECK(ergodic_average_parameters(w, [](const CellParameters& c) { return c.yield_stress; }, 3.3) ==
          doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("ergodic average equals the brute-force cell sum") {
    const auto law = two_phase();
    const Realization w = sample_realization(law, 9);
    const double L = 2.5;
    // Fine midpoint rule on [-L, L]^2 (each sample point lies inside one cell).
    const int n = 500;
    double acc = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const SmallVector x = vec(-L + 2 * L * (i + 0.5) / n, -L + 2 * L * (j + 0.5) / n);
            acc += w.evaluate_parameters(x, 1.0).yield_stress;
        }
    acc /= double(n) * n;
    const double exact = ergodic_average_parameters(w, [](const CellParameters& c) { return c.yield_stress; }, L);
    // The midpoint rule misclassifies O(n) of n^2 points near cell edges.
    CHECK(std::abs(acc - exact) < 5e-3);
}

TEST_CASE("periodic medium repeats an N^d block") {
    const auto law = two_phase();
    const PeriodicMedium med(sample_realization(law, 5), 3);
    gen::Source g(4);
    for (int i = 0; i < 100; ++i) {
        const SmallVector x = vec(g.uniform(0, 3), g.uniform(0, 3));
        const CellParameters a = med.parameters_at(x), b = med.parameters_at(x + vec(3, -3));
        CHECK(a.yield_stress == b.yield_stress);
    }
    std::set<double> values;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) values.insert(med.parameters_at(vec(i + 0.5, j + 0.5)).yield_stress);
    CHECK(values.size() == 9);
    CHECK_THROWS_AS(PeriodicMedium(sample_realization(law, 5), 0), ConfigError);
}
