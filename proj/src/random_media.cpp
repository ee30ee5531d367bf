#include "plasthom/random_media.hpp"

#include "plasthom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace plasthom {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double hash_to_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

namespace {

enum Stream : std::uint64_t { kStreamE = 1, kStreamNu = 2, kStreamYield = 3, kStreamHardening = 4, kStreamShift = 99 };

std::uint64_t cell_hash(std::uint64_t seed, const std::array<std::int64_t, 3>& z, std::uint64_t stream) {
    std::uint64_t h = splitmix64(seed);
    for (auto c : z) h = splitmix64(h ^ static_cast<std::uint64_t>(c));
    return splitmix64(h ^ (stream * 0xD1B54A32D192ED03ULL));
}

}  // namespace

ParameterDistribution ParameterDistribution::point(double value) {
    if (!std::isfinite(value)) throw ConfigError("point mass must be finite");
    ParameterDistribution d;
    d.kind_ = Kind::Point;
    d.values_ = {value};
    return d;
}

ParameterDistribution ParameterDistribution::uniform(double lo, double hi) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo <= hi))
        throw ConfigError("uniform distribution needs finite lo <= hi");
    ParameterDistribution d;
    d.kind_ = Kind::Uniform;
    d.values_ = {lo, hi};
    return d;
}

ParameterDistribution ParameterDistribution::discrete(std::vector<double> values, std::vector<double> weights) {
    if (values.empty()) throw ConfigError("discrete distribution has empty support");
    if (weights.empty()) weights.assign(values.size(), 1.0);
    if (weights.size() != values.size()) throw ConfigError("discrete distribution: values/weights size mismatch");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("discrete distribution: weights must be >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw ConfigError("discrete distribution: weights sum to zero");
    for (double v : values)
        if (!std::isfinite(v)) throw ConfigError("discrete distribution: non-finite value");
    for (double& w : weights) w /= total;
    ParameterDistribution d;
    d.kind_ = Kind::Discrete;
    d.values_ = std::move(values);
    d.weights_ = std::move(weights);
    return d;
}

double ParameterDistribution::sample(double u) const {
    switch (kind_) {
        case Kind::Point:
            return values_[0];
        case Kind::Uniform:
            return values_[0] + u * (values_[1] - values_[0]);
        case Kind::Discrete: {
            double acc = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                acc += weights_[i];
                if (u < acc) return values_[i];
            }
            // u within round-off of 1: last atom with positive weight.
            for (std::size_t i = values_.size(); i-- > 0;)
                if (weights_[i] > 0.0) return values_[i];
            return values_.back();
        }
    }
    return values_[0];
}

double ParameterDistribution::min() const {
    if (kind_ != Kind::Discrete) return values_[0];
    double m = INFINITY;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (weights_[i] > 0.0) m = std::min(m, values_[i]);
    return m;
}

double ParameterDistribution::max() const {
    if (kind_ == Kind::Point) return values_[0];
    if (kind_ == Kind::Uniform) return values_[1];
    double m = -INFINITY;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (weights_[i] > 0.0) m = std::max(m, values_[i]);
    return m;
}

double ParameterDistribution::mean() const {
    switch (kind_) {
        case Kind::Point:
            return values_[0];
        case Kind::Uniform:
            return 0.5 * (values_[0] + values_[1]);
        case Kind::Discrete:
            return std::inner_product(values_.begin(), values_.end(), weights_.begin(), 0.0);
    }
    return values_[0];
}

double ParameterDistribution::variance() const {
    switch (kind_) {
        case Kind::Point:
            return 0.0;
        case Kind::Uniform: {
            const double w = values_[1] - values_[0];
            return w * w / 12.0;
        }
        case Kind::Discrete: {
            const double m = mean();
            double v = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) v += weights_[i] * (values_[i] - m) * (values_[i] - m);
            return v;
        }
    }
    return 0.0;
}

ProbabilityLaw::ProbabilityLaw(int dim, ParameterDistribution E, ParameterDistribution nu,
                               ParameterDistribution yield_stress, ParameterDistribution hardening)
    : dim_(dim), E_(std::move(E)), nu_(std::move(nu)), yield_stress_(std::move(yield_stress)),
      hardening_(std::move(hardening)) {
    check_dim(dim);
    if (!(E_.min() > 0.0)) throw ConfigError("law: E must be positive on its support");
    if (!(nu_.min() > -1.0 && nu_.max() < 0.5)) throw ConfigError("law: nu must lie in (-1, 1/2) on its support");
    if (!(yield_stress_.min() > 0.0)) throw ConfigError("law: sigma_y must be positive on its support");
    if (!(hardening_.min() > 0.0)) throw ConfigError("law: hardening must be positive on its support");

    // Compliance eigenvalues are (1+nu)/E and v(nu)/E with v concave in nu, so
    // the extremes over the support sit at the endpoints of E and nu, plus the
    // interior maximum of v.
    std::vector<double> nus{nu_.min(), nu_.max()};
    const double nu_peak = dim == 2 ? -0.25 : -1.0;  // argmax of (1+nu)(1-2nu); 3D volumetric is monotone
    if (nu_peak > nu_.min() && nu_peak < nu_.max()) nus.push_back(nu_peak);
    double lo = INFINITY, hi = 0.0;
    for (double e : {E_.min(), E_.max()}) {
        for (double n : nus) {
            MandelVector ev = isotropic_compliance(e, n, dim).eigenvalues();
            lo = std::min(lo, ev.minCoeff());
            hi = std::max(hi, ev.maxCoeff());
        }
    }
    gamma_ = std::min({1.0, lo, 1.0 / hi});
    beta_ = std::min({1.0, hardening_.min(), 1.0 / hardening_.max()});
}

ProbabilityLaw ProbabilityLaw::constant(int dim, const CellParameters& p) {
    return ProbabilityLaw(dim, ParameterDistribution::point(p.E), ParameterDistribution::point(p.nu),
                          ParameterDistribution::point(p.yield_stress), ParameterDistribution::point(p.hardening));
}

bool ProbabilityLaw::is_point_mass() const {
    auto pm = [](const ParameterDistribution& d) { return d.min() == d.max(); };
    return pm(E_) && pm(nu_) && pm(yield_stress_) && pm(hardening_);
}

MaterialPoint ProbabilityLaw::material(const CellParameters& p) const {
    MaterialPoint m;
    m.compliance = isotropic_compliance(p.E, p.nu, dim_);
    m.hardening = FourthOrderMap::identity(dim_, p.hardening, MapRole::Hardening);
    m.yield_stress = p.yield_stress;
    return m;
}

Realization::Realization(std::shared_ptr<const ProbabilityLaw> law, std::uint64_t seed, SmallVector shift)
    : law_(std::move(law)), seed_(seed), shift_(std::move(shift)) {
    if (!law_) throw ConfigError("realization needs a law");
    if (shift_.size() != law_->dim()) throw ConfigError("realization shift has wrong dimension");
}

CellParameters Realization::cell_parameters(const std::array<std::int64_t, 3>& z) const {
    CellParameters p;
    p.E = law_->E().sample(hash_to_unit(cell_hash(seed_, z, kStreamE)));
    p.nu = law_->nu().sample(hash_to_unit(cell_hash(seed_, z, kStreamNu)));
    p.yield_stress = law_->yield_stress().sample(hash_to_unit(cell_hash(seed_, z, kStreamYield)));
    p.hardening = law_->hardening().sample(hash_to_unit(cell_hash(seed_, z, kStreamHardening)));
    return p;
}

std::array<std::int64_t, 3> Realization::cell_of(const SmallVector& x, double eps) const {
    std::array<std::int64_t, 3> z{0, 0, 0};
    for (int i = 0; i < dim(); ++i) z[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor(x[i] / eps + shift_[i]));
    return z;
}

CellParameters Realization::evaluate_parameters(const SmallVector& x, double eps) const {
    if (!(eps > 0.0)) throw ConfigError("scale eps must be positive");
    if (x.size() != dim()) throw ConfigError("evaluation point has wrong dimension");
    return cell_parameters(cell_of(x, eps));
}

MaterialPoint Realization::evaluate(const SmallVector& x, double eps) const {
    return law_->material(evaluate_parameters(x, eps));
}

Realization sample_realization(std::shared_ptr<const ProbabilityLaw> law, std::uint64_t seed) {
    if (!law) throw ConfigError("sample_realization needs a law");
    const int dim = law->dim();
    SmallVector shift(dim);
    for (int i = 0; i < dim; ++i)
        shift[i] = hash_to_unit(cell_hash(seed, {i, 0, 0}, kStreamShift));
    return Realization(std::move(law), seed, shift);
}

Realization shifted(const Realization& w, const SmallVector& y) {
    if (y.size() != w.dim()) throw ConfigError("shift has wrong dimension");
    return Realization(w.law_ptr(), w.seed(), w.shift() + y);
}

double ergodic_average_parameters(const Realization& w, const std::function<double(const CellParameters&)>& g,
                                  double L) {
    if (!(L >= 1.0)) throw ConfigError("ergodic_average: box half-width must be >= 1");
    const int dim = w.dim();
    // Per axis: overlap lengths of the cells k + [0,1) with [-L + s, L + s].
    std::vector<std::int64_t> first(static_cast<std::size_t>(dim));
    std::vector<std::vector<double>> lengths(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        const double a = -L + w.shift()[i];
        const double b = L + w.shift()[i];
        const auto k0 = static_cast<std::int64_t>(std::floor(a));
        const auto k1 = static_cast<std::int64_t>(std::ceil(b)) - 1;
        first[static_cast<std::size_t>(i)] = k0;
        for (std::int64_t k = k0; k <= k1; ++k) {
            const double len = std::min(b, static_cast<double>(k + 1)) - std::max(a, static_cast<double>(k));
            lengths[static_cast<std::size_t>(i)].push_back(std::max(0.0, len));
        }
    }
    const std::size_t n0 = lengths[0].size();
    const std::size_t n1 = lengths[1].size();
    const std::size_t n2 = dim == 3 ? lengths[2].size() : 1;
    double total = 0.0;
    for (std::size_t c = 0; c < n2; ++c) {
        for (std::size_t b = 0; b < n1; ++b) {
            for (std::size_t a = 0; a < n0; ++a) {
                double vol = lengths[0][a] * lengths[1][b];
                std::array<std::int64_t, 3> z{first[0] + static_cast<std::int64_t>(a),
                                              first[1] + static_cast<std::int64_t>(b), 0};
                if (dim == 3) {
                    vol *= lengths[2][c];
                    z[2] = first[2] + static_cast<std::int64_t>(c);
                }
                if (vol > 0.0) total += vol * g(w.cell_parameters(z));
            }
        }
    }
    return total / std::pow(2.0 * L, dim);
}

double ergodic_average(const Realization& w, const std::function<double(const MaterialPoint&)>& g, double L) {
    const ProbabilityLaw& law = w.law();
    return ergodic_average_parameters(w, [&](const CellParameters& p) { return g(law.material(p)); }, L);
}

PeriodicMedium::PeriodicMedium(Realization base, int N) : base_(std::move(base)), N_(N) {
    if (N < 1) throw ConfigError("periodic medium needs N >= 1");
}

CellParameters PeriodicMedium::parameters_at(const SmallVector& x) const {
    std::array<std::int64_t, 3> z{0, 0, 0};
    for (int i = 0; i < base_.dim(); ++i) {
        auto c = static_cast<std::int64_t>(std::floor(x[i]));
        c %= N_;
        if (c < 0) c += N_;
        z[static_cast<std::size_t>(i)] = c;
    }
    return base_.cell_parameters(z);
}

MaterialPoint PeriodicMedium::material_at(const SmallVector& x) const {
    return base_.law().material(parameters_at(x));
}

}  // namespace plasthom
