#pragma once

// Random checkerboard media.
//
// A realization assigns i.i.d. material parameters to the cells z + [0,1)^d,
// z in Z^d, and translates the lattice by a uniform shift. Cell values are a
// counter-based hash of (seed, z, parameter), so the field is defined on all
// of R^d without storage and every query is a pure function of its inputs.
// The shift group acts by adding to the shift: tau_y w has shift s + y.

#include "plasthom/tensor.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace plasthom {

class ParameterDistribution {
public:
    enum class Kind { Point, Uniform, Discrete };

    static ParameterDistribution point(double value);
    static ParameterDistribution uniform(double lo, double hi);
    /// Weights are normalized; they must be non-negative with a positive sum.
    static ParameterDistribution discrete(std::vector<double> values, std::vector<double> weights);

    Kind kind() const { return kind_; }
    /// Inverse-CDF sampling from u in [0,1).
    double sample(double u) const;
    double min() const;
    double max() const;
    double mean() const;
    double variance() const;
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    Kind kind_ = Kind::Point;
    std::vector<double> values_;   // point: {v}; uniform: {lo, hi}; discrete: support
    std::vector<double> weights_;  // discrete only
};

/// Material parameters of one checkerboard cell.
struct CellParameters {
    double E = 1.0;
    double nu = 0.3;
    double yield_stress = 1.0;
    double hardening = 0.1;
};

/// Independent per-cell distributions of (E, nu, sigma_y, H). The hardening
/// map is B = H Id.
class ProbabilityLaw {
public:
    /// Validates the support and computes the law-level ellipticity constants.
    ProbabilityLaw(int dim, ParameterDistribution E, ParameterDistribution nu,
                   ParameterDistribution yield_stress, ParameterDistribution hardening);

    /// Point-mass law.
    static ProbabilityLaw constant(int dim, const CellParameters& p);

    int dim() const { return dim_; }
    const ParameterDistribution& E() const { return E_; }
    const ParameterDistribution& nu() const { return nu_; }
    const ParameterDistribution& yield_stress() const { return yield_stress_; }
    const ParameterDistribution& hardening() const { return hardening_; }
    /// Largest gamma, beta such that every realizable C, B is elliptic.
    double gamma() const { return gamma_; }
    double beta() const { return beta_; }
    bool is_point_mass() const;

    MaterialPoint material(const CellParameters& p) const;

private:
    int dim_;
    ParameterDistribution E_, nu_, yield_stress_, hardening_;
    double gamma_ = 0.0;
    double beta_ = 0.0;
};

/// One sampled medium.
class Realization {
public:
    Realization(std::shared_ptr<const ProbabilityLaw> law, std::uint64_t seed, SmallVector shift);

    std::uint64_t seed() const { return seed_; }
    const SmallVector& shift() const { return shift_; }
    const ProbabilityLaw& law() const { return *law_; }
    std::shared_ptr<const ProbabilityLaw> law_ptr() const { return law_; }
    int dim() const { return law_->dim(); }

    /// Parameters of lattice cell z (independent of the shift).
    CellParameters cell_parameters(const std::array<std::int64_t, 3>& z) const;
    /// Lattice cell containing x / eps + shift.
    std::array<std::int64_t, 3> cell_of(const SmallVector& x, double eps) const;

    CellParameters evaluate_parameters(const SmallVector& x, double eps) const;
    MaterialPoint evaluate(const SmallVector& x, double eps) const;

private:
    std::shared_ptr<const ProbabilityLaw> law_;
    std::uint64_t seed_;
    SmallVector shift_;
};

/// Realization with seed-derived uniform shift in [0,1)^d.
Realization sample_realization(std::shared_ptr<const ProbabilityLaw> law, std::uint64_t seed);

/// tau_y w.
Realization shifted(const Realization& w, const SmallVector& y);

/// Cube [-L, L]^d average of g over the unit-scale realization, integrated
/// exactly over the (possibly cut) cells.
double ergodic_average(const Realization& w, const std::function<double(const MaterialPoint&)>& g, double L);
double ergodic_average_parameters(const Realization& w, const std::function<double(const CellParameters&)>& g,
                                  double L);

/// N^d block of cells of a realization, repeated periodically on the torus [0,N)^d.
class PeriodicMedium {
public:
    PeriodicMedium(Realization base, int N);

    int N() const { return N_; }
    const Realization& base() const { return base_; }
    /// x in torus coordinates; the cell index is floor(x) mod N.
    CellParameters parameters_at(const SmallVector& x) const;
    MaterialPoint material_at(const SmallVector& x) const;

private:
    Realization base_;
    int N_;
};

/// 64-bit mixing function used for cell hashing.
std::uint64_t splitmix64(std::uint64_t x);
/// Uniform double in [0,1) from a hash value.
double hash_to_unit(std::uint64_t h);

}  // namespace plasthom
