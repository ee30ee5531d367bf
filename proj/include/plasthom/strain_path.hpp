#pragma once

#include "plasthom/tensor.hpp"

#include <iosfwd>
#include <vector>

namespace plasthom {

/// Piecewise-linear macroscopic strain history with vanishing initial value.
class StrainPath {
public:
    StrainPath() = default;
    /// Throws ConfigError unless knots are strictly increasing, start at 0,
    /// values are finite, share one dimension, and values[0] == 0.
    StrainPath(std::vector<double> knots, std::vector<SymTensor> values);

    /// t -> t/T * xi on [0, T].
    static StrainPath linear(const SymTensor& xi, double T);

    int dim() const { return values_.empty() ? 0 : values_.front().dim(); }
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<SymTensor>& values() const { return values_; }
    double end_time() const { return knots_.back(); }

    /// Linear interpolation; constant extrapolation beyond the last knot.
    SymTensor at(double t) const;

    /// (int_0^T |xi|^2 + |xi'|^2)^{1/2}, exact for the piecewise-linear path.
    double h1_norm() const;

    /// Pointwise linear combination on the union of both knot sets.
    friend StrainPath combine(const StrainPath& a, double wa, const StrainPath& b, double wb);

    /// CSV rows "t, c_1, ..., c_k" with Mandel components; '#' lines and a
    /// non-numeric header line are skipped.
    static StrainPath read_csv(std::istream& is, int dim);

private:
    std::vector<double> knots_;
    std::vector<SymTensor> values_;
};

/// 0 = t_0 < ... < t_steps = T, uniform.
std::vector<double> uniform_grid(double T, int steps);
/// Throws ConfigError unless the grid starts at 0 and is strictly increasing.
void check_time_grid(const std::vector<double>& grid);

/// Discrete H^1(0,T; X) norm from per-step squared X-norms a_m and squared
/// increment norms b_m: (sum_{m>=1} dt_m a_m + b_m / dt_m)^{1/2}.
double discrete_h1_norm(const std::vector<double>& times, const std::vector<double>& sq_norms,
                        const std::vector<double>& sq_increment_norms);

}  // namespace plasthom
