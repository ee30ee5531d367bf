#pragma once

// Symmetric second-order tensors and fourth-order maps in Mandel notation.
//
// A symmetric d x d tensor is stored as a vector of k = d(d+1)/2 components,
// diagonal entries first, off-diagonal entries multiplied by sqrt(2):
//
//   d = 2 : (a11, a22, sqrt2 a12)
//   d = 3 : (a11, a22, a33, sqrt2 a23, sqrt2 a13, sqrt2 a12)
//
// With this scaling the Frobenius product a : b is the plain dot product of
// the component vectors, and a fourth-order map with the minor and major
// symmetries is a symmetric k x k matrix.

#include <Eigen/Dense>

#include <array>
#include <utility>

namespace plasthom {

using MandelVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>;
using MandelMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

/// Throws ConfigError unless dim is 2 or 3.
void check_dim(int dim);

/// Number of Mandel components, d(d+1)/2.
constexpr int mandel_size(int dim) { return dim * (dim + 1) / 2; }

/// Row/column pair of the I-th Mandel component.
std::pair<int, int> mandel_index(int dim, int I);

class SymTensor {
public:
    SymTensor() = default;
    explicit SymTensor(int dim);
    SymTensor(int dim, const MandelVector& comps);

    static SymTensor zero(int dim) { return SymTensor(dim); }
    static SymTensor identity(int dim);
    /// Interprets m as symmetric; only the upper triangle is read.
    static SymTensor from_symmetric_matrix(const SmallMatrix& m);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(comps_.size()); }
    const MandelVector& comps() const { return comps_; }
    double operator[](int I) const { return comps_[I]; }

    SmallMatrix to_matrix() const;
    double trace() const;
    double norm() const { return comps_.norm(); }

    SymTensor& operator+=(const SymTensor& o);
    SymTensor& operator-=(const SymTensor& o);
    SymTensor& operator*=(double s);

    friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
    friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
    friend SymTensor operator*(SymTensor a, double s) { return a *= s; }
    friend SymTensor operator*(double s, SymTensor a) { return a *= s; }
    friend SymTensor operator-(SymTensor a) { return a *= -1.0; }

private:
    int dim_ = 0;
    MandelVector comps_;
};

/// Frobenius inner product.
double inner(const SymTensor& a, const SymTensor& b);

/// (m + m^T) / 2.
SymTensor symmetrize(const SmallMatrix& m);

/// s - (tr s / d) Id.
SymTensor deviator(const SymTensor& s);

/// Mandel matrix of the deviatoric projector, Id - i i^T / d.
MandelMatrix deviatoric_projector(int dim);

enum class MapRole { Compliance, Hardening, Stiffness, Generic };

/// Symmetric linear map on the space of symmetric tensors.
class FourthOrderMap {
public:
    FourthOrderMap() = default;
    /// Throws ConfigError if matrix is not k x k or not symmetric to 1e-14 |M|_inf.
    FourthOrderMap(int dim, const MandelMatrix& matrix, MapRole role = MapRole::Generic);

    static FourthOrderMap identity(int dim, double scale = 1.0, MapRole role = MapRole::Generic);

    int dim() const { return dim_; }
    MapRole role() const { return role_; }
    const MandelMatrix& matrix() const { return matrix_; }

    SymTensor apply(const SymTensor& s) const;
    FourthOrderMap inverse(MapRole role) const;
    /// Ascending.
    MandelVector eigenvalues() const;

private:
    int dim_ = 0;
    MapRole role_ = MapRole::Generic;
    MandelMatrix matrix_;
};

/// T s. Throws ConfigError on dimension mismatch.
SymTensor apply_map(const FourthOrderMap& T, const SymTensor& s);

/// Compliance of an isotropic linear elastic solid. For d = 2 the plane-strain
/// law is used: deviatoric eigenvalue (1+nu)/E, volumetric (1+nu)(1-2nu)/E.
FourthOrderMap isotropic_compliance(double E, double nu, int dim);

/// True iff every eigenvalue lies in [gamma, 1/gamma].
bool ellipticity_check(const FourthOrderMap& T, double gamma);

/// Coefficients at one point of the medium.
struct MaterialPoint {
    FourthOrderMap compliance;  // C, strain per stress
    FourthOrderMap hardening;   // B, stress per strain
    double yield_stress = 1.0;

    int dim() const { return compliance.dim(); }
    /// Throws ConfigError unless both maps are elliptic for (gamma, beta) and yield_stress > 0.
    void validate(double gamma, double beta) const;
};

}  // namespace plasthom
