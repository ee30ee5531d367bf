#include "plasthom/tensor.hpp"

#include "plasthom/errors.hpp"

#include <cmath>
#include <string>

namespace plasthom {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;

constexpr std::array<std::pair<int, int>, 3> kIndex2{{{0, 0}, {1, 1}, {0, 1}}};
constexpr std::array<std::pair<int, int>, 6> kIndex3{{{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};
}  // namespace

void check_dim(int dim) {
    if (dim != 2 && dim != 3)
        throw ConfigError("spatial dimension must be 2 or 3, got " + std::to_string(dim));
}

std::pair<int, int> mandel_index(int dim, int I) {
    return dim == 2 ? kIndex2[static_cast<std::size_t>(I)] : kIndex3[static_cast<std::size_t>(I)];
}

SymTensor::SymTensor(int dim) : dim_(dim) {
    check_dim(dim);
    comps_ = MandelVector::Zero(mandel_size(dim));
}

SymTensor::SymTensor(int dim, const MandelVector& comps) : dim_(dim), comps_(comps) {
    check_dim(dim);
    if (comps.size() != mandel_size(dim))
        throw ConfigError("Mandel vector has wrong length for d=" + std::to_string(dim));
}

SymTensor SymTensor::identity(int dim) {
    SymTensor s(dim);
    for (int i = 0; i < dim; ++i) s.comps_[i] = 1.0;
    return s;
}

SymTensor SymTensor::from_symmetric_matrix(const SmallMatrix& m) {
    const int dim = static_cast<int>(m.rows());
    check_dim(dim);
    if (m.cols() != dim) throw ConfigError("matrix is not square");
    SymTensor s(dim);
    for (int I = 0; I < s.size(); ++I) {
        auto [i, j] = mandel_index(dim, I);
        s.comps_[I] = i == j ? m(i, j) : kSqrt2 * m(i, j);
    }
    return s;
}

SmallMatrix SymTensor::to_matrix() const {
    SmallMatrix m(dim_, dim_);
    for (int I = 0; I < size(); ++I) {
        auto [i, j] = mandel_index(dim_, I);
        if (i == j) {
            m(i, i) = comps_[I];
        } else {
            m(i, j) = comps_[I] / kSqrt2;
            m(j, i) = m(i, j);
        }
    }
    return m;
}

double SymTensor::trace() const {
    double t = 0.0;
    for (int i = 0; i < dim_; ++i) t += comps_[i];
    return t;
}

SymTensor& SymTensor::operator+=(const SymTensor& o) {
    if (o.dim_ != dim_) throw ConfigError("SymTensor dimension mismatch");
    comps_ += o.comps_;
    return *this;
}

SymTensor& SymTensor::operator-=(const SymTensor& o) {
    if (o.dim_ != dim_) throw ConfigError("SymTensor dimension mismatch");
    comps_ -= o.comps_;
    return *this;
}

SymTensor& SymTensor::operator*=(double s) {
    comps_ *= s;
    return *this;
}

double inner(const SymTensor& a, const SymTensor& b) {
    if (a.dim() != b.dim()) throw ConfigError("SymTensor dimension mismatch");
    return a.comps().dot(b.comps());
}

SymTensor symmetrize(const SmallMatrix& m) {
    const int dim = static_cast<int>(m.rows());
    check_dim(dim);
    if (m.cols() != dim) throw ConfigError("matrix is not square");
    SmallMatrix s = 0.5 * (m + m.transpose());
    return SymTensor::from_symmetric_matrix(s);
}

SymTensor deviator(const SymTensor& s) {
    const double mean = s.trace() / s.dim();
    MandelVector c = s.comps();
    for (int i = 0; i < s.dim(); ++i) c[i] -= mean;
    return SymTensor(s.dim(), c);
}

MandelMatrix deviatoric_projector(int dim) {
    check_dim(dim);
    const int k = mandel_size(dim);
    MandelVector i = SymTensor::identity(dim).comps();
    MandelMatrix P = MandelMatrix::Identity(k, k);
    P -= i * i.transpose() / dim;
    return P;
}

FourthOrderMap::FourthOrderMap(int dim, const MandelMatrix& matrix, MapRole role)
    : dim_(dim), role_(role), matrix_(matrix) {
    check_dim(dim);
    const int k = mandel_size(dim);
    if (matrix.rows() != k || matrix.cols() != k)
        throw ConfigError("fourth-order map must be " + std::to_string(k) + "x" + std::to_string(k));
    if (!matrix.allFinite()) throw ConfigError("fourth-order map has non-finite entries");
    const double scale = matrix.cwiseAbs().maxCoeff();
    const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-14 * scale) throw ConfigError("fourth-order map is not symmetric");
    // Remove the round-off asymmetry so that downstream factorizations see an exactly symmetric matrix.
    matrix_ = 0.5 * (matrix + matrix.transpose());
}

FourthOrderMap FourthOrderMap::identity(int dim, double scale, MapRole role) {
    check_dim(dim);
    const int k = mandel_size(dim);
    return FourthOrderMap(dim, scale * MandelMatrix::Identity(k, k), role);
}

SymTensor FourthOrderMap::apply(const SymTensor& s) const {
    if (s.dim() != dim_) throw ConfigError("apply_map: dimension mismatch");
    return SymTensor(dim_, matrix_ * s.comps());
}

FourthOrderMap FourthOrderMap::inverse(MapRole role) const {
    Eigen::LLT<MandelMatrix> llt(matrix_);
    if (llt.info() != Eigen::Success) throw ConfigError("fourth-order map is not positive definite");
    const int k = mandel_size(dim_);
    MandelMatrix inv = llt.solve(MandelMatrix::Identity(k, k));
    return FourthOrderMap(dim_, 0.5 * (inv + inv.transpose()), role);
}

MandelVector FourthOrderMap::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<MandelMatrix> es(matrix_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

SymTensor apply_map(const FourthOrderMap& T, const SymTensor& s) { return T.apply(s); }

FourthOrderMap isotropic_compliance(double E, double nu, int dim) {
    check_dim(dim);
    if (!(E > 0.0)) throw ConfigError("Young modulus must be positive");
    if (!(nu > -1.0 && nu < 0.5)) throw ConfigError("Poisson ratio must lie in (-1, 1/2)");
    // Spectral form: C = a_dev P_dev + a_vol (Id - P_dev).
    const double a_dev = (1.0 + nu) / E;
    const double a_vol = dim == 2 ? (1.0 + nu) * (1.0 - 2.0 * nu) / E : (1.0 - 2.0 * nu) / E;
    const int k = mandel_size(dim);
    MandelMatrix P = deviatoric_projector(dim);
    MandelMatrix C = a_dev * P + a_vol * (MandelMatrix::Identity(k, k) - P);
    return FourthOrderMap(dim, C, MapRole::Compliance);
}

bool ellipticity_check(const FourthOrderMap& T, double gamma) {
    MandelVector ev = T.eigenvalues();
    return ev.minCoeff() >= gamma && ev.maxCoeff() <= 1.0 / gamma;
}

void MaterialPoint::validate(double gamma, double beta) const {
    if (compliance.dim() != hardening.dim()) throw ConfigError("material maps differ in dimension");
    if (!(yield_stress > 0.0)) throw ConfigError("yield stress must be positive");
    if (!ellipticity_check(compliance, gamma))
        throw ConfigError("compliance violates the ellipticity bounds for gamma=" + std::to_string(gamma));
    if (!ellipticity_check(hardening, beta))
        throw ConfigError("hardening violates the ellipticity bounds for beta=" + std::to_string(beta));
}

}  // namespace plasthom
