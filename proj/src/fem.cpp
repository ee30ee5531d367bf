#include "plasthom/fem.hpp"

#include "plasthom/errors.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <string>

namespace plasthom {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void check_element(const P1Space& space, int k) {
    if (k < 0 || k >= space.mesh().num_elements())
        throw ConfigError("element index " + std::to_string(k) + " out of range");
}

void check_nodal(const P1Space& space, const Eigen::VectorXd& u) {
    if (u.size() != space.num_nodal()) throw ConfigError("nodal vector has the wrong size");
}

}  // namespace

P1Space::P1Space(std::shared_ptr<const SimplicialMesh> mesh, DofConstraint constraint)
    : mesh_(std::move(mesh)), constraint_(constraint) {
    if (!mesh_) throw ConfigError("P1Space needs a mesh");
    const SimplicialMesh& m = *mesh_;
    check_dim(m.dim);
    const int d = m.dim;
    const int nv = m.num_vertices();
    if (m.is_periodic() && constraint == DofConstraint::DirichletBoundary)
        throw ConfigError("Dirichlet constraints on a periodic mesh");
    if (!m.is_periodic() && constraint == DofConstraint::PinFirstVertex)
        throw ConfigError("vertex pinning is only used on periodic meshes");
    if (constraint == DofConstraint::DirichletBoundary && static_cast<int>(m.boundary.size()) != nv)
        throw ConfigError("mesh has no boundary markers");

    dof_.assign(static_cast<std::size_t>(d * nv), -1);
    const int pinned = m.is_periodic() ? m.master(0) : -1;
    for (int v = 0; v < nv; ++v) {
        if (m.master(v) != v) continue;
        if (constraint == DofConstraint::DirichletBoundary && m.boundary[v]) continue;
        if (constraint == DofConstraint::PinFirstVertex && v == pinned) continue;
        for (int i = 0; i < d; ++i) dof_[d * v + i] = num_free_++;
    }
    for (int v = 0; v < nv; ++v) {
        const int mv = m.master(v);
        if (mv != v)
            for (int i = 0; i < d; ++i) dof_[d * v + i] = dof_[d * mv + i];
    }

    const int ne = m.num_elements();
    const int k = mandel_size(d);
    volume_.resize(static_cast<std::size_t>(ne));
    grads_.resize(static_cast<std::size_t>(ne));
    B_.resize(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        const auto& s = m.simplices[e];
        SmallMatrix J(d, d);
        for (int i = 0; i < d; ++i) J.col(i) = m.vertices[s[i + 1]] - m.vertices[s[0]];
        const SmallMatrix Jinv = J.inverse();
        BarycentricGradients G(d + 1, d);
        G.bottomRows(d) = Jinv;
        G.row(0) = -Jinv.colwise().sum();
        grads_[e] = G;
        volume_[e] = m.volume(e);
        StrainMatrix B = StrainMatrix::Zero(k, d * (d + 1));
        for (int I = 0; I < k; ++I) {
            const auto [i, j] = mandel_index(d, I);
            for (int a = 0; a <= d; ++a) {
                if (i == j) {
                    B(I, a * d + i) = G(a, i);
                } else {
                    B(I, a * d + i) += kInvSqrt2 * G(a, j);
                    B(I, a * d + j) += kInvSqrt2 * G(a, i);
                }
            }
        }
        B_[e] = B;
    }
}

bool P1Space::vertex_constrained(int v) const { return dof(v, 0) < 0; }

const BarycentricGradients& P1Space::gradients(int k) const { return grads_[static_cast<std::size_t>(k)]; }

std::vector<int> P1Space::element_dofs(int k) const {
    const int d = dim();
    const auto& s = mesh_->simplices[k];
    std::vector<int> out(static_cast<std::size_t>(d * (d + 1)));
    for (int a = 0; a <= d; ++a)
        for (int i = 0; i < d; ++i) out[a * d + i] = dof(s[a], i);
    return out;
}

Eigen::VectorXd P1Space::element_values(const Eigen::VectorXd& nodal, int k) const {
    const int d = dim();
    const auto& s = mesh_->simplices[k];
    Eigen::VectorXd out(d * (d + 1));
    for (int a = 0; a <= d; ++a)
        for (int i = 0; i < d; ++i) out[a * d + i] = nodal[d * s[a] + i];
    return out;
}

Eigen::VectorXd P1Space::expand(const Eigen::VectorXd& free, const Eigen::VectorXd& fixed) const {
    if (free.size() != num_free_) throw ConfigError("free vector has the wrong size");
    if (fixed.size() != 0 && fixed.size() != num_nodal()) throw ConfigError("fixed vector has the wrong size");
    Eigen::VectorXd out(num_nodal());
    for (int n = 0; n < num_nodal(); ++n) {
        const int g = dof_[n];
        out[n] = g >= 0 ? free[g] : (fixed.size() ? fixed[n] : 0.0);
    }
    return out;
}

Eigen::VectorXd P1Space::restrict_free(const Eigen::VectorXd& nodal) const {
    check_nodal(*this, nodal);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_free_);
    for (int n = 0; n < num_nodal(); ++n)
        if (dof_[n] >= 0) out[dof_[n]] = nodal[n];
    return out;
}

Eigen::VectorXd P1Space::interpolate(const VectorField& f) const {
    const int d = dim();
    const SimplicialMesh& m = *mesh_;
    Eigen::VectorXd out(num_nodal());
    for (int v = 0; v < m.num_vertices(); ++v) {
        const SmallVector val = f(m.vertices[m.master(v)]);
        if (val.size() != d) throw ConfigError("vector field returned the wrong dimension");
        for (int i = 0; i < d; ++i) out[d * v + i] = val[i];
    }
    return out;
}

void P1Space::remove_mean(Eigen::VectorXd& nodal) const {
    check_nodal(*this, nodal);
    const int d = dim();
    SmallVector mean = SmallVector::Zero(d);
    double vol = 0.0;
    for (int e = 0; e < mesh_->num_elements(); ++e) {
        const auto& s = mesh_->simplices[e];
        SmallVector avg = SmallVector::Zero(d);
        for (int a = 0; a <= d; ++a) avg += nodal.segment(d * s[a], d);
        mean += volume_[e] * avg / (d + 1);
        vol += volume_[e];
    }
    mean /= vol;
    for (int v = 0; v < mesh_->num_vertices(); ++v) nodal.segment(d * v, d) -= mean;
}

SymTensor element_strain(const P1Space& space, const Eigen::VectorXd& u, int k) {
    check_element(space, k);
    check_nodal(space, u);
    return SymTensor(space.dim(), space.strain_matrix(k) * space.element_values(u, k));
}

SmallMatrix element_gradient(const P1Space& space, const Eigen::VectorXd& u, int k) {
    check_element(space, k);
    check_nodal(space, u);
    const int d = space.dim();
    const BarycentricGradients& G = space.gradients(k);
    const auto& s = space.mesh().simplices[k];
    SmallMatrix out = SmallMatrix::Zero(d, d);
    for (int a = 0; a <= d; ++a) out += u.segment(d * s[a], d) * G.row(a);
    return out;
}

double sparse_inf_norm(const SparseMatrix& A) {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
    for (int c = 0; c < A.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(A, c); it; ++it) rows[it.row()] += std::abs(it.value());
    return rows.size() ? rows.maxCoeff() : 0.0;
}

void check_symmetric(const SparseMatrix& A) {
    if (A.rows() != A.cols()) throw NumericalError("assembled operator is not square", -1, 0.0);
    const SparseMatrix D = SparseMatrix(A.transpose()) - A;
    const double asym = sparse_inf_norm(D);
    if (asym > 1e-12 * sparse_inf_norm(A)) throw NumericalError("assembled operator is not symmetric", -1, asym);
}

SparseMatrix assemble_stiffness(const P1Space& space, const std::vector<MandelMatrix>& element_stiffness) {
    const int ne = space.mesh().num_elements();
    if (static_cast<int>(element_stiffness.size()) != ne) throw ConfigError("one stiffness per element required");
    const int d = space.dim();
    const int nloc = d * (d + 1);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(ne * nloc * nloc));
    for (int e = 0; e < ne; ++e) {
        const StrainMatrix& B = space.strain_matrix(e);
        const ElementMatrix Ke = space.volume(e) * B.transpose() * element_stiffness[e] * B;
        const auto dofs = space.element_dofs(e);
        for (int a = 0; a < nloc; ++a) {
            if (dofs[a] < 0) continue;
            for (int b = 0; b < nloc; ++b)
                if (dofs[b] >= 0) trip.emplace_back(dofs[a], dofs[b], Ke(a, b));
        }
    }
    SparseMatrix A(space.num_free(), space.num_free());
    A.setFromTriplets(trip.begin(), trip.end());
    check_symmetric(A);
    return A;
}

Eigen::VectorXd assemble_internal(const P1Space& space, const std::vector<MandelVector>& element_stress) {
    const int ne = space.mesh().num_elements();
    if (static_cast<int>(element_stress.size()) != ne) throw ConfigError("one stress per element required");
    Eigen::VectorXd r = Eigen::VectorXd::Zero(space.num_free());
    for (int e = 0; e < ne; ++e) {
        const Eigen::VectorXd fe = space.volume(e) * space.strain_matrix(e).transpose() * element_stress[e];
        const auto dofs = space.element_dofs(e);
        for (std::size_t a = 0; a < dofs.size(); ++a)
            if (dofs[a] >= 0) r[dofs[a]] += fe[static_cast<Eigen::Index>(a)];
    }
    return r;
}

void element_quadrature(const SimplicialMesh& mesh, int k, std::vector<SmallVector>& points,
                        std::vector<double>& weights, std::vector<Eigen::Vector4d>* barycentric) {
    const int d = mesh.dim;
    const double vol = mesh.volume(k);
    std::vector<Eigen::Vector4d> lam;
    if (d == 2) {
        const double a = 2.0 / 3.0, b = 1.0 / 6.0;
        lam = {{a, b, b, 0}, {b, a, b, 0}, {b, b, a, 0}};
    } else {
        const double a = 0.5854101966249685, b = 0.1381966011250105;
        lam = {{a, b, b, b}, {b, a, b, b}, {b, b, a, b}, {b, b, b, a}};
    }
    points.clear();
    weights.clear();
    const auto& s = mesh.simplices[k];
    for (const auto& l : lam) {
        SmallVector x = SmallVector::Zero(d);
        for (int a = 0; a <= d; ++a) x += l[a] * mesh.vertices[s[a]];
        points.push_back(x);
        weights.push_back(vol / static_cast<double>(lam.size()));
    }
    if (barycentric) *barycentric = lam;
}

Eigen::VectorXd assemble_load(const P1Space& space, const VectorField& f) {
    const int d = space.dim();
    Eigen::VectorXd r = Eigen::VectorXd::Zero(space.num_free());
    std::vector<SmallVector> pts;
    std::vector<double> w;
    std::vector<Eigen::Vector4d> lam;
    for (int e = 0; e < space.mesh().num_elements(); ++e) {
        element_quadrature(space.mesh(), e, pts, w, &lam);
        const auto dofs = space.element_dofs(e);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const SmallVector fx = f(pts[q]);
            if (fx.size() != d) throw ConfigError("load returned the wrong dimension");
            for (int a = 0; a <= d; ++a)
                for (int i = 0; i < d; ++i) {
                    const int g = dofs[a * d + i];
                    if (g >= 0) r[g] += w[q] * lam[q][a] * fx[i];
                }
        }
    }
    return r;
}

struct LinearSolver::Impl {
    LinearSolverKind kind;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    Eigen::VectorXi pattern_outer, pattern_inner;
    bool analyzed = false;

    bool same_pattern(const SparseMatrix& A) const {
        if (!analyzed) return false;
        if (pattern_outer.size() != A.outerSize() + 1 || pattern_inner.size() != A.nonZeros()) return false;
        for (Eigen::Index i = 0; i <= A.outerSize(); ++i)
            if (pattern_outer[i] != A.outerIndexPtr()[i]) return false;
        for (Eigen::Index i = 0; i < A.nonZeros(); ++i)
            if (pattern_inner[i] != A.innerIndexPtr()[i]) return false;
        return true;
    }
};

LinearSolver::LinearSolver(LinearSolverKind kind) : impl_(std::make_unique<Impl>()) { impl_->kind = kind; }
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

Eigen::VectorXd LinearSolver::solve(const SparseMatrix& A, const Eigen::VectorXd& b, LinearSolveInfo* info) {
    if (A.rows() != b.size() || A.cols() != b.size()) throw ConfigError("linear system size mismatch");
    if (b.size() == 0) {
        if (info) *info = {};
        return b;
    }
    const double bnorm = b.norm();
    Eigen::VectorXd x;
    int iters = 1;
    if (impl_->kind == LinearSolverKind::Direct) {
        SparseMatrix Ac = A;
        Ac.makeCompressed();
        if (!impl_->same_pattern(Ac)) {
            impl_->ldlt.analyzePattern(Ac);
            impl_->pattern_outer = Eigen::Map<const Eigen::VectorXi>(Ac.outerIndexPtr(), Ac.outerSize() + 1);
            impl_->pattern_inner = Eigen::Map<const Eigen::VectorXi>(Ac.innerIndexPtr(), Ac.nonZeros());
            impl_->analyzed = true;
        }
        impl_->ldlt.factorize(Ac);
        if (impl_->ldlt.info() != Eigen::Success || !(impl_->ldlt.vectorD().minCoeff() > 0.0))
            throw NumericalError("sparse factorization failed: matrix not positive definite", -1, 0.0);
        x = impl_->ldlt.solve(b);
    } else {
        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
        cg.setTolerance(1e-10);
        cg.setMaxIterations(100000);
        cg.compute(A);
        x = cg.solve(b);
        iters = static_cast<int>(cg.iterations());
        if (cg.info() != Eigen::Success)
            throw NumericalError("conjugate gradient did not converge", -1, cg.error());
    }
    const double res = bnorm > 0.0 ? (A * x - b).norm() / bnorm : (A * x - b).norm();
    if (!std::isfinite(res)) throw NumericalError("linear solve produced non-finite values", -1, res);
    if (info) *info = {iters, res};
    return x;
}

Eigen::VectorXd solve_elastic(const P1Space& space, const std::vector<FourthOrderMap>& stiffness,
                              const VectorField& f, const VectorField& g, LinearSolverKind kind,
                              LinearSolveInfo* info) {
    const int ne = space.mesh().num_elements();
    if (static_cast<int>(stiffness.size()) != ne) throw ConfigError("one stiffness map per element required");
    std::vector<MandelMatrix> S(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        if (stiffness[e].dim() != space.dim()) throw ConfigError("stiffness map has the wrong dimension");
        S[e] = stiffness[e].matrix();
    }
    Eigen::VectorXd fixed = Eigen::VectorXd::Zero(space.num_nodal());
    if (space.constraint() == DofConstraint::DirichletBoundary && g) fixed = space.interpolate(g);
    // u = fixed on constrained dofs; solve K du = load - K u_fixed on free dofs.
    const Eigen::VectorXd u0 = space.expand(Eigen::VectorXd::Zero(space.num_free()), fixed);
    std::vector<MandelVector> stress(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) stress[e] = S[e] * element_strain(space, u0, e).comps();
    Eigen::VectorXd rhs = -assemble_internal(space, stress);
    if (f) rhs += assemble_load(space, f);
    LinearSolver solver(kind);
    const Eigen::VectorXd x = solver.solve(assemble_stiffness(space, S), rhs, info);
    Eigen::VectorXd u = space.expand(x, fixed);
    if (space.constraint() == DofConstraint::PinFirstVertex) space.remove_mean(u);
    return u;
}

H1Function affine_field(const SmallMatrix& xi, const SmallVector& a) {
    if (xi.rows() != xi.cols() || xi.rows() != a.size()) throw ConfigError("affine field dimension mismatch");
    return {[xi, a](const SmallVector& x) -> SmallVector { return xi * x + a; },
            [xi](const SmallVector&) -> SmallMatrix { return xi; }};
}

RieszProjector::RieszProjector(std::shared_ptr<const SimplicialMesh> mesh)
    : space_(std::move(mesh), DofConstraint::None),
      factor_(std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>()) {
    const SimplicialMesh& m = space_.mesh();
    if (m.is_periodic()) throw ConfigError("Riesz projection is defined on non-periodic meshes");
    const int d = m.dim;
    std::vector<Eigen::Triplet<double>> trip;
    for (int e = 0; e < m.num_elements(); ++e) {
        const BarycentricGradients& G = space_.gradients(e);
        const double vol = space_.volume(e);
        const double mass = vol / ((d + 1) * (d + 2));
        for (int a = 0; a <= d; ++a)
            for (int b = 0; b <= d; ++b) {
                const double val = (a == b ? 2.0 : 1.0) * mass + vol * G.row(a).dot(G.row(b));
                for (int i = 0; i < d; ++i)
                    trip.emplace_back(space_.dof(m.simplices[e][a], i), space_.dof(m.simplices[e][b], i), val);
            }
    }
    SparseMatrix A(space_.num_free(), space_.num_free());
    A.setFromTriplets(trip.begin(), trip.end());
    check_symmetric(A);
    factor_->compute(A);
    if (factor_->info() != Eigen::Success) throw NumericalError("Riesz matrix factorization failed", -1, 0.0);
}

Eigen::VectorXd RieszProjector::project(const H1Function& U) const {
    const SimplicialMesh& m = space_.mesh();
    const int d = m.dim;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space_.num_free());
    std::vector<SmallVector> pts;
    std::vector<double> w;
    std::vector<Eigen::Vector4d> lam;
    for (int e = 0; e < m.num_elements(); ++e) {
        element_quadrature(m, e, pts, w, &lam);
        const BarycentricGradients& G = space_.gradients(e);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const SmallVector val = U.value(pts[q]);
            const SmallMatrix grad = U.gradient(pts[q]);
            if (val.size() != d || grad.rows() != d || grad.cols() != d)
                throw ConfigError("H1 function returned the wrong dimension");
            for (int a = 0; a <= d; ++a)
                for (int i = 0; i < d; ++i)
                    rhs[space_.dof(m.simplices[e][a], i)] +=
                        w[q] * (lam[q][a] * val[i] + grad.row(i).dot(G.row(a)));
        }
    }
    return space_.expand(factor_->solve(rhs));
}

std::vector<Eigen::VectorXd> riesz_project(const std::vector<H1Function>& series,
                                           std::shared_ptr<const SimplicialMesh> mesh) {
    RieszProjector proj(std::move(mesh));
    std::vector<Eigen::VectorXd> out;
    out.reserve(series.size());
    for (const auto& U : series) out.push_back(proj.project(U));
    return out;
}

double l2_error(const P1Space& space, const Eigen::VectorXd& u, const VectorField& exact) {
    check_nodal(space, u);
    const SimplicialMesh& m = space.mesh();
    const int d = m.dim;
    std::vector<SmallVector> pts;
    std::vector<double> w;
    std::vector<Eigen::Vector4d> lam;
    double err = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) {
        element_quadrature(m, e, pts, w, &lam);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            SmallVector uh = SmallVector::Zero(d);
            for (int a = 0; a <= d; ++a) uh += lam[q][a] * u.segment(d * m.simplices[e][a], d);
            const SmallVector diff = exact ? SmallVector(uh - exact(pts[q])) : uh;
            err += w[q] * diff.squaredNorm();
        }
    }
    return std::sqrt(err);
}

double l2_norm(const P1Space& space, const Eigen::VectorXd& u) { return l2_error(space, u, VectorField{}); }

double h1_seminorm_error(const P1Space& space, const Eigen::VectorXd& u, const GradientField& exact) {
    const SimplicialMesh& m = space.mesh();
    std::vector<SmallVector> pts;
    std::vector<double> w;
    double err = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) {
        const SmallMatrix gh = element_gradient(space, u, e);
        element_quadrature(m, e, pts, w);
        for (std::size_t q = 0; q < pts.size(); ++q) err += w[q] * (gh - exact(pts[q])).squaredNorm();
    }
    return std::sqrt(err);
}

}  // namespace plasthom
