#pragma once

// Continuous piecewise-linear vector fields on simplicial meshes.
//
// Nodal vectors are indexed by vertex: entry d*v + i is component i at vertex
// v. Periodic copies of a vertex always carry the value of their master.
// Solve vectors hold free dofs only.

#include "plasthom/mesh.hpp"
#include "plasthom/tensor.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <vector>

namespace plasthom {

using SparseMatrix = Eigen::SparseMatrix<double>;
using ElementMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 12, 12>;
using StrainMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 12>;
using BarycentricGradients = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 3>;

using VectorField = std::function<SmallVector(const SmallVector& x)>;
using GradientField = std::function<SmallMatrix(const SmallVector& x)>;

enum class DofConstraint {
    None,               // every (identified) vertex is free
    DirichletBoundary,  // boundary vertices carry prescribed values
    PinFirstVertex,     // periodic meshes: vertex 0 fixed at zero, fields recentered to zero mean
};

class P1Space {
public:
    P1Space(std::shared_ptr<const SimplicialMesh> mesh, DofConstraint constraint);

    const SimplicialMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const SimplicialMesh> mesh_ptr() const { return mesh_; }
    int dim() const { return mesh_->dim; }
    DofConstraint constraint() const { return constraint_; }
    int num_free() const { return num_free_; }
    int num_nodal() const { return dim() * mesh_->num_vertices(); }
    /// Free-dof index of component i at vertex v, or -1 if constrained.
    int dof(int v, int i) const { return dof_[static_cast<std::size_t>(dim() * v + i)]; }
    bool vertex_constrained(int v) const;

    double volume(int k) const { return volume_[static_cast<std::size_t>(k)]; }
    /// (d+1) x d matrix whose rows are the barycentric-coordinate gradients.
    const BarycentricGradients& gradients(int k) const;
    /// k x d(d+1) matrix mapping element nodal values to the Mandel strain.
    const StrainMatrix& strain_matrix(int k) const { return B_[static_cast<std::size_t>(k)]; }
    /// Local-to-free dof map of element k, -1 for constrained entries.
    std::vector<int> element_dofs(int k) const;
    /// Nodal values of element k.
    Eigen::VectorXd element_values(const Eigen::VectorXd& nodal, int k) const;

    /// Nodal vector from free values plus constrained values taken from `fixed`
    /// (nodal layout; may be empty for zero).
    Eigen::VectorXd expand(const Eigen::VectorXd& free, const Eigen::VectorXd& fixed = {}) const;
    Eigen::VectorXd restrict_free(const Eigen::VectorXd& nodal) const;
    /// Nodal vector of a function sampled at vertices (periodic copies take the master value).
    Eigen::VectorXd interpolate(const VectorField& f) const;
    /// Subtracts the volume average of the P1 field.
    void remove_mean(Eigen::VectorXd& nodal) const;

private:
    std::shared_ptr<const SimplicialMesh> mesh_;
    DofConstraint constraint_;
    std::vector<int> dof_;
    int num_free_ = 0;
    std::vector<double> volume_;
    std::vector<BarycentricGradients> grads_;
    std::vector<StrainMatrix> B_;
};

/// Throws ConfigError when u has the wrong size or k is out of range.
SymTensor element_strain(const P1Space& space, const Eigen::VectorXd& u, int k);
/// Full displacement gradient (d x d) on element k.
SmallMatrix element_gradient(const P1Space& space, const Eigen::VectorXd& u, int k);

/// Throws NumericalError unless |A - A^T|_inf <= 1e-12 |A|_inf.
void check_symmetric(const SparseMatrix& A);
double sparse_inf_norm(const SparseMatrix& A);

/// Free-dof matrix of sum_k |T_k| B_k^T S_k B_k. One k x k matrix per element.
SparseMatrix assemble_stiffness(const P1Space& space, const std::vector<MandelMatrix>& element_stiffness);
/// Free-dof vector of sum_k |T_k| B_k^T s_k (internal forces of element stresses).
Eigen::VectorXd assemble_internal(const P1Space& space, const std::vector<MandelVector>& element_stress);
/// Free-dof load vector of int f . phi with a degree-2 quadrature rule.
Eigen::VectorXd assemble_load(const P1Space& space, const VectorField& f);

enum class LinearSolverKind { Direct, ConjugateGradient };

struct LinearSolveInfo {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Solves with a symmetric positive definite matrix. The direct variant uses a
/// sparse LDL^T factorization whose pattern analysis is reused when the
/// sparsity pattern does not change; the iterative variant is Jacobi-
/// preconditioned CG with relative tolerance 1e-10 and 1e5 iterations.
class LinearSolver {
public:
    explicit LinearSolver(LinearSolverKind kind = LinearSolverKind::Direct);
    ~LinearSolver();
    LinearSolver(LinearSolver&&) noexcept;
    LinearSolver& operator=(LinearSolver&&) noexcept;

    /// Throws NumericalError on failure (not SPD, or no convergence).
    Eigen::VectorXd solve(const SparseMatrix& A, const Eigen::VectorXd& b, LinearSolveInfo* info = nullptr);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Linear elasticity with element stiffness maps (stress per strain), body
/// load f and Dirichlet data g on boundary vertices. Returns nodal u.
Eigen::VectorXd solve_elastic(const P1Space& space, const std::vector<FourthOrderMap>& stiffness,
                              const VectorField& f, const VectorField& g,
                              LinearSolverKind kind = LinearSolverKind::Direct, LinearSolveInfo* info = nullptr);

/// H^1 function given by its values and gradients (gradient row i = grad of component i).
struct H1Function {
    VectorField value;
    GradientField gradient;
};

/// Affine field x -> xi x + a.
H1Function affine_field(const SmallMatrix& xi, const SmallVector& a);

/// H^1-orthogonal projection onto the unconstrained P1 space of a non-periodic mesh.
class RieszProjector {
public:
    explicit RieszProjector(std::shared_ptr<const SimplicialMesh> mesh);
    const P1Space& space() const { return space_; }
    Eigen::VectorXd project(const H1Function& U) const;

private:
    P1Space space_;
    std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> factor_;
};

/// Projects every entry of a time series.
std::vector<Eigen::VectorXd> riesz_project(const std::vector<H1Function>& series,
                                           std::shared_ptr<const SimplicialMesh> mesh);

/// L^2 and H^1-seminorm errors of a nodal P1 field against an exact field,
/// integrated with a degree-2 rule per element.
double l2_error(const P1Space& space, const Eigen::VectorXd& u, const VectorField& exact);
double h1_seminorm_error(const P1Space& space, const Eigen::VectorXd& u, const GradientField& exact);
double l2_norm(const P1Space& space, const Eigen::VectorXd& u);

/// Degree-2 quadrature on element k: physical points and weights (summing to |T_k|).
void element_quadrature(const SimplicialMesh& mesh, int k, std::vector<SmallVector>& points,
                        std::vector<double>& weights, std::vector<Eigen::Vector4d>* barycentric = nullptr);

}  // namespace plasthom
