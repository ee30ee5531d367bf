#pragma once

// Heterogeneous quasi-static elastoplasticity on a bounded polygonal domain:
//
//   -div sigma = f,  sigma = C^{-1} e,  sym grad u = e + p,  dp/dt = g(sigma - B p),
//   u = U on the boundary,  p(0) = 0,
//
// with coefficients sampled from a random medium at scale eps (one value per
// element, taken at the barycenter), discretized by P1 elements and backward
// Euler in time.

#include "plasthom/equilibrium.hpp"
#include "plasthom/random_media.hpp"
#include "plasthom/strain_path.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace plasthom {

using TimeVectorField = std::function<SmallVector(double t, const SmallVector& x)>;

/// Boundary displacement U(t, x) = field(t, x) + translation(t). The
/// translation never enters strains; the solver adds it to u afterwards.
struct DirichletData {
    TimeVectorField field;
    std::function<SmallVector(double t)> translation;

    /// U(t, x) = xi(t) x + a(t).
    static DirichletData affine(const StrainPath& xi, std::function<SmallVector(double t)> a = {});
    SmallVector evaluate(double t, const SmallVector& x) const;
};

struct EpsProblemConfig {
    std::shared_ptr<const SimplicialMesh> mesh;
    /// Medium; coefficients evaluated at element barycenters with scale epsilon.
    std::optional<Realization> medium;
    double epsilon = 1.0;
    /// Explicit per-element coefficients; overrides the medium when non-empty.
    std::vector<MaterialPoint> element_materials;
    FlowKind flow = FlowKind::VonMisesIndicator;
    double delta = 1e-2;
    std::vector<double> time_grid;
    DirichletData dirichlet;
    TimeVectorField load;
    NewtonOptions newton;
};

struct PlasticTrajectory {
    int dim = 2;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> u;
    /// [step][element]
    std::vector<std::vector<MandelVector>> sigma, e, p;
    std::vector<int> newton_iterations;
    std::vector<double> residuals;
    std::vector<double> element_volume;

    int num_steps() const { return static_cast<int>(times.size()); }
    int num_elements() const { return static_cast<int>(element_volume.size()); }
};

/// Per-element coefficients of a configuration (validated against the law's constants).
std::vector<MaterialPoint> element_materials(const EpsProblemConfig& config);

PlasticTrajectory solve_eps(const EpsProblemConfig& config);

/// Volume-weighted element average per step. Throws ConfigError for an empty
/// or out-of-range region.
std::vector<SymTensor> average_stress(const PlasticTrajectory& traj, const std::vector<int>& region);
std::vector<SymTensor> average_plastic_strain(const PlasticTrajectory& traj, const std::vector<int>& region);
std::vector<int> all_elements(const PlasticTrajectory& traj);

struct ResidualReport {
    /// Discrete H^1(0,T; L^2) norms.
    double norm_u = 0, norm_e = 0, norm_p = 0, norm_sigma = 0;
    /// Discrete H^1(0,T; H^1) norm of the interpolated boundary data and H^1(0,T; L^2) of the load.
    double norm_data = 0;
    /// (norm_u + norm_e + norm_p + norm_sigma) / norm_data, 0 for zero data.
    double bound_ratio = 0;
    double max_decomposition_residual = 0;
    double max_constitutive_residual = 0;
    double max_flow_rule_residual = 0;
    /// Smallest plastic dissipation increment <dp, sigma - B p> over elements and steps.
    double min_dissipation_increment = 0;
    /// Relative defect of the discrete energy identity including the
    /// numerical dissipation of backward Euler.
    double energy_defect = 0;
    /// Numerical dissipation relative to the energy scale (the defect of the
    /// continuous-time identity; first order in the step size).
    double numerical_dissipation = 0;
    int max_newton_iterations = 0;
    double max_equilibrium_residual = 0;
};

ResidualReport residual_report(const PlasticTrajectory& traj, const EpsProblemConfig& config);

}  // namespace plasthom
