#pragma once

// Effective stress and plastic strain operators from the periodized cell
// problem. For a macroscopic strain path xi, find on the torus [0,N)^d a
// periodic corrector phi (v = grad phi), plastic strain p and stress z with
//
//   C z = xi + sym(v) - p,   div z = 0 (discretely),   dp/dt = g(z - B p),   p(0) = 0.
//
// Sigma(xi)(t) and Pi(xi)(t) are torus averages of z and p, averaged again
// over M independent samples of the medium.

#include "plasthom/equilibrium.hpp"
#include "plasthom/random_media.hpp"
#include "plasthom/strain_path.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace plasthom {

struct RveConfig {
    int N = 4;
    int r = 2;
    int M = 4;
    double delta = 1e-4;
    FlowKind flow = FlowKind::VonMisesIndicator;
    std::shared_ptr<const ProbabilityLaw> law;
    std::uint64_t base_seed = 0;
    NewtonOptions newton;
    int threads = 1;

    /// Throws ConfigError on invalid entries.
    void validate() const;
};

/// Seed of Monte-Carlo sample i.
std::uint64_t sample_seed(std::uint64_t base_seed, int i);

/// State of one cell problem after a time step.
struct CellState {
    Eigen::VectorXd phi;  // nodal corrector, pinned representation
    std::vector<MandelVector> p, z;
    int iterations = 0;
    double residual = 0.0;
};

/// Torus mesh, coefficients and solver of one sample.
class CellProblem {
public:
    CellProblem(const PeriodicMedium& medium, int r, FlowKind flow, double delta, NewtonOptions newton = {});
    /// Homogeneous problem with one material (any N, r).
    CellProblem(const MaterialPoint& material, int N, int r, FlowKind flow, double delta, NewtonOptions newton = {});
    /// Coefficients given as a function of the element barycenter in [0,N)^d.
    CellProblem(int N, int r, int dim, const std::function<MaterialPoint(const SmallVector&)>& material_at,
                FlowKind flow, double delta, NewtonOptions newton = {});

    const SimplicialMesh& mesh() const { return *mesh_; }
    const P1Space& space() const { return *space_; }
    const std::vector<MaterialPoint>& materials() const { return materials_; }
    int dim() const { return mesh_->dim; }
    double volume() const { return volume_; }

    CellState initial_state() const;
    /// Backward-Euler step to macroscopic strain xi. Pure: prev is not modified.
    CellState advance(const CellState& prev, const SymTensor& xi, double dt, int step = -1) const;

    MandelVector average_z(const CellState& s) const;
    MandelVector average_p(const CellState& s) const;
    /// Element corrector gradients (full d x d).
    std::vector<SmallMatrix> corrector_gradients(const CellState& s) const;
    /// Corrector with zero mean.
    Eigen::VectorXd corrector(const CellState& s) const;

private:
    void init(int r, FlowKind flow, double delta, NewtonOptions newton);

    std::shared_ptr<SimplicialMesh> mesh_;
    std::unique_ptr<P1Space> space_;
    std::vector<MaterialPoint> materials_;
    std::unique_ptr<EquilibriumSolver> solver_;
    double volume_ = 0.0;
};

struct CellTrajectory {
    int dim = 2;
    std::vector<double> times;
    std::vector<SymTensor> xi;
    /// [step][element]
    std::vector<std::vector<MandelVector>> p, z;
    std::vector<std::vector<SmallMatrix>> v;
    /// [step] zero-mean nodal corrector.
    std::vector<Eigen::VectorXd> phi;
    std::vector<int> newton_iterations;
    std::vector<double> residuals;
    std::vector<double> element_volume;
};

CellTrajectory solve_cell(const CellProblem& problem, const StrainPath& xi, const std::vector<double>& time_grid);
CellTrajectory solve_cell(const PeriodicMedium& medium, const StrainPath& xi, const RveConfig& cfg,
                          const std::vector<double>& time_grid);

struct CellInvariants {
    double closure = 0;       // max |C z - xi - sym v + p| / (|xi| + |v| + |p| + 1)
    double solenoidal = 0;    // max_i |int z : grad psi_i| / (|z|_L2 |grad psi_i|_L2) over all basis fields
    double mean_gradient = 0; // max |<v>|
    double initial_stress = 0;
    double orthogonality = 0; // max |<z_m, v_m - v_{m-1}>| / (|z_m| |v_m - v_{m-1}|)
    double symmetry = 0;      // max |z - z^T| (always 0 in Mandel storage, checked on the matrix form)
};

CellInvariants check_invariants(const CellProblem& problem, const CellTrajectory& traj);

/// Volume-averaged discrete H^1(0,T; L^2) norms of p, z and v.
struct CellNorms {
    double p = 0, z = 0, v = 0;
};
CellNorms cell_norms(const CellTrajectory& traj);

struct SigmaResult {
    std::vector<double> times;
    std::vector<SymTensor> sigma, pi;
    /// Standard error of the mean over samples, per step (0 for M = 1).
    std::vector<MandelVector> sigma_stderr, pi_stderr;
    std::vector<std::uint64_t> seeds;
    /// [sample][step]
    std::vector<std::vector<MandelVector>> sample_sigma, sample_pi;
    int N = 0, r = 0, M = 0;
    double delta = 0;
};

SigmaResult sigma(const RveConfig& cfg, const StrainPath& xi, const std::vector<double>& time_grid);

/// Max over grid times t <= t_star of |Sigma(xi1)(t) - Sigma(xi2)(t)|.
double causality_check(const RveConfig& cfg, const StrainPath& xi1, const StrainPath& xi2,
                       const std::vector<double>& time_grid, double t_star);

/// Fixed perturbation direction: t/T times a unit tensor, scaled to unit H^1 norm.
StrainPath unit_perturbation(int dim, double T);

/// |Sigma(xi + eta zeta) - Sigma(xi)|_{L^2(0,T)} with zeta = unit_perturbation.
double continuity_probe(const RveConfig& cfg, const StrainPath& xi, double eta, const std::vector<double>& time_grid);

/// Discrete L^2(0,T) norm of a tensor series difference (right-endpoint rule).
double l2_time_distance(const std::vector<double>& times, const std::vector<SymTensor>& a,
                        const std::vector<SymTensor>& b);

}  // namespace plasthom
