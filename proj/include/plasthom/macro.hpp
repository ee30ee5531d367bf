#pragma once

// Effective macroscopic problem -div Sigma(sym grad u) = f with u = U on the
// boundary, solved by FE^2: every macro element carries the histories of the
// M cell samples of the RVE, advanced with the element's constant strain.
// The macro tangent is a finite-difference approximation of dSigma/dxi.

#include "plasthom/cell_sigma.hpp"
#include "plasthom/eps_solver.hpp"
#include "plasthom/errors.hpp"

#include <memory>
#include <vector>

namespace plasthom {

struct MacroConfig {
    std::shared_ptr<const SimplicialMesh> mesh;
    RveConfig rve;
    DirichletData dirichlet;
    TimeVectorField load;
    std::vector<double> time_grid;
    /// Macro Newton: target and accepted relative residual.
    double rtol = 1e-10;
    double accept_rtol = 1e-6;
    int max_iterations = 30;
    /// Budgets: wall-clock seconds (0 = none) and largest macro mesh.
    double max_seconds = 0.0;
    int max_elements = 4096;
    /// Worker threads for the element loop.
    int threads = 1;

    void validate() const;
};

struct EffectiveSolution {
    int dim = 2;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> u;
    /// [step][element]: strain, effective stress and effective plastic strain.
    std::vector<std::vector<MandelVector>> strain, sigma, pi;
    std::vector<int> newton_iterations;
    /// Final relative residual per step and the full Newton history per step.
    std::vector<double> residuals;
    std::vector<std::vector<double>> residual_history;
    /// Current cell states, [element][sample].
    std::vector<std::vector<CellState>> cells;
    std::vector<std::uint64_t> seeds;
    /// Number of committed cell advances (elements x samples x accepted steps).
    long long committed_advances = 0;
    std::vector<double> element_volume;

    int num_steps() const { return static_cast<int>(times.size()); }
    int num_elements() const { return static_cast<int>(element_volume.size()); }
    /// sigma[m][k] - sigma[m-1][k].
    MandelVector sigma_increment(int m, int k) const;
};

/// Budget exhausted; carries the steps completed so far.
class PartialResultError : public BudgetError {
public:
    PartialResultError(const std::string& what, EffectiveSolution partial)
        : BudgetError(what), partial_(std::move(partial)) {}
    const EffectiveSolution& partial() const { return partial_; }

private:
    EffectiveSolution partial_;
};

EffectiveSolution solve_effective(const MacroConfig& cfg);

/// Largest |int Sigma(sym grad u) : grad phi - int f . phi| over all free P1 test
/// functions and steps, relative to the force scale of each step.
double max_weak_residual(const EffectiveSolution& sol, const MacroConfig& cfg);

}  // namespace plasthom
