#pragma once

// One implicit time step of quasi-static elastoplasticity on a P1 space:
// find the free displacement dofs such that
//
//   sum_k |T_k| B_k^T sigma_k = load,   sigma_k from LocalLaw::update(offset + B_k u, p_prev_k),
//
// by Newton's method with the consistent tangent and a backtracking line
// search as damped fallback.

#include "plasthom/constitutive.hpp"
#include "plasthom/fem.hpp"

#include <vector>

namespace plasthom {

struct NewtonOptions {
    double rtol = 1e-11;        // target relative residual
    double accept_rtol = 1e-8;  // accepted if stagnating below this
    int max_iterations = 50;
    LinearSolverKind solver = LinearSolverKind::Direct;
};

struct StepState {
    Eigen::VectorXd u;  // nodal, constrained entries as given
    std::vector<MandelVector> sigma;
    std::vector<MandelVector> p;
    std::vector<MandelMatrix> tangent;
    int iterations = 0;
    double residual = 0.0;   // relative
    double reference = 0.0;  // force scale used for the relative residual
};

class EquilibriumSolver {
public:
    /// laws: one per element.
    EquilibriumSolver(const P1Space& space, std::vector<LocalLaw> laws, NewtonOptions options = {});

    const P1Space& space() const { return space_; }
    const std::vector<LocalLaw>& laws() const { return laws_; }
    const NewtonOptions& options() const { return options_; }

    /// u_guess: nodal start value carrying the constrained values. offset: a
    /// strain added on every element (empty for none). load: free-dof vector
    /// (empty for none). Throws NumericalError(step, residual) on failure.
    StepState solve(const Eigen::VectorXd& u_guess, const MandelVector& offset,
                    const std::vector<MandelVector>& p_prev, double dt, const Eigen::VectorXd& load,
                    int step) const;

    /// Element strains offset + B_k u.
    std::vector<MandelVector> strains(const Eigen::VectorXd& u, const MandelVector& offset) const;

private:
    const P1Space& space_;
    std::vector<LocalLaw> laws_;
    NewtonOptions options_;
    mutable LinearSolver solver_;
};

}  // namespace plasthom
