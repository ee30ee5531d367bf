#pragma once

// Backward-Euler update of the regularized flow rule at one material point.
//
// Given total strain eps, the previous plastic strain p_prev and a step dt,
// find p with
//
//   p = p_prev + dt * g(sigma - B p),   sigma = S (eps - p),   S = C^{-1},
//
// where g is the gradient of the regularized potential. With A = S + B and the
// trial value s_tr = S (eps - p_prev) - B p_prev this reads
//
//   dp = dt * g(s_tr - A dp).
//
// When S and B act on deviators as multiples of the identity, dev(s) is
// parallel to dev(s_tr) and the update reduces to a scalar equation for
// |dev s| that is solved in closed form. Otherwise a damped semismooth Newton
// iteration is used.

#include "plasthom/flow.hpp"
#include "plasthom/tensor.hpp"

namespace plasthom {

class LocalLaw {
public:
    LocalLaw() = default;
    LocalLaw(const MaterialPoint& material, FlowKind kind, double delta);

    int dim() const { return dim_; }
    const MaterialPoint& material() const { return material_; }
    const RegularizedFlow& flow() const { return flow_; }
    /// Stiffness S = C^{-1}.
    const MandelMatrix& stiffness() const { return S_; }
    const MandelMatrix& hardening() const { return B_; }
    /// True when the closed-form radial update applies.
    bool radial() const { return radial_; }
    /// Disables the closed form (testing the general path).
    void force_general(bool on) { force_general_ = on; }

    struct Result {
        MandelVector sigma;
        MandelVector p;
        /// d sigma / d eps, symmetric positive definite.
        MandelMatrix tangent;
        int iterations = 0;
    };

    Result update(const MandelVector& eps, const MandelVector& p_prev, double dt, bool with_tangent = true) const;

    /// g(sigma - B p), the regularized plastic strain rate.
    MandelVector rate(const MandelVector& sigma, const MandelVector& p) const;

private:
    int dim_ = 0;
    MaterialPoint material_;
    RegularizedFlow flow_;
    MandelMatrix S_, B_, A_;
    bool radial_ = false;
    bool force_general_ = false;
    double kappa_ = 0.0;  // deviatoric eigenvalue of A when radial
};

}  // namespace plasthom
