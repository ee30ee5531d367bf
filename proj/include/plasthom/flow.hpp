#pragma once

// Convex flow potentials, their Moreau-Yosida envelopes and conjugates.
//
//   VonMisesIndicator : psi(s) = 0 if |dev s| <= sigma_y, +inf otherwise
//   NormType          : psi(s) = sigma_y |dev s|
//
//   psi_delta(s) = inf_x { psi(x) + |x - s|^2 / (2 delta) }
//   d psi_delta(s) = (s - prox_{delta psi}(s)) / delta
//
// Both potentials are invariant under hydrostatic shifts, so their proximal
// maps act on the deviatoric part only and all gradients are deviatoric.

#include "plasthom/tensor.hpp"

#include <string>

namespace plasthom {

/// Extended real in (-inf, +inf]. +inf is a flag, never a floating overflow;
/// it absorbs any finite summand.
class Extended {
public:
    Extended() = default;
    Extended(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)
    static Extended infinity() {
        Extended e;
        e.infinite_ = true;
        return e;
    }

    bool is_infinite() const { return infinite_; }
    bool is_finite() const { return !infinite_; }
    /// Throws std::logic_error when infinite.
    double value() const;

    friend Extended operator+(Extended a, Extended b) {
        if (a.infinite_ || b.infinite_) return infinity();
        return Extended(a.value_ + b.value_);
    }
    friend Extended operator-(Extended a, double b) { return a + Extended(-b); }
    friend bool operator<=(Extended a, double b) { return !a.infinite_ && a.value_ <= b; }
    friend bool operator>=(Extended a, double b) { return a.infinite_ || a.value_ >= b; }

    std::string str() const;

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

enum class FlowKind { VonMisesIndicator, NormType };

FlowKind parse_flow_kind(const std::string& name);
std::string to_string(FlowKind kind);

struct FlowRule {
    FlowKind kind = FlowKind::VonMisesIndicator;
    double yield_stress = 1.0;
    int dim = 2;

    FlowRule() = default;
    FlowRule(FlowKind kind, double yield_stress, int dim);
};

struct RegularizedFlow {
    FlowRule rule;
    double delta = 1e-2;

    RegularizedFlow() = default;
    RegularizedFlow(FlowRule rule, double delta);
};

/// Euclidean projection onto K = {t : |dev t| <= sigma_y}. Requires the indicator rule.
SymTensor project_yield(const FlowRule& rule, const SymTensor& s);

/// psi(s).
Extended psi_value(const FlowRule& rule, const SymTensor& s);

/// prox_{delta psi}(s), the minimizer realizing psi_delta(s).
SymTensor prox(const RegularizedFlow& rf, const SymTensor& s);

/// psi_delta(s).
double my_value(const RegularizedFlow& rf, const SymTensor& s);

/// Gradient of psi_delta; 1/delta-Lipschitz and deviatoric.
SymTensor my_subdiff(const RegularizedFlow& rf, const SymTensor& s);

/// Jacobian of my_subdiff (symmetric, positive semidefinite); generalized derivative on the kinks.
MandelMatrix my_subdiff_jacobian(const RegularizedFlow& rf, const SymTensor& s);

/// psi*(p). Throws ConfigError on NaN input.
Extended conjugate_value(const FlowRule& rule, const SymTensor& p);

/// (psi_delta)*(p) = psi*(p) + delta/2 |p|^2.
Extended conjugate_value(const RegularizedFlow& rf, const SymTensor& p);

/// psi(s) + psi*(p) - <s, p>. Non-negative; +inf propagates.
Extended fenchel_gap(const FlowRule& rule, const SymTensor& s, const SymTensor& p);

/// psi_delta(s) + psi_delta*(p) - <s, p>. Zero iff p = my_subdiff(rf, s).
Extended fenchel_gap(const RegularizedFlow& rf, const SymTensor& s, const SymTensor& p);

}  // namespace plasthom
