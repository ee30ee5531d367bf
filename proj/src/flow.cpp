#include "plasthom/flow.hpp"

#include "plasthom/errors.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace plasthom {

namespace {

// Tolerance on tr p when deciding whether p lies in the (deviatoric) domain of psi*.
constexpr double kTraceTol = 1e-10;

void check_same_dim(const FlowRule& rule, const SymTensor& s) {
    if (s.dim() != rule.dim) throw ConfigError("flow rule and tensor differ in dimension");
}

void check_finite(const SymTensor& s) {
    if (!s.comps().allFinite()) throw ConfigError("non-finite tensor passed to flow rule");
}

bool is_deviatoric(const SymTensor& p) {
    return std::abs(p.trace()) <= kTraceTol * std::max(1.0, p.norm());
}

}  // namespace

double Extended::value() const {
    if (infinite_) throw std::logic_error("Extended::value() on +inf");
    return value_;
}

std::string Extended::str() const {
    if (infinite_) return "+inf";
    std::ostringstream os;
    os.precision(17);
    os << value_;
    return os.str();
}

FlowKind parse_flow_kind(const std::string& name) {
    if (name == "von_mises" || name == "VonMisesIndicator") return FlowKind::VonMisesIndicator;
    if (name == "norm" || name == "NormType") return FlowKind::NormType;
    throw ConfigError("unknown flow rule '" + name + "'");
}

std::string to_string(FlowKind kind) {
    return kind == FlowKind::VonMisesIndicator ? "von_mises" : "norm";
}

FlowRule::FlowRule(FlowKind kind_, double yield_stress_, int dim_)
    : kind(kind_), yield_stress(yield_stress_), dim(dim_) {
    check_dim(dim);
    if (!(yield_stress > 0.0)) throw ConfigError("yield stress must be positive");
}

RegularizedFlow::RegularizedFlow(FlowRule rule_, double delta_) : rule(rule_), delta(delta_) {
    if (!(delta > 0.0)) throw ConfigError("regularization delta must be positive");
}

SymTensor project_yield(const FlowRule& rule, const SymTensor& s) {
    if (rule.kind != FlowKind::VonMisesIndicator)
        throw ConfigError("project_yield requires the von Mises indicator rule");
    check_same_dim(rule, s);
    SymTensor dev = deviator(s);
    const double q = dev.norm();
    if (q <= rule.yield_stress) return s;
    return s - dev * (1.0 - rule.yield_stress / q);
}

Extended psi_value(const FlowRule& rule, const SymTensor& s) {
    check_same_dim(rule, s);
    const double q = deviator(s).norm();
    if (rule.kind == FlowKind::VonMisesIndicator)
        return q <= rule.yield_stress ? Extended(0.0) : Extended::infinity();
    return Extended(rule.yield_stress * q);
}

SymTensor prox(const RegularizedFlow& rf, const SymTensor& s) {
    if (rf.rule.kind == FlowKind::VonMisesIndicator) return project_yield(rf.rule, s);
    check_same_dim(rf.rule, s);
    // Block soft-thresholding of the deviator.
    SymTensor dev = deviator(s);
    const double q = dev.norm();
    const double shrink = rf.delta * rf.rule.yield_stress;
    if (q <= shrink) return s - dev;
    return s - dev * (shrink / q);
}

double my_value(const RegularizedFlow& rf, const SymTensor& s) {
    check_same_dim(rf.rule, s);
    const double q = deviator(s).norm();
    const double sy = rf.rule.yield_stress;
    const double d = rf.delta;
    if (rf.rule.kind == FlowKind::VonMisesIndicator) {
        const double excess = std::max(0.0, q - sy);
        return excess * excess / (2.0 * d);
    }
    if (q <= d * sy) return q * q / (2.0 * d);
    return sy * q - 0.5 * d * sy * sy;
}

SymTensor my_subdiff(const RegularizedFlow& rf, const SymTensor& s) {
    check_same_dim(rf.rule, s);
    SymTensor dev = deviator(s);
    const double q = dev.norm();
    const double sy = rf.rule.yield_stress;
    const double d = rf.delta;
    if (rf.rule.kind == FlowKind::VonMisesIndicator) {
        if (q <= sy) return SymTensor::zero(s.dim());
        return dev * ((q - sy) / (d * q));
    }
    if (q <= d * sy) return dev * (1.0 / d);
    return dev * (sy / q);
}

MandelMatrix my_subdiff_jacobian(const RegularizedFlow& rf, const SymTensor& s) {
    check_same_dim(rf.rule, s);
    const int k = s.size();
    SymTensor dev = deviator(s);
    const double q = dev.norm();
    const double sy = rf.rule.yield_stress;
    const double d = rf.delta;
    MandelMatrix P = deviatoric_projector(s.dim());
    if (rf.rule.kind == FlowKind::VonMisesIndicator) {
        if (q <= sy) return MandelMatrix::Zero(k, k);
        MandelVector n = dev.comps() / q;
        return (P - (sy / q) * (P - n * n.transpose())) / d;
    }
    if (q <= d * sy) return P / d;
    MandelVector n = dev.comps() / q;
    return (sy / q) * (P - n * n.transpose());
}

Extended conjugate_value(const FlowRule& rule, const SymTensor& p) {
    check_finite(p);
    check_same_dim(rule, p);
    if (!is_deviatoric(p)) return Extended::infinity();
    // Only the deviatoric part enters; the hydrostatic residue is below kTraceTol.
    const double r = deviator(p).norm();
    if (rule.kind == FlowKind::VonMisesIndicator) return Extended(rule.yield_stress * r);
    if (r <= rule.yield_stress * (1.0 + 1e-12)) return Extended(0.0);
    return Extended::infinity();
}

Extended conjugate_value(const RegularizedFlow& rf, const SymTensor& p) {
    Extended base = conjugate_value(rf.rule, p);
    const double r = deviator(p).norm();
    return base + Extended(0.5 * rf.delta * r * r);
}

Extended fenchel_gap(const FlowRule& rule, const SymTensor& s, const SymTensor& p) {
    check_finite(s);
    return psi_value(rule, s) + conjugate_value(rule, p) - inner(s, p);
}

Extended fenchel_gap(const RegularizedFlow& rf, const SymTensor& s, const SymTensor& p) {
    check_finite(s);
    return Extended(my_value(rf, s)) + conjugate_value(rf, p) - inner(s, p);
}

}  // namespace plasthom
