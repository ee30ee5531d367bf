#include "plasthom/constitutive.hpp"

#include "plasthom/errors.hpp"

#include <cmath>

namespace plasthom {

namespace {

// Returns c if M P = c P for the deviatoric projector P, NaN otherwise.
double deviatoric_multiple(const MandelMatrix& M, const MandelMatrix& P) {
    const MandelMatrix MP = M * P;
    const double c = MP.trace() / P.trace();
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((MP - c * P).cwiseAbs().maxCoeff() > 1e-13 * scale) return std::nan("");
    return c;
}

}  // namespace

LocalLaw::LocalLaw(const MaterialPoint& material, FlowKind kind, double delta)
    : dim_(material.dim()),
      material_(material),
      flow_(FlowRule(kind, material.yield_stress, material.dim()), delta) {
    if (material.hardening.dim() != dim_) throw ConfigError("compliance and hardening differ in dimension");
    S_ = material.compliance.inverse(MapRole::Stiffness).matrix();
    B_ = material.hardening.matrix();
    A_ = S_ + B_;
    const MandelMatrix P = deviatoric_projector(dim_);
    const double cs = deviatoric_multiple(S_, P);
    const double cb = deviatoric_multiple(B_, P);
    radial_ = std::isfinite(cs) && std::isfinite(cb);
    kappa_ = radial_ ? cs + cb : 0.0;
}

MandelVector LocalLaw::rate(const MandelVector& sigma, const MandelVector& p) const {
    return my_subdiff(flow_, SymTensor(dim_, sigma - B_ * p)).comps();
}

LocalLaw::Result LocalLaw::update(const MandelVector& eps, const MandelVector& p_prev, double dt,
                                  bool with_tangent) const {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    const int k = mandel_size(dim_);
    const MandelVector s_tr = S_ * (eps - p_prev) - B_ * p_prev;
    MandelVector dp = MandelVector::Zero(k);
    Result res;

    if (radial_ && !force_general_) {
        const SymTensor dev = deviator(SymTensor(dim_, s_tr));
        const double q_tr = dev.norm();
        const double sy = flow_.rule.yield_stress;
        const double d = flow_.delta;
        const double kk = kappa_ * dt / d;
        double phi = 0.0;  // |g| at the solution
        if (flow_.rule.kind == FlowKind::VonMisesIndicator) {
            if (q_tr > sy) {
                const double q = (q_tr + kk * sy) / (1.0 + kk);
                phi = (q - sy) / d;
            }
        } else if (q_tr > 0.0) {
            if (q_tr <= (1.0 + kk) * d * sy) {
                phi = q_tr / (1.0 + kk) / d;
            } else {
                phi = sy;
            }
        }
        if (phi > 0.0) dp = (dt * phi / q_tr) * dev.comps();
    } else {
        // Semismooth Newton on R(dp) = dp - dt g(s_tr - A dp).
        const double scale = std::max(1.0, dt * s_tr.norm() / flow_.delta);
        auto residual = [&](const MandelVector& x) -> MandelVector {
            return x - dt * my_subdiff(flow_, SymTensor(dim_, s_tr - A_ * x)).comps();
        };
        MandelVector R = residual(dp);
        int it = 0;
        for (; it < 100 && R.norm() > 1e-15 * scale; ++it) {
            const MandelMatrix G = my_subdiff_jacobian(flow_, SymTensor(dim_, s_tr - A_ * dp));
            const MandelMatrix J = MandelMatrix::Identity(k, k) + dt * G * A_;
            const MandelVector step = J.partialPivLu().solve(-R);
            double lambda = 1.0;
            MandelVector trial = dp + step;
            MandelVector Rt = residual(trial);
            while (Rt.norm() >= R.norm() && lambda > 1e-6) {
                lambda *= 0.5;
                trial = dp + lambda * step;
                Rt = residual(trial);
            }
            if (Rt.norm() >= R.norm()) break;
            dp = trial;
            R = Rt;
        }
        if (R.norm() > 1e-12 * scale) throw NumericalError("local plastic update did not converge", -1, R.norm());
        res.iterations = it;
    }

    res.p = p_prev + dp;
    res.sigma = S_ * (eps - res.p);
    if (with_tangent) {
        const MandelMatrix G = my_subdiff_jacobian(flow_, SymTensor(dim_, res.sigma - B_ * res.p));
        if (G.cwiseAbs().maxCoeff() == 0.0) {
            res.tangent = S_;
        } else {
            const MandelMatrix J = MandelMatrix::Identity(k, k) + dt * G * A_;
            const MandelMatrix X = J.partialPivLu().solve(dt * G * S_);
            MandelMatrix T = S_ - S_ * X;
            res.tangent = 0.5 * (T + T.transpose());
        }
    }
    return res;
}

}  // namespace plasthom
