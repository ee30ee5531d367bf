#include "plasthom/equilibrium.hpp"

#include "plasthom/errors.hpp"

#include <cmath>

namespace plasthom {

EquilibriumSolver::EquilibriumSolver(const P1Space& space, std::vector<LocalLaw> laws, NewtonOptions options)
    : space_(space), laws_(std::move(laws)), options_(options), solver_(options.solver) {
    if (static_cast<int>(laws_.size()) != space_.mesh().num_elements())
        throw ConfigError("one local law per element required");
    for (const auto& l : laws_)
        if (l.dim() != space_.dim()) throw ConfigError("local law has the wrong dimension");
}

std::vector<MandelVector> EquilibriumSolver::strains(const Eigen::VectorXd& u, const MandelVector& offset) const {
    const int ne = space_.mesh().num_elements();
    std::vector<MandelVector> out(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        MandelVector eps = space_.strain_matrix(e) * space_.element_values(u, e);
        if (offset.size()) eps += offset;
        out[e] = eps;
    }
    return out;
}

StepState EquilibriumSolver::solve(const Eigen::VectorXd& u_guess, const MandelVector& offset,
                                   const std::vector<MandelVector>& p_prev, double dt,
                                   const Eigen::VectorXd& load, int step) const {
    const int ne = space_.mesh().num_elements();
    if (static_cast<int>(p_prev.size()) != ne) throw ConfigError("one plastic strain per element required");
    if (u_guess.size() != space_.num_nodal()) throw ConfigError("initial guess has the wrong size");
    const Eigen::VectorXd f = load.size() ? load : Eigen::VectorXd::Zero(space_.num_free());
    if (f.size() != space_.num_free()) throw ConfigError("load vector has the wrong size");

    StepState st;
    st.sigma.resize(static_cast<std::size_t>(ne));
    st.p.resize(static_cast<std::size_t>(ne));
    st.tangent.resize(static_cast<std::size_t>(ne));

    auto evaluate = [&](const Eigen::VectorXd& u, StepState& s) -> Eigen::VectorXd {
        const auto eps = strains(u, offset);
        double ref2 = 0.0;
        for (int e = 0; e < ne; ++e) {
            LocalLaw::Result r;
            try {
                r = laws_[e].update(eps[e], p_prev[e], dt, true);
            } catch (const NumericalError& err) {
                throw NumericalError("local update failed on element " + std::to_string(e), step, err.residual());
            }
            s.sigma[e] = r.sigma;
            s.p[e] = r.p;
            s.tangent[e] = r.tangent;
            ref2 += (space_.volume(e) * space_.strain_matrix(e).transpose() * r.sigma).squaredNorm();
        }
        s.u = u;
        s.reference = std::sqrt(ref2) + f.norm();
        return assemble_internal(space_, s.sigma) - f;
    };

    Eigen::VectorXd r = evaluate(u_guess, st);
    double rnorm = r.norm();
    auto relative = [&](double n) { return st.reference > 0.0 ? n / st.reference : n; };
    int it = 0;
    while (relative(rnorm) > options_.rtol && it < options_.max_iterations && space_.num_free() > 0) {
        ++it;
        const SparseMatrix K = assemble_stiffness(space_, st.tangent);
        Eigen::VectorXd du;
        try {
            du = solver_.solve(K, -r);
        } catch (const NumericalError& err) {
            throw NumericalError(std::string("tangent solve failed: ") + err.what(), step, relative(rnorm));
        }
        const Eigen::VectorXd free0 = space_.restrict_free(st.u);
        StepState trial = st;
        bool accepted = false;
        double lambda = 1.0;
        for (int ls = 0; ls < 9; ++ls, lambda *= 0.5) {
            const Eigen::VectorXd u_new = space_.expand(free0 + lambda * du, st.u);
            const Eigen::VectorXd r_new = evaluate(u_new, trial);
            if (r_new.norm() < rnorm) {
                st = std::move(trial);
                r = r_new;
                rnorm = r.norm();
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    st.iterations = it;
    st.residual = relative(rnorm);
    if (!(st.residual <= options_.accept_rtol))
        throw NumericalError("Newton iteration did not converge", step, st.residual);
    return st;
}

}  // namespace plasthom
