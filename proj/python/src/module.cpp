#include "plasthom/config.hpp"
#include "plasthom/errors.hpp"
#include "plasthom/experiments.hpp"
#include "plasthom/flow.hpp"
#include "plasthom/macro.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace plasthom;

namespace {

Eigen::MatrixXd stack(const std::vector<SymTensor>& series) {
    if (series.empty()) return {};
    Eigen::MatrixXd out(series.size(), series.front().comps().size());
    for (std::size_t m = 0; m < series.size(); ++m) out.row(m) = series[m].comps().transpose();
    return out;
}

Eigen::MatrixXd stack(const std::vector<MandelVector>& series) {
    if (series.empty()) return {};
    Eigen::MatrixXd out(series.size(), series.front().size());
    for (std::size_t m = 0; m < series.size(); ++m) out.row(m) = series[m].transpose();
    return out;
}

SymTensor mandel(int dim, const Eigen::VectorXd& v) {
    check_dim(dim);
    if (v.size() != mandel_size(dim)) throw ConfigError("expected " + std::to_string(mandel_size(dim)) + " Mandel components");
    return SymTensor(dim, v);
}

RegularizedFlow flow(const std::string& kind, double sy, double delta, int dim) {
    return RegularizedFlow(FlowRule(parse_flow_kind(kind), sy, dim), delta);
}

py::object extended(const Extended& e) {
    if (e.is_infinite()) return py::float_(std::numeric_limits<double>::infinity());
    return py::float_(e.value());
}

py::dict solve_eps_py(const std::string& json) {
    const RunConfig rc = parse_run_config(json);
    PlasticTrajectory traj;
    {
        py::gil_scoped_release release;
        traj = solve_eps(rc.eps_config());
    }
    py::dict d;
    d["times"] = traj.times;
    d["avg_stress"] = stack(average_stress(traj, all_elements(traj)));
    d["avg_plastic_strain"] = stack(average_plastic_strain(traj, all_elements(traj)));
    d["u"] = traj.u;
    d["newton_iterations"] = traj.newton_iterations;
    d["residuals"] = traj.residuals;
    return d;
}

py::dict sigma_py(const std::string& json) {
    const RunConfig rc = parse_run_config(json);
    SigmaResult r;
    {
        py::gil_scoped_release release;
        r = sigma(rc.rve_config(), rc.xi, rc.time_grid());
    }
    py::dict d;
    d["times"] = r.times;
    d["sigma"] = stack(r.sigma);
    d["pi"] = stack(r.pi);
    d["sigma_stderr"] = stack(r.sigma_stderr);
    d["seeds"] = r.seeds;
    return d;
}

py::dict solve_effective_py(const std::string& json) {
    const RunConfig rc = parse_run_config(json);
    const MacroConfig cfg = rc.macro_config();
    EffectiveSolution s;
    double weak = 0;
    {
        py::gil_scoped_release release;
        s = solve_effective(cfg);
        weak = max_weak_residual(s, cfg);
    }
    py::dict d;
    d["times"] = s.times;
    d["u"] = s.u;
    std::vector<Eigen::MatrixXd> sig;
    for (const auto& step : s.sigma) sig.push_back(stack(step));
    d["sigma"] = sig;
    d["newton_iterations"] = s.newton_iterations;
    d["residuals"] = s.residuals;
    d["weak_residual"] = weak;
    d["committed_advances"] = s.committed_advances;
    return d;
}

py::dict averaging_py(const std::string& json) {
    const RunConfig rc = parse_run_config(json);
    AveragingResult r;
    {
        py::gil_scoped_release release;
        r = run_averaging_experiment(rc.averaging_spec());
    }
    py::dict d;
    d["epsilons"] = rc.epsilons;
    d["times"] = r.times;
    d["sigma_reference"] = stack(r.sigma_reference);
    d["l2_discrepancy"] = r.l2_discrepancy;
    d["mean_l2_discrepancy"] = r.mean_l2_discrepancy;
    d["csv"] = to_csv(r.table);
    return d;
}

py::dict korn_py(int N, int samples, std::uint64_t seed, int dim, int r) {
    KornSpec s;
    s.N = N;
    s.samples = samples;
    s.seed = seed;
    s.dim = dim;
    s.r = r;
    KornResult res;
    {
        py::gil_scoped_release release;
        res = run_korn_check(s);
    }
    py::dict d;
    d["ratios"] = res.ratios;
    d["max_ratio"] = res.max_ratio;
    d["skipped"] = res.skipped;
    d["csv"] = to_csv(res.table);
    return d;
}

py::dict ergodic_py(const std::string& json) {
    const RunConfig rc = parse_run_config(json);
    ErgodicResult r;
    {
        py::gil_scoped_release release;
        r = run_ergodic_check(rc.ergodic_spec());
    }
    py::dict d;
    d["box_sizes"] = rc.box_sizes;
    d["rms_error"] = r.rms_error;
    d["exponent"] = r.exponent;
    d["csv"] = to_csv(r.table);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stochastic homogenization of elastoplasticity: native core";

    auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    auto numerical_error = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
    (void)config_error;
    (void)numerical_error;

    m.def("my_value", [](const std::string& kind, double sy, double delta, int dim, const Eigen::VectorXd& s) {
        return my_value(flow(kind, sy, delta, dim), mandel(dim, s));
    }, py::arg("kind"), py::arg("yield_stress"), py::arg("delta"), py::arg("dim"), py::arg("stress"));
    m.def("my_subdiff", [](const std::string& kind, double sy, double delta, int dim, const Eigen::VectorXd& s) {
        return Eigen::VectorXd(my_subdiff(flow(kind, sy, delta, dim), mandel(dim, s)).comps());
    }, py::arg("kind"), py::arg("yield_stress"), py::arg("delta"), py::arg("dim"), py::arg("stress"));
    m.def("psi_value", [](const std::string& kind, double sy, int dim, const Eigen::VectorXd& s) {
        return extended(psi_value(FlowRule(parse_flow_kind(kind), sy, dim), mandel(dim, s)));
    }, py::arg("kind"), py::arg("yield_stress"), py::arg("dim"), py::arg("stress"));
    m.def("fenchel_gap", [](const std::string& kind, double sy, double delta, int dim, const Eigen::VectorXd& s,
                            const Eigen::VectorXd& p) {
        return extended(fenchel_gap(flow(kind, sy, delta, dim), mandel(dim, s), mandel(dim, p)));
    }, py::arg("kind"), py::arg("yield_stress"), py::arg("delta"), py::arg("dim"), py::arg("stress"), py::arg("rate"));

    m.def("solve_eps", &solve_eps_py, py::arg("config_json"));
    m.def("sigma", &sigma_py, py::arg("config_json"));
    m.def("solve_effective", &solve_effective_py, py::arg("config_json"));
    m.def("run_averaging_experiment", &averaging_py, py::arg("config_json"));
    m.def("run_korn_check", &korn_py, py::arg("N") = 8, py::arg("samples") = 1000, py::arg("seed") = 0,
          py::arg("dim") = 2, py::arg("r") = 1);
    m.def("run_ergodic_check", &ergodic_py, py::arg("config_json"));
}
