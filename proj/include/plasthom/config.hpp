#pragma once

// JSON run configuration shared by the command-line tool and the Python module.
//
//   {
//     "domain": "simplex" | {"type": "simplex", "vertices": [[x,y],...]}
//               | {"type": "box", "lower": [...], "upper": [...]},
//     "mesh": {"h": 0.0625},
//     "epsilon": 0.125, "delta": 1e-3, "flow": "von_mises" | "norm",
//     "time": {"T": 1.0, "steps": 8},
//     "law": {"E": {"point": 1.0}, "nu": {"uniform": [0.2, 0.3]},
//             "sigma_y": {"discrete": {"values": [...], "weights": [...]}}, "H": {"point": 0.1}},
//     "rve": {"N": 4, "r": 2, "M": 4},
//     "bc": {"xi": "path.csv" | {"knots": [...], "values": [[mandel comps], ...]}, "a": [ax, ay]},
//     "load": [fx, fy],
//     "seed": 0, "threads": 1,
//     "newton": {"rtol": 1e-11, "accept_rtol": 1e-8, "max_iterations": 50, "solver": "direct" | "cg"},
//     "experiment": {...}
//   }
//
// bc.a and load are rates: U = xi(t) x + t a and f(t, x) = t load. Relative
// paths are resolved against the directory of the configuration file.

#include "plasthom/experiments.hpp"
#include "plasthom/macro.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace plasthom {

struct RunConfig {
    int dim = 2;
    std::string domain_type = "simplex";
    std::vector<SmallVector> simplex;
    SmallVector box_lower, box_upper;
    double h = 0.125;
    double epsilon = 0.25;
    /// Absent: 1e-2 times the mean yield stress of the law.
    std::optional<double> delta;
    FlowKind flow = FlowKind::VonMisesIndicator;
    double T = 1.0;
    int steps = 8;
    std::shared_ptr<const ProbabilityLaw> law;
    int rve_N = 4, rve_r = 2, rve_M = 4;
    StrainPath xi;
    SmallVector a_rate, load_rate;
    std::uint64_t seed = 0;
    int threads = 1;
    /// Inner Newton settings for the eps and cell solvers.
    NewtonOptions newton;

    /// Experiment parameters.
    std::vector<double> epsilons{0.25, 0.125, 0.0625};
    int num_seeds = 8;
    int divisions = 48;
    int korn_N = 8, korn_r = 1, korn_samples = 1000;
    std::vector<double> box_sizes{8, 16, 32};
    int ergodic_seeds = 50;
    double max_seconds = 0.0;

    double effective_delta() const;
    std::shared_ptr<const SimplicialMesh> build_mesh() const;
    std::vector<double> time_grid() const;
    DirichletData dirichlet() const;
    TimeVectorField load() const;

    EpsProblemConfig eps_config() const;
    RveConfig rve_config() const;
    MacroConfig macro_config() const;
    AveragingSpec averaging_spec() const;
    KornSpec korn_spec() const;
    ErgodicSpec ergodic_spec() const;
};

/// Throws ConfigError naming the offending key.
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);
ParameterDistribution parse_distribution(const std::string& json_text);
/// Law from a JSON file holding either {"E": ..., ...} or a configuration with a "law" key.
std::shared_ptr<const ProbabilityLaw> load_law(const std::string& path, int dim);

}  // namespace plasthom
