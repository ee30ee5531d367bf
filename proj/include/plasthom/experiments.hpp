#pragma once

// Numerical experiments on the homogenization pipeline, each returning a
// ReportTable plus the raw numbers.

#include "plasthom/cell_sigma.hpp"
#include "plasthom/eps_solver.hpp"
#include "plasthom/report.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace plasthom {

/// Averaged stress of eps-solutions on a simplex against Sigma(xi).
struct AveragingSpec {
    std::shared_ptr<const ProbabilityLaw> law;
    /// Simplex vertices; defaults to (0,0), (1,0), (1,1) when empty.
    std::vector<SmallVector> simplex;
    /// Uniform subdivisions of the simplex (grid spacing 1/n for the default simplex).
    int divisions = 48;
    StrainPath xi;
    std::function<SmallVector(double t)> translation;
    std::vector<double> epsilons{0.25, 0.125, 0.0625};
    std::vector<std::uint64_t> seeds;
    std::vector<double> time_grid;
    FlowKind flow = FlowKind::VonMisesIndicator;
    double delta = 1e-3;
    /// Reference Sigma: RVE size, resolution and sample count (same delta and flow).
    int rve_N = 16, rve_r = 3, rve_M = 16;
    std::uint64_t rve_seed = 1000;
    /// Recorded in every row.
    double tolerance = 0.0;
    int threads = 1;

    void validate() const;
};

struct AveragingResult {
    ReportTable table;
    std::vector<double> times;
    std::vector<SymTensor> sigma_reference;
    /// [eps][seed][step] averaged stress over the simplex.
    std::vector<std::vector<std::vector<SymTensor>>> average_stress;
    /// [eps][seed][step] |average stress - Sigma|.
    std::vector<std::vector<std::vector<double>>> discrepancy;
    /// [eps][seed] L^2(0,T) discrepancy, and its seed average per eps.
    std::vector<std::vector<double>> l2_discrepancy;
    std::vector<double> mean_l2_discrepancy;
};

/// Realizations are translated so that the checkerboard is aligned with the
/// origin; with divisions a multiple of 1/eps no element straddles a cell.
AveragingResult run_averaging_experiment(const AveragingSpec& spec);

/// Korn ratio |f| / |sym f| for gradients of random periodic P1 fields.
struct KornSpec {
    int N = 8;
    int r = 1;
    int dim = 2;
    int samples = 1000;
    std::uint64_t seed = 0;
    double tolerance = 1e-10;
    int threads = 1;

    void validate() const;
};

struct KornResult {
    ReportTable table;
    std::vector<double> ratios;
    double max_ratio = 0.0;
    int skipped = 0;
};

/// |grad phi| / |sym grad phi| in L^2 of the torus after removing the mean
/// gradient; NaN when the symmetric part vanishes.
double korn_ratio(const P1Space& space, const Eigen::VectorXd& phi);

/// Samples cycle through i.i.d. nodal values, smooth Fourier modes, and
/// rotated gradients of scalar potentials. Zero denominators are skipped.
KornResult run_korn_check(const KornSpec& spec);

/// Spatial averages of scalar statistics over [-L, L]^d against their expectation.
struct ErgodicStatistic {
    std::string name;
    std::function<double(const CellParameters&)> g;
    double expectation = 0.0;
};

struct ErgodicSpec {
    std::shared_ptr<const ProbabilityLaw> law;
    std::vector<double> box_sizes{8, 16, 32};
    int seeds = 50;
    std::uint64_t base_seed = 0;
    /// Defaults to E and yield stress with their exact means.
    std::vector<ErgodicStatistic> statistics;
    double tolerance = 0.5;
    int threads = 1;

    void validate() const;
};

struct ErgodicResult {
    ReportTable table;
    /// [statistic][L] root-mean-square error over seeds, and the fitted log-log slope.
    std::vector<std::vector<double>> rms_error;
    std::vector<double> exponent;
};

ErgodicResult run_ergodic_check(const ErgodicSpec& spec);

/// Least-squares slope of log y against log x.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace plasthom
