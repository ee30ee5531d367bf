#include "plasthom/strain_path.hpp"

#include "plasthom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <string>

namespace plasthom {

StrainPath::StrainPath(std::vector<double> knots, std::vector<SymTensor> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.empty() || knots_.size() != values_.size()) throw ConfigError("strain path needs matching knots and values");
    check_time_grid(knots_);
    const int d = values_.front().dim();
    check_dim(d);
    for (const auto& v : values_) {
        if (v.dim() != d) throw ConfigError("strain path values differ in dimension");
        if (!v.comps().allFinite()) throw ConfigError("strain path has non-finite values");
    }
    if (values_.front().norm() != 0.0) throw ConfigError("strain path must start at zero");
}

StrainPath StrainPath::linear(const SymTensor& xi, double T) {
    if (!(T > 0.0)) throw ConfigError("final time must be positive");
    return StrainPath({0.0, T}, {SymTensor::zero(xi.dim()), xi});
}

SymTensor StrainPath::at(double t) const {
    if (values_.empty()) throw ConfigError("empty strain path");
    if (t <= knots_.front()) return values_.front();
    if (t >= knots_.back()) return values_.back();
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - knots_.begin());
    const double t0 = knots_[j - 1], t1 = knots_[j];
    if (t == t1) return values_[j];
    const double w = (t - t0) / (t1 - t0);
    return values_[j - 1] * (1.0 - w) + values_[j] * w;
}

double StrainPath::h1_norm() const {
    double acc = 0.0;
    for (std::size_t j = 1; j < knots_.size(); ++j) {
        const double dt = knots_[j] - knots_[j - 1];
        const MandelVector& a = values_[j - 1].comps();
        const MandelVector& b = values_[j].comps();
        acc += dt * (a.squaredNorm() + a.dot(b) + b.squaredNorm()) / 3.0;
        acc += (b - a).squaredNorm() / dt;
    }
    return std::sqrt(acc);
}

StrainPath combine(const StrainPath& a, double wa, const StrainPath& b, double wb) {
    if (a.dim() != b.dim()) throw ConfigError("strain paths differ in dimension");
    std::vector<double> knots = a.knots_;
    knots.insert(knots.end(), b.knots_.begin(), b.knots_.end());
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    std::vector<SymTensor> vals;
    vals.reserve(knots.size());
    for (double t : knots) vals.push_back(a.at(t) * wa + b.at(t) * wb);
    return StrainPath(std::move(knots), std::move(vals));
}

StrainPath StrainPath::read_csv(std::istream& is, int dim) {
    check_dim(dim);
    const int k = mandel_size(dim);
    std::vector<double> knots;
    std::vector<SymTensor> vals;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::vector<double> row;
        double x;
        while (ls >> x) row.push_back(x);
        const bool numeric = ls.eof();
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw ConfigError("strain path CSV: non-numeric row '" + line + "'");
        }
        first = false;
        if (static_cast<int>(row.size()) != k + 1)
            throw ConfigError("strain path CSV: expected " + std::to_string(k + 1) + " columns");
        knots.push_back(row[0]);
        MandelVector c(k);
        for (int i = 0; i < k; ++i) c[i] = row[static_cast<std::size_t>(i + 1)];
        vals.emplace_back(dim, c);
    }
    return StrainPath(std::move(knots), std::move(vals));
}

std::vector<double> uniform_grid(double T, int steps) {
    if (!(T > 0.0) || steps < 1) throw ConfigError("time grid needs T > 0 and at least one step");
    std::vector<double> g(static_cast<std::size_t>(steps) + 1);
    for (int m = 0; m <= steps; ++m) g[m] = T * m / steps;
    return g;
}

void check_time_grid(const std::vector<double>& grid) {
    if (grid.empty() || grid.front() != 0.0) throw ConfigError("time grid must start at 0");
    for (std::size_t m = 1; m < grid.size(); ++m)
        if (!(grid[m] > grid[m - 1]) || !std::isfinite(grid[m]))
            throw ConfigError("time grid must be strictly increasing");
}

double discrete_h1_norm(const std::vector<double>& times, const std::vector<double>& sq_norms,
                        const std::vector<double>& sq_increment_norms) {
    if (sq_norms.size() != times.size() || sq_increment_norms.size() != times.size())
        throw ConfigError("norm series length mismatch");
    double acc = 0.0;
    for (std::size_t m = 1; m < times.size(); ++m) {
        const double dt = times[m] - times[m - 1];
        acc += dt * sq_norms[m] + sq_increment_norms[m] / dt;
    }
    return std::sqrt(acc);
}

}  // namespace plasthom
