#include "plasthom/mesh.hpp"

#include "plasthom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <string>

namespace plasthom {

namespace {

SmallMatrix edge_matrix(const SimplicialMesh& m, int k) {
    const auto& s = m.simplices[static_cast<std::size_t>(k)];
    SmallMatrix J(m.dim, m.dim);
    for (int i = 0; i < m.dim; ++i) J.col(i) = m.vertices[s[i + 1]] - m.vertices[s[0]];
    return J;
}

double factorial(int d) { return d == 2 ? 2.0 : 6.0; }

// Kuhn simplices of the unit cube: vertex j is the corner plus e_{perm[0]} + ... + e_{perm[j-1]}.
std::vector<std::vector<int>> permutations(int d) {
    std::vector<int> p(static_cast<std::size_t>(d));
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do out.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return out;
}

// Structured lattice {0..n}^d, row-major with the last index fastest.
struct Lattice {
    int d, n;
    int index(const std::array<int, 3>& a) const {
        int idx = 0;
        for (int i = 0; i < d; ++i) idx = idx * (n + 1) + a[i];
        return idx;
    }
    std::array<int, 3> point(int idx) const {
        std::array<int, 3> a{0, 0, 0};
        for (int i = d - 1; i >= 0; --i) {
            a[i] = idx % (n + 1);
            idx /= (n + 1);
        }
        return a;
    }
    int count() const {
        int c = 1;
        for (int i = 0; i < d; ++i) c *= n + 1;
        return c;
    }
};

// All Kuhn simplices of the grid {0..n}^d as lattice-point triples/quads.
template <class Keep>
std::vector<std::array<std::array<int, 3>, 4>> kuhn_simplices(int d, int n, Keep keep) {
    std::vector<std::array<std::array<int, 3>, 4>> out;
    const auto perms = permutations(d);
    Lattice cubes{d, n - 1};
    for (int c = 0; c < cubes.count(); ++c) {
        const auto corner = cubes.point(c);
        for (const auto& p : perms) {
            std::array<std::array<int, 3>, 4> s{};
            s[0] = corner;
            for (int j = 0; j < d; ++j) {
                s[j + 1] = s[j];
                s[j + 1][p[j]] += 1;
            }
            bool ok = true;
            for (int j = 0; j <= d && ok; ++j) ok = keep(s[j]);
            if (ok) out.push_back(s);
        }
    }
    return out;
}

void orient(SimplicialMesh& m) {
    for (int k = 0; k < m.num_elements(); ++k)
        if (m.signed_volume(k) < 0.0) std::swap(m.simplices[k][0], m.simplices[k][1]);
}

}  // namespace

double SimplicialMesh::signed_volume(int k) const { return edge_matrix(*this, k).determinant() / factorial(dim); }

double SimplicialMesh::volume(int k) const { return std::abs(signed_volume(k)); }

double SimplicialMesh::total_volume() const {
    double v = 0.0;
    for (int k = 0; k < num_elements(); ++k) v += volume(k);
    return v;
}

SmallVector SimplicialMesh::barycenter(int k) const {
    SmallVector b = SmallVector::Zero(dim);
    for (int i = 0; i <= dim; ++i) b += vertices[simplices[k][i]];
    return b / (dim + 1);
}

double SimplicialMesh::diameter(int k) const {
    double dmax = 0.0;
    for (int i = 0; i <= dim; ++i)
        for (int j = i + 1; j <= dim; ++j)
            dmax = std::max(dmax, (vertices[simplices[k][i]] - vertices[simplices[k][j]]).norm());
    return dmax;
}

double SimplicialMesh::h() const {
    double hmax = 0.0;
    for (int k = 0; k < num_elements(); ++k) hmax = std::max(hmax, diameter(k));
    return hmax;
}

double SimplicialMesh::shape_ratio(int k) const {
    const auto& s = simplices[k];
    const SmallVector& x0 = vertices[s[0]];
    // Circumcenter c solves 2 (x_i - x_0) . c = |x_i|^2 - |x_0|^2.
    SmallMatrix A(dim, dim);
    SmallVector rhs(dim);
    for (int i = 0; i < dim; ++i) {
        const SmallVector& xi = vertices[s[i + 1]];
        A.row(i) = 2.0 * (xi - x0).transpose();
        rhs[i] = xi.squaredNorm() - x0.squaredNorm();
    }
    const SmallVector c = A.partialPivLu().solve(rhs);
    const double R = (c - x0).norm();
    // Inradius = d * |T| / (sum of facet measures).
    double facets = 0.0;
    for (int skip = 0; skip <= dim; ++skip) {
        std::vector<SmallVector> f;
        for (int i = 0; i <= dim; ++i)
            if (i != skip) f.push_back(vertices[s[i]]);
        if (dim == 2) {
            facets += (f[1] - f[0]).norm();
        } else {
            Eigen::Vector3d a = f[1] - f[0], b = f[2] - f[0];
            facets += 0.5 * a.cross(b).norm();
        }
    }
    const double r = dim * volume(k) / facets;
    return R / r;
}

void check_mesh(const SimplicialMesh& mesh, double shape_bound) {
    check_dim(mesh.dim);
    if (mesh.num_elements() == 0) throw ConfigError("mesh has no elements");
    const double h = mesh.h();
    const double vmin = 1e-12 * std::pow(h, mesh.dim);
    for (int k = 0; k < mesh.num_elements(); ++k) {
        for (int i = 0; i <= mesh.dim; ++i) {
            const int v = mesh.simplices[k][i];
            if (v < 0 || v >= mesh.num_vertices()) throw ConfigError("simplex references a missing vertex");
        }
        if (!(mesh.signed_volume(k) > vmin))
            throw ConfigError("element " + std::to_string(k) + " is degenerate or negatively oriented");
        if (mesh.shape_ratio(k) > shape_bound)
            throw ConfigError("element " + std::to_string(k) + " violates the shape-regularity bound");
    }
}

SimplicialMesh mesh_simplex_divisions(const std::vector<SmallVector>& T, int n) {
    if (T.empty()) throw ConfigError("simplex has no vertices");
    const int d = static_cast<int>(T[0].size());
    check_dim(d);
    if (static_cast<int>(T.size()) != d + 1) throw ConfigError("simplex needs d+1 vertices");
    if (n < 1) throw ConfigError("number of subdivisions must be positive");

    // Reference simplex n >= a_1 >= ... >= a_d >= 0 in lattice units; its vertices
    // 0, e1, e1+e2, ... correspond to T[0], T[1], ..., T[d].
    auto inside = [&](const std::array<int, 3>& a) {
        for (int i = 0; i + 1 < d; ++i)
            if (a[i] < a[i + 1]) return false;
        return true;
    };
    const auto elems = kuhn_simplices(d, n, inside);
    Lattice lat{d, n};
    std::vector<int> vid(static_cast<std::size_t>(lat.count()), -1);
    SimplicialMesh m;
    m.dim = d;
    auto vertex = [&](const std::array<int, 3>& a) {
        int& id = vid[static_cast<std::size_t>(lat.index(a))];
        if (id < 0) {
            id = m.num_vertices();
            SmallVector x = SmallVector::Zero(d);
            double prev = n;
            for (int i = 0; i < d; ++i) {
                x += (prev - a[i]) / n * T[i];
                prev = a[i];
            }
            x += prev / n * T[d];
            m.vertices.push_back(x);
        }
        return id;
    };
    for (const auto& s : elems) {
        std::array<int, 4> e{0, 0, 0, 0};
        for (int j = 0; j <= d; ++j) e[j] = vertex(s[j]);
        m.simplices.push_back(e);
    }
    orient(m);
    mark_boundary(m);
    return m;
}

SimplicialMesh mesh_simplex(const std::vector<SmallVector>& T, double h) {
    if (!(h > 0.0)) throw ConfigError("mesh size h must be positive");
    if (T.empty()) throw ConfigError("simplex has no vertices");
    double diam = 0.0;
    for (std::size_t i = 0; i < T.size(); ++i)
        for (std::size_t j = i + 1; j < T.size(); ++j) diam = std::max(diam, (T[i] - T[j]).norm());
    if (!(diam > 0.0)) throw ConfigError("degenerate simplex");
    const int n = static_cast<int>(std::floor(diam / h)) + 1;
    SimplicialMesh m = mesh_simplex_divisions(T, n);
    check_mesh(m, 1e6);
    return m;
}

SimplicialMesh mesh_torus(int N, int r, int dim) {
    check_dim(dim);
    if (N < 1 || r < 1) throw ConfigError("torus mesh needs N >= 1 and r >= 1");
    const int n = N * r;
    Lattice lat{dim, n};
    SimplicialMesh m;
    m.dim = dim;
    m.period = N;
    m.vertices.resize(static_cast<std::size_t>(lat.count()));
    m.periodic_master.resize(m.vertices.size());
    for (int v = 0; v < lat.count(); ++v) {
        auto a = lat.point(v);
        SmallVector x(dim);
        for (int i = 0; i < dim; ++i) x[i] = static_cast<double>(a[i]) / r;
        m.vertices[v] = x;
        for (int i = 0; i < dim; ++i)
            if (a[i] == n) a[i] = 0;
        m.periodic_master[v] = lat.index(a);
    }
    for (const auto& s : kuhn_simplices(dim, n, [](const std::array<int, 3>&) { return true; })) {
        std::array<int, 4> e{0, 0, 0, 0};
        for (int j = 0; j <= dim; ++j) e[j] = lat.index(s[j]);
        m.simplices.push_back(e);
    }
    orient(m);
    m.boundary.assign(m.vertices.size(), 0);
    return m;
}

SimplicialMesh mesh_box(const SmallVector& lower, const SmallVector& upper, int n) {
    const int dim = static_cast<int>(lower.size());
    check_dim(dim);
    if (upper.size() != lower.size()) throw ConfigError("box corners differ in dimension");
    if (n < 1) throw ConfigError("box mesh needs n >= 1");
    for (int i = 0; i < dim; ++i)
        if (!(upper[i] > lower[i])) throw ConfigError("box has non-positive extent");
    Lattice lat{dim, n};
    SimplicialMesh m;
    m.dim = dim;
    m.vertices.resize(static_cast<std::size_t>(lat.count()));
    m.boundary.assign(m.vertices.size(), 0);
    for (int v = 0; v < lat.count(); ++v) {
        const auto a = lat.point(v);
        SmallVector x(dim);
        for (int i = 0; i < dim; ++i) {
            x[i] = lower[i] + (upper[i] - lower[i]) * a[i] / n;
            if (a[i] == 0 || a[i] == n) m.boundary[v] = 1;
        }
        m.vertices[v] = x;
    }
    for (const auto& s : kuhn_simplices(dim, n, [](const std::array<int, 3>&) { return true; })) {
        std::array<int, 4> e{0, 0, 0, 0};
        for (int j = 0; j <= dim; ++j) e[j] = lat.index(s[j]);
        m.simplices.push_back(e);
    }
    orient(m);
    return m;
}

void mark_boundary(SimplicialMesh& mesh) {
    std::map<std::array<int, 3>, int> count;
    for (const auto& s : mesh.simplices) {
        for (int skip = 0; skip <= mesh.dim; ++skip) {
            std::array<int, 3> f{-1, -1, -1};
            int j = 0;
            for (int i = 0; i <= mesh.dim; ++i)
                if (i != skip) f[j++] = s[i];
            std::sort(f.begin(), f.begin() + mesh.dim);
            ++count[f];
        }
    }
    mesh.boundary.assign(mesh.vertices.size(), 0);
    for (const auto& [f, c] : count) {
        if (c != 1) continue;
        for (int i = 0; i < mesh.dim; ++i) mesh.boundary[f[i]] = 1;
    }
}

void write_mesh(const SimplicialMesh& mesh, std::ostream& os) {
    os.precision(17);
    os << "dim " << mesh.dim << "\n";
    os << "vertices " << mesh.num_vertices() << "\n";
    for (const auto& x : mesh.vertices) {
        for (int i = 0; i < mesh.dim; ++i) os << (i ? " " : "") << x[i];
        os << "\n";
    }
    os << "simplices " << mesh.num_elements() << "\n";
    for (const auto& s : mesh.simplices) {
        for (int i = 0; i <= mesh.dim; ++i) os << (i ? " " : "") << s[i];
        os << "\n";
    }
    if (mesh.is_periodic()) {
        os << "periodic " << mesh.period << "\n";
        for (int v : mesh.periodic_master) os << v << "\n";
    }
}

SimplicialMesh read_mesh(std::istream& is) {
    auto expect = [&](const std::string& key) {
        std::string word;
        if (!(is >> word) || word != key) throw ConfigError("mesh file: expected '" + key + "'");
    };
    SimplicialMesh m;
    expect("dim");
    if (!(is >> m.dim)) throw ConfigError("mesh file: bad dimension");
    check_dim(m.dim);
    expect("vertices");
    int nv = 0;
    if (!(is >> nv) || nv < 0) throw ConfigError("mesh file: bad vertex count");
    m.vertices.assign(static_cast<std::size_t>(nv), SmallVector::Zero(m.dim));
    for (auto& x : m.vertices)
        for (int i = 0; i < m.dim; ++i)
            if (!(is >> x[i])) throw ConfigError("mesh file: truncated vertex list");
    expect("simplices");
    int ne = 0;
    if (!(is >> ne) || ne < 0) throw ConfigError("mesh file: bad simplex count");
    m.simplices.assign(static_cast<std::size_t>(ne), {0, 0, 0, 0});
    for (auto& s : m.simplices)
        for (int i = 0; i <= m.dim; ++i)
            if (!(is >> s[i]) || s[i] < 0 || s[i] >= nv) throw ConfigError("mesh file: bad simplex");
    std::string word;
    if (is >> word) {
        if (word != "periodic") throw ConfigError("mesh file: unexpected '" + word + "'");
        if (!(is >> m.period)) throw ConfigError("mesh file: bad period");
        m.periodic_master.resize(static_cast<std::size_t>(nv));
        for (int& v : m.periodic_master)
            if (!(is >> v) || v < 0 || v >= nv) throw ConfigError("mesh file: bad periodic map");
        m.boundary.assign(static_cast<std::size_t>(nv), 0);
    } else {
        mark_boundary(m);
    }
    return m;
}

}  // namespace plasthom
