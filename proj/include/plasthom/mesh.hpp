#pragma once

#include "plasthom/tensor.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace plasthom {

/// Conforming simplicial mesh in 2 or 3 dimensions. Torus meshes keep their
/// unwrapped vertex copies and identify them through periodic_master.
struct SimplicialMesh {
    int dim = 2;
    std::vector<SmallVector> vertices;
    /// First dim+1 entries used.
    std::vector<std::array<int, 4>> simplices;
    std::vector<char> boundary;
    /// Empty, or per vertex the index of the vertex it is identified with.
    std::vector<int> periodic_master;
    /// Torus side length; 0 for non-periodic meshes.
    double period = 0.0;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_elements() const { return static_cast<int>(simplices.size()); }
    bool is_periodic() const { return !periodic_master.empty(); }
    int master(int v) const { return periodic_master.empty() ? v : periodic_master[static_cast<std::size_t>(v)]; }

    double signed_volume(int k) const;
    double volume(int k) const;
    double total_volume() const;
    SmallVector barycenter(int k) const;
    double diameter(int k) const;
    /// Largest element diameter.
    double h() const;
    /// Circumradius / inradius of element k.
    double shape_ratio(int k) const;
};

/// Throws ConfigError unless every element is positively oriented, has volume
/// > 1e-12 h^d, and circumradius/inradius <= shape_bound.
void check_mesh(const SimplicialMesh& mesh, double shape_bound = 10.0);

/// Uniform subdivision of the simplex T (d+1 vertices) into n^d elements,
/// each an affine image of a Kuhn simplex with diameter diam(T)/n.
SimplicialMesh mesh_simplex_divisions(const std::vector<SmallVector>& T, int n);

/// Subdivision with the smallest n such that diam(T)/n < h. Throws ConfigError for h <= 0.
SimplicialMesh mesh_simplex(const std::vector<SmallVector>& T, double h);

/// Periodic Kuhn triangulation of [0,N)^d with r grid intervals per unit
/// cell. Elements never straddle unit cells; opposite faces are identified.
SimplicialMesh mesh_torus(int N, int r, int dim = 2);

/// Kuhn triangulation of the box [lower, upper] with n intervals per side.
SimplicialMesh mesh_box(const SmallVector& lower, const SmallVector& upper, int n);

/// Marks vertices on facets that belong to exactly one element.
void mark_boundary(SimplicialMesh& mesh);

/// Text format:
///   dim <d>
///   vertices <n>      then n lines of d coordinates
///   simplices <m>     then m lines of d+1 vertex indices
///   [periodic <p>]    then n lines with the master index
void write_mesh(const SimplicialMesh& mesh, std::ostream& os);
SimplicialMesh read_mesh(std::istream& is);

}  // namespace plasthom
