#ifndef FERRO_MESH_HPP
#define FERRO_MESH_HPP

#include <array>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ferro {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed mesh file.
class MeshParseError : public MeshError {
 public:
  using MeshError::MeshError;
};

/// Inconsistent connectivity: inverted tets, dangling or untagged faces,
/// out-of-range vertex references.
class MeshTopologyError : public MeshError {
 public:
  using MeshError::MeshError;
};

/// Local numbering on the reference tetrahedron.  Local face i is opposite
/// local vertex i.
inline constexpr std::array<std::array<int, 3>, 4> kTetFaceVertices = {{
    {1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};
inline constexpr std::array<std::array<int, 2>, 6> kTetEdgeVertices = {{
    {0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

struct BoundaryFace {
  std::array<int, 3> vertices;
  std::string region;
};

/// Entry of the global face table.
///
/// `vertices` is sorted by global id.  `elements[0]` is the adjacent tet with
/// the lower id and owns the orientation: `normal` points out of it (so on the
/// boundary it is the outward normal).  `elements[1]` is -1 on the boundary.
struct Face {
  std::array<int, 3> vertices{};
  std::array<int, 2> elements{-1, -1};
  std::array<int, 2> local_index{-1, -1};
  Vec3 normal = Vec3::Zero();
  double area = 0.0;
  int region = -1;

  bool on_boundary() const { return elements[1] < 0; }
};

/// Affine map x = origin + J * xi from the reference tet
/// {xi >= 0, sum(xi) <= 1}.
struct AffineMap {
  Vec3 origin = Vec3::Zero();
  Mat3 jacobian = Mat3::Identity();
  double det = 1.0;
  Mat3 inverse_transpose = Mat3::Identity();

  Vec3 map(const Vec3& ref) const { return origin + jacobian * ref; }
  Vec3 pullback(const Vec3& x) const {
    return inverse_transpose.transpose() * (x - origin);
  }
};

/// Tetrahedral mesh with tagged boundary regions.  Immutable after
/// construction.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets,
       std::vector<BoundaryFace> boundary);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(tets_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_boundary_faces() const { return num_boundary_faces_; }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const Vec3& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 4>& tet(int e) const { return tets_[e]; }
  const std::vector<std::array<int, 4>>& tets() const { return tets_; }
  const std::vector<Face>& faces() const { return faces_; }
  const Face& face(int f) const { return faces_[f]; }
  const std::array<int, 2>& edge(int i) const { return edges_[i]; }

  /// Global face id of local face i (opposite local vertex i).
  const std::array<int, 4>& element_faces(int e) const { return tet_faces_[e]; }
  /// Global edge ids in kTetEdgeVertices order.
  const std::array<int, 6>& element_edges(int e) const { return tet_edges_[e]; }

  AffineMap element_geometry(int e) const;
  double element_volume(int e) const;
  Vec3 element_centroid(int e) const;

  const std::vector<std::string>& region_names() const { return regions_; }
  bool has_region(std::string_view tag) const;
  int region_id(std::string_view tag) const;
  /// Boundary faces carrying `tag`; throws MeshError for unknown tags.
  std::vector<int> region_faces(std::string_view tag) const;
  /// Boundary faces in the original input order, with region names.
  std::vector<BoundaryFace> boundary_faces() const;

  /// Nearest vertex to `x`.
  int nearest_vertex(const Vec3& x) const;

 private:
  void build_topology(std::vector<BoundaryFace> boundary);

  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 4>> tets_;
  std::vector<Face> faces_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 4>> tet_faces_;
  std::vector<std::array<int, 6>> tet_edges_;
  std::vector<std::string> regions_;
  std::vector<int> boundary_order_;
  int num_boundary_faces_ = 0;
};

Mesh load_mesh(const std::string& path);
Mesh read_mesh(std::istream& in);
void write_mesh(const Mesh& mesh, std::ostream& out);
void save_mesh(const Mesh& mesh, const std::string& path);

/// Structured box [lo, hi] with n[0] x n[1] x n[2] cells, six tets per cell.
/// Boundary tags: xmin, xmax, ymin, ymax, zmin, zmax.
Mesh box_mesh(const Vec3& lo, const Vec3& hi, std::array<int, 3> n);

/// One eighth of a rectangular plate with a cylindrical hole through its
/// thickness.  The quarter-plate [0, a] x [0, a] (a = half width) has the hole
/// of radius r centred at the origin; z spans [0, half_thickness].
/// Tags: xmin, ymin, zmin (symmetry planes), xmax, ymax, zmax, hole.
struct HolePlateGeometry {
  double half_width = 10e-3;
  double half_thickness = 3e-3;
  double hole_radius = 2e-3;
  int n_angular = 8;   // cells along the quarter hole arc, even
  int n_radial = 6;
  int n_layers = 2;
  double grading = 1.5;  // > 1 clusters cells at the hole
};

Mesh hole_plate_mesh(const HolePlateGeometry& geometry);

}  // namespace ferro

#endif  // FERRO_MESH_HPP
