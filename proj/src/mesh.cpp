#include "ferro/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace ferro {

namespace {

std::array<int, 3> sorted3(std::array<int, 3> v) {
  std::sort(v.begin(), v.end());
  return v;
}

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

}  // namespace

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets,
           std::vector<BoundaryFace> boundary)
    : vertices_(std::move(vertices)), tets_(std::move(tets)) {
  build_topology(std::move(boundary));
}

void Mesh::build_topology(std::vector<BoundaryFace> boundary) {
  const int nv = num_vertices();
  for (int e = 0; e < num_elements(); ++e) {
    for (int v : tets_[e]) {
      if (v < 0 || v >= nv) {
        throw MeshTopologyError("tet " + std::to_string(e) + " references vertex " +
                                std::to_string(v) + " (mesh has " + std::to_string(nv) +
                                " vertices)");
      }
    }
    const auto& t = tets_[e];
    const double vol =
        signed_volume(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]], vertices_[t[3]]);
    if (!(vol > 0.0)) {
      throw MeshTopologyError("tet " + std::to_string(e) + " has non-positive volume " +
                              std::to_string(vol));
    }
  }

  // faces, owned by the lower element id
  std::map<std::array<int, 3>, int> face_index;
  tet_faces_.assign(tets_.size(), {-1, -1, -1, -1});
  for (int e = 0; e < num_elements(); ++e) {
    const auto& t = tets_[e];
    for (int lf = 0; lf < 4; ++lf) {
      const auto& fv = kTetFaceVertices[lf];
      const auto key = sorted3({t[fv[0]], t[fv[1]], t[fv[2]]});
      auto [it, inserted] = face_index.try_emplace(key, num_faces());
      if (inserted) {
        Face f;
        f.vertices = key;
        f.elements = {e, -1};
        f.local_index = {lf, -1};
        const Vec3& a = vertices_[t[fv[0]]];
        const Vec3& b = vertices_[t[fv[1]]];
        const Vec3& c = vertices_[t[fv[2]]];
        Vec3 n = (b - a).cross(c - a);
        f.area = 0.5 * n.norm();
        n.normalize();
        if (n.dot(a - vertices_[t[lf]]) < 0.0) n = -n;
        f.normal = n;
        faces_.push_back(f);
      } else {
        Face& f = faces_[it->second];
        if (f.elements[1] >= 0) {
          throw MeshTopologyError("face shared by more than two tets (element " +
                                  std::to_string(e) + ")");
        }
        f.elements[1] = e;
        f.local_index[1] = lf;
      }
      tet_faces_[e][lf] = it->second;
    }
  }

  std::map<std::array<int, 2>, int> edge_index;
  tet_edges_.assign(tets_.size(), {});
  for (int e = 0; e < num_elements(); ++e) {
    const auto& t = tets_[e];
    for (int le = 0; le < 6; ++le) {
      std::array<int, 2> key{t[kTetEdgeVertices[le][0]], t[kTetEdgeVertices[le][1]]};
      if (key[0] > key[1]) std::swap(key[0], key[1]);
      auto [it, inserted] = edge_index.try_emplace(key, num_edges());
      if (inserted) edges_.push_back(key);
      tet_edges_[e][le] = it->second;
    }
  }

  num_boundary_faces_ = 0;
  for (const Face& f : faces_) num_boundary_faces_ += f.on_boundary() ? 1 : 0;

  boundary_order_.clear();
  for (const auto& bf : boundary) {
    const auto key = sorted3(bf.vertices);
    auto it = face_index.find(key);
    if (it == face_index.end()) {
      throw MeshTopologyError("dangling boundary face (" + std::to_string(key[0]) + " " +
                              std::to_string(key[1]) + " " + std::to_string(key[2]) +
                              ") is not a face of any tet");
    }
    Face& f = faces_[it->second];
    if (!f.on_boundary()) {
      throw MeshTopologyError("tagged face (" + std::to_string(key[0]) + " " +
                              std::to_string(key[1]) + " " + std::to_string(key[2]) +
                              ") is interior");
    }
    if (f.region >= 0) {
      throw MeshTopologyError("boundary face tagged twice");
    }
    auto rit = std::find(regions_.begin(), regions_.end(), bf.region);
    if (rit == regions_.end()) {
      regions_.push_back(bf.region);
      rit = regions_.end() - 1;
    }
    f.region = static_cast<int>(rit - regions_.begin());
    boundary_order_.push_back(it->second);
  }
  for (const Face& f : faces_) {
    if (f.on_boundary() && f.region < 0) {
      throw MeshTopologyError("boundary face (" + std::to_string(f.vertices[0]) + " " +
                              std::to_string(f.vertices[1]) + " " +
                              std::to_string(f.vertices[2]) + ") carries no region tag");
    }
  }
}

AffineMap Mesh::element_geometry(int e) const {
  const auto& t = tets_[e];
  AffineMap m;
  m.origin = vertices_[t[0]];
  for (int c = 0; c < 3; ++c) m.jacobian.col(c) = vertices_[t[c + 1]] - vertices_[t[0]];
  m.det = m.jacobian.determinant();
  m.inverse_transpose = m.jacobian.inverse().transpose();
  return m;
}

double Mesh::element_volume(int e) const {
  const auto& t = tets_[e];
  return signed_volume(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]], vertices_[t[3]]);
}

Vec3 Mesh::element_centroid(int e) const {
  Vec3 c = Vec3::Zero();
  for (int v : tets_[e]) c += vertices_[v];
  return c / 4.0;
}

bool Mesh::has_region(std::string_view tag) const { return region_id(tag) >= 0; }

int Mesh::region_id(std::string_view tag) const {
  auto it = std::find(regions_.begin(), regions_.end(), tag);
  return it == regions_.end() ? -1 : static_cast<int>(it - regions_.begin());
}

std::vector<int> Mesh::region_faces(std::string_view tag) const {
  const int id = region_id(tag);
  if (id < 0) throw MeshError("unknown boundary region '" + std::string(tag) + "'");
  std::vector<int> out;
  for (int f = 0; f < num_faces(); ++f) {
    if (faces_[f].region == id) out.push_back(f);
  }
  return out;
}

std::vector<BoundaryFace> Mesh::boundary_faces() const {
  std::vector<BoundaryFace> out;
  out.reserve(boundary_order_.size());
  for (int f : boundary_order_) {
    out.push_back({faces_[f].vertices, regions_[faces_[f].region]});
  }
  return out;
}

int Mesh::nearest_vertex(const Vec3& x) const {
  int best = -1;
  double dist = std::numeric_limits<double>::infinity();
  for (int v = 0; v < num_vertices(); ++v) {
    const double d = (vertices_[v] - x).squaredNorm();
    if (d < dist) {
      dist = d;
      best = v;
    }
  }
  return best;
}

// --- file format -----------------------------------------------------------

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // next non-empty, non-comment line
  bool next(std::istringstream& ss) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      ss.clear();
      ss.str(line);
      return true;
    }
    return false;
  }

  std::istringstream expect(const char* what) {
    std::istringstream ss;
    if (!next(ss)) throw MeshParseError(std::string("unexpected end of file, expected ") + what);
    return ss;
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

int read_count(LineReader& r, const char* section) {
  auto ss = r.expect(section);
  long long n = -1;
  if (!(ss >> n) || n < 0) {
    throw MeshParseError("line " + std::to_string(r.line()) + ": bad count for section '" +
                         section + "'");
  }
  return static_cast<int>(n);
}

}  // namespace

Mesh read_mesh(std::istream& in) {
  LineReader r(in);
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;
  std::vector<BoundaryFace> boundary;
  bool have_vertices = false, have_tets = false;

  std::istringstream ss;
  while (r.next(ss)) {
    std::string section;
    ss >> section;
    if (section == "vertices") {
      const int n = read_count(r, "vertices");
      vertices.resize(n);
      for (int i = 0; i < n; ++i) {
        auto ls = r.expect("vertex coordinates");
        if (!(ls >> vertices[i][0] >> vertices[i][1] >> vertices[i][2])) {
          throw MeshParseError("line " + std::to_string(r.line()) + ": bad vertex");
        }
      }
      have_vertices = true;
    } else if (section == "tets") {
      const int n = read_count(r, "tets");
      tets.resize(n);
      for (int i = 0; i < n; ++i) {
        auto ls = r.expect("tet connectivity");
        auto& t = tets[i];
        if (!(ls >> t[0] >> t[1] >> t[2] >> t[3])) {
          throw MeshParseError("line " + std::to_string(r.line()) + ": bad tet");
        }
      }
      have_tets = true;
    } else if (section == "faces") {
      const int n = read_count(r, "faces");
      boundary.resize(n);
      for (int i = 0; i < n; ++i) {
        auto ls = r.expect("boundary face");
        auto& f = boundary[i];
        if (!(ls >> f.vertices[0] >> f.vertices[1] >> f.vertices[2] >> f.region)) {
          throw MeshParseError("line " + std::to_string(r.line()) + ": bad face");
        }
        for (int v : f.vertices) {
          if (v < 0 || v >= static_cast<int>(vertices.size())) {
            throw MeshTopologyError("face references vertex " + std::to_string(v) +
                                    " out of range");
          }
        }
      }
    } else {
      throw MeshParseError("line " + std::to_string(r.line()) + ": unknown section '" +
                           section + "'");
    }
  }
  if (!have_vertices || !have_tets) throw MeshParseError("missing vertices or tets section");
  return Mesh(std::move(vertices), std::move(tets), std::move(boundary));
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshParseError("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out.precision(17);
  out << "# tetrahedral mesh\nvertices\n" << mesh.num_vertices() << "\n";
  for (const auto& v : mesh.vertices()) out << v[0] << " " << v[1] << " " << v[2] << "\n";
  out << "tets\n" << mesh.num_elements() << "\n";
  for (const auto& t : mesh.tets()) out << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  const auto boundary = mesh.boundary_faces();
  out << "faces\n" << boundary.size() << "\n";
  for (const auto& f : boundary) {
    out << f.vertices[0] << " " << f.vertices[1] << " " << f.vertices[2] << " " << f.region << "\n";
  }
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file '" + path + "'");
  write_mesh(mesh, out);
}

// --- structured generators ---------------------------------------------------

namespace {

// Builds a mesh on a logically structured (ni x nj x nk) cell grid.  Each cell
// is split into six tets along its (0,0,0)-(1,1,1) diagonal, which is
// conforming across cells.  `tag` classifies a boundary face by the grid
// indices of its vertices, returning "" for faces that should not exist.
Mesh structured_mesh(
    std::array<int, 3> n, const std::function<Vec3(int, int, int)>& point,
    const std::function<std::string(const std::array<std::array<int, 3>, 3>&)>& tag) {
  const int ni = n[0] + 1, nj = n[1] + 1, nk = n[2] + 1;
  auto vid = [&](int i, int j, int k) { return (k * nj + j) * ni + i; };
  std::vector<Vec3> vertices(static_cast<size_t>(ni) * nj * nk);
  std::vector<std::array<int, 3>> index(vertices.size());
  for (int k = 0; k < nk; ++k)
    for (int j = 0; j < nj; ++j)
      for (int i = 0; i < ni; ++i) {
        vertices[vid(i, j, k)] = point(i, j, k);
        index[vid(i, j, k)] = {i, j, k};
      }

  static constexpr std::array<std::array<int, 3>, 6> perms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::vector<std::array<int, 4>> tets;
  tets.reserve(6 * static_cast<size_t>(n[0]) * n[1] * n[2]);
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i)
        for (const auto& p : perms) {
          std::array<int, 3> c{i, j, k};
          std::array<int, 4> t{};
          t[0] = vid(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[p[s]];
            t[s + 1] = vid(c[0], c[1], c[2]);
          }
          if (signed_volume(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]) < 0) {
            std::swap(t[2], t[3]);
          }
          tets.push_back(t);
        }

  std::map<std::array<int, 3>, int> count;
  for (const auto& t : tets)
    for (const auto& fv : kTetFaceVertices) count[sorted3({t[fv[0]], t[fv[1]], t[fv[2]]})]++;
  std::vector<BoundaryFace> boundary;
  for (const auto& [key, c] : count) {
    if (c != 1) continue;
    const std::array<std::array<int, 3>, 3> idx{index[key[0]], index[key[1]], index[key[2]]};
    std::string region = tag(idx);
    if (region.empty()) throw MeshTopologyError("structured mesher produced an untaggable face");
    boundary.push_back({key, std::move(region)});
  }
  return Mesh(std::move(vertices), std::move(tets), std::move(boundary));
}

bool all_equal(const std::array<std::array<int, 3>, 3>& idx, int axis, int value) {
  return idx[0][axis] == value && idx[1][axis] == value && idx[2][axis] == value;
}

}  // namespace

Mesh box_mesh(const Vec3& lo, const Vec3& hi, std::array<int, 3> n) {
  for (int d = 0; d < 3; ++d) {
    if (n[d] < 1 || !(hi[d] > lo[d])) throw MeshError("invalid box mesh parameters");
  }
  auto point = [&](int i, int j, int k) {
    const Vec3 t(double(i) / n[0], double(j) / n[1], double(k) / n[2]);
    return Vec3(lo + (hi - lo).cwiseProduct(t));
  };
  static const char* names[3][2] = {{"xmin", "xmax"}, {"ymin", "ymax"}, {"zmin", "zmax"}};
  auto tag = [&](const std::array<std::array<int, 3>, 3>& idx) -> std::string {
    for (int d = 0; d < 3; ++d) {
      if (all_equal(idx, d, 0)) return names[d][0];
      if (all_equal(idx, d, n[d])) return names[d][1];
    }
    return "";
  };
  return structured_mesh(n, point, tag);
}

Mesh hole_plate_mesh(const HolePlateGeometry& g) {
  if (g.n_angular < 2 || g.n_angular % 2 != 0 || g.n_radial < 1 || g.n_layers < 1 ||
      !(g.hole_radius > 0.0) || !(g.half_width > g.hole_radius) || !(g.half_thickness > 0.0)) {
    throw MeshError("invalid hole plate geometry");
  }
  const int half = g.n_angular / 2;
  const double a = g.half_width;
  // grid index i runs along the arc from the y = 0 plane (i = 0) to the x = 0
  // plane (i = n_angular), j runs outward from the hole, k through the thickness
  auto point = [&](int i, int j, int k) {
    const double theta = 0.5 * std::numbers::pi * double(i) / g.n_angular;
    const Vec3 inner(g.hole_radius * std::cos(theta), g.hole_radius * std::sin(theta), 0.0);
    const Vec3 outer = i <= half ? Vec3(a, a * double(i) / half, 0.0)
                                 : Vec3(a * double(g.n_angular - i) / half, a, 0.0);
    const double t = std::pow(double(j) / g.n_radial, g.grading);
    Vec3 p = inner + t * (outer - inner);
    p[2] = g.half_thickness * double(k) / g.n_layers;
    return p;
  };
  auto tag = [&](const std::array<std::array<int, 3>, 3>& idx) -> std::string {
    if (all_equal(idx, 0, 0)) return "ymin";
    if (all_equal(idx, 0, g.n_angular)) return "xmin";
    if (all_equal(idx, 1, 0)) return "hole";
    if (all_equal(idx, 1, g.n_radial)) {
      const int imax = std::max({idx[0][0], idx[1][0], idx[2][0]});
      return imax <= half ? "xmax" : "ymax";
    }
    if (all_equal(idx, 2, 0)) return "zmin";
    if (all_equal(idx, 2, g.n_layers)) return "zmax";
    return "";
  };
  return structured_mesh({g.n_angular, g.n_radial, g.n_layers}, point, tag);
}

}  // namespace ferro
