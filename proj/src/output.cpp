#include "ferro/output.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace ferro {

namespace {

void write_mat(std::ostream& out, const Mat3& m) {
  for (int i = 0; i < 3; ++i) out << m(i, 0) << ' ' << m(i, 1) << ' ' << m(i, 2) << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw OutputError("cannot open '" + path + "' for writing");
  f << std::setprecision(12);
  return f;
}

}  // namespace

void write_vtk(std::ostream& out, const Discretization& disc, const Material& material,
               const Eigen::VectorXd& x, const std::string& title) {
  if (x.size() != disc.num_dofs()) throw OutputError("write_vtk: state size does not match");
  const Mesh& mesh = disc.mesh();
  const int nv = mesh.num_vertices();
  const int ne = mesh.num_elements();
  const FESpace& U = disc.space(Field::U);
  const FESpace& D = disc.space(Field::D);
  const FESpace& P = disc.space(Field::Phi);
  const Eigen::VectorXd u = disc.field(x, Field::U);
  const Eigen::VectorXd d = disc.field(x, Field::D);
  const Eigen::VectorXd phi = disc.field(x, Field::Phi);

  // u is continuous, so any adjacent element gives the vertex value
  std::vector<Vec3> disp(nv, Vec3::Zero());
  static const Vec3 corners[4] = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  for (int e = 0; e < ne; ++e)
    for (int a = 0; a < 4; ++a) disp[mesh.tet(e)[a]] = evaluate_field(U, u, e, corners[a]);

  struct Cell {
    ConstitutiveState s;
    Vec3 E;
    double div, phi;
  };
  std::vector<Cell> cells(ne);
  const Vec3 centroid(0.25, 0.25, 0.25);
  for (int e = 0; e < ne; ++e) {
    Cell& c = cells[e];
    c.s = evaluate_state(disc, x, e, centroid);
    c.E = material.dpsi(c.s).E;
    c.div = evaluate_divergence(D, d, e, centroid);
    c.phi = evaluate_field(P, phi, e, centroid)[0];
  }

  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const Vec3& p : mesh.vertices()) out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  out << "CELLS " << ne << ' ' << 5 * ne << '\n';
  for (const auto& t : mesh.tets()) out << "4 " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  out << "CELL_TYPES " << ne << '\n';
  for (int e = 0; e < ne; ++e) out << "10\n";

  out << "POINT_DATA " << nv << "\nVECTORS displacement double\n";
  for (const Vec3& v : disp) out << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';

  out << "CELL_DATA " << ne << '\n';
  auto vectors = [&](const char* name, auto get) {
    out << "VECTORS " << name << " double\n";
    for (const Cell& c : cells) {
      const Vec3 v = get(c);
      out << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    }
  };
  auto scalars = [&](const char* name, auto get) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (const Cell& c : cells) out << get(c) << '\n';
  };
  auto tensors = [&](const char* name, auto get) {
    out << "TENSORS " << name << " double\n";
    for (const Cell& c : cells) write_mat(out, get(c));
  };
  vectors("dielectric_displacement", [](const Cell& c) { return c.s.D; });
  vectors("electric_field", [](const Cell& c) { return c.E; });
  vectors("remanent_polarization", [](const Cell& c) { return c.s.Pi; });
  scalars("polarization_magnitude", [](const Cell& c) { return c.s.Pi.norm(); });
  tensors("strain", [](const Cell& c) { return c.s.S; });
  tensors("remanent_strain", [&](const Cell& c) { return remanent_strain(c.s.Pi, material.params()); });
  scalars("strain_zz", [](const Cell& c) { return c.s.S(2, 2); });
  scalars("div_D", [](const Cell& c) { return c.div; });
  scalars("multiplier_phi", [](const Cell& c) { return c.phi; });
  if (!out) throw OutputError("write_vtk: stream error");
}

void save_vtk(const std::string& path, const Discretization& disc, const Material& material,
              const Eigen::VectorXd& x, const std::string& title) {
  std::ofstream f = open_out(path);
  write_vtk(f, disc, material, x, title);
}

void CsvTable::add_row(std::vector<double> row) {
  if (row.size() != header.size())
    throw OutputError("csv: row has " + std::to_string(row.size()) + " entries, header " +
                      std::to_string(header.size()));
  rows.push_back(std::move(row));
}

std::vector<double> CsvTable::column(const std::string& name) const {
  for (size_t j = 0; j < header.size(); ++j) {
    if (header[j] != name) continue;
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[j]);
    return out;
  }
  throw OutputError("csv: no column '" + name + "'");
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (size_t j = 0; j < table.header.size(); ++j) out << (j ? "," : "") << table.header[j];
  out << '\n' << std::setprecision(17);
  for (const auto& r : table.rows) {
    for (size_t j = 0; j < r.size(); ++j) out << (j ? "," : "") << r[j];
    out << '\n';
  }
  if (!out) throw OutputError("write_csv: stream error");
}

void save_csv(const std::string& path, const CsvTable& table) {
  std::ofstream f = open_out(path);
  write_csv(f, table);
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw OutputError("read_csv: empty input");
  {
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw OutputError("read_csv: bad number '" + cell + "' on line " + std::to_string(lineno));
      }
    }
    t.add_row(std::move(row));
  }
  return t;
}

CsvTable load_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw OutputError("cannot open '" + path + "'");
  return read_csv(f);
}

}  // namespace ferro
