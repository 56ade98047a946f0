#ifndef FERRO_OUTPUT_HPP
#define FERRO_OUTPUT_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ferro/assembly.hpp"

namespace ferro {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Legacy ASCII VTK unstructured grid of one state.  Point data: displacement.
/// Cell data sampled at the centroid: D, E, Pi, |Pi|, remanent strain, strain,
/// S_zz, div D, and the multiplier phi.
void write_vtk(std::ostream& out, const Discretization& disc, const Material& material,
               const Eigen::VectorXd& x, const std::string& title = "ferro state");
void save_vtk(const std::string& path, const Discretization& disc, const Material& material,
              const Eigen::VectorXd& x, const std::string& title = "ferro state");

/// Numeric table with a header row; column names carry units.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  /// Column by name; throws OutputError if missing.
  std::vector<double> column(const std::string& name) const;
};

/// Values are written with 17 significant digits so they parse back exactly.
void write_csv(std::ostream& out, const CsvTable& table);
void save_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(std::istream& in);
CsvTable load_csv(const std::string& path);

}  // namespace ferro

#endif  // FERRO_OUTPUT_HPP
