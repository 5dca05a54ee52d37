#pragma once

// Run configuration (JSON text), its validating loader, and the table
// writers used by the command-line runner.

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loopspec/curve.hpp"
#include "loopspec/error.hpp"

namespace loopspec {

const char* version_string();

struct CurveConfig {
  std::string kind = "circle";  // circle | ellipse | fourier
  double radius = 1.0;
  double semi_a = 2.0, semi_b = 1.0;
  FourierParams fourier;
  Orientation orientation = Orientation::CounterClockwise;
};

struct MeshConfig {
  int grid_1d = 0;        // 0: automatic
  int transverse = 1024;
  int n_s = 256;
  int n_u = 128;
  double grading = -1.0;  // < 0: automatic
};

struct RunConfig {
  CurveConfig curve;
  int samples = 1024;
  std::vector<double> betas;  // strictly descending, in (0, 1)
  int j_max = 3;
  int n_modes = 0;            // 0: j_max + 8
  std::string operator_kind = "S";  // spectrum1d: S | S0 | U+ | U-
  double halfwidth = 0.0;     // > 0 overrides a(beta) in spectrum1d and transverse
  MeshConfig mesh;
  bool strip = false;         // thm1: also run the 2D strip solver
  bool export_pencil = false; // strip2d: write the matrix pencils
  double neumann_sign = 1.0;
  double tolerance_scale = 1.0;
  std::string out_dir = "out";
  std::vector<std::string> formats = {"csv"};
  int threads = 1;
};

/// Parses and validates; errors are ErrorKind::Config with line and field.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

/// Fully resolved config, defaults included.
nlohmann::ordered_json to_json(const RunConfig& cfg);

Curve make_curve(const CurveConfig& cfg);

/// Shortest round-trip decimal form; stable across runs.
std::string format_number(double x);

/// Column table written as CSV (with '#' metadata lines) or JSON.
class Table {
 public:
  Table(std::string name, std::vector<std::string> columns);

  Table& row();
  Table& add(double x);
  Table& add(int x);
  Table& add(bool x);
  Table& add(const std::string& x);

  const std::string& name() const { return name_; }
  std::size_t rows() const { return cells_.size(); }

  void write_csv(std::ostream& os, const nlohmann::ordered_json& meta) const;
  nlohmann::ordered_json to_json() const;

 private:
  std::string name_;
  std::vector<std::string> columns_;
  std::vector<std::vector<nlohmann::ordered_json>> cells_;
};

/// Writes <dir>/<stem>.csv and/or <dir>/<stem>.json. The JSON document is
/// {"version", "config", "tables": {...}, extra fields}.
void write_outputs(const std::string& dir, const std::string& stem, const RunConfig& cfg,
                   const std::vector<Table>& tables, const nlohmann::ordered_json& extra = {});

/// Exit code for the command-line runner: 2 config, 3 hypothesis, 4 numerical.
int exit_code(ErrorKind kind);

}  // namespace loopspec
