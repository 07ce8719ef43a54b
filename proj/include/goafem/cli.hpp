#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "goafem/adaptive.hpp"

namespace goafem {

struct RunConfig {
  int setup = 1;
  double theta = 0.5;
  double tol = 0.0;                // 0 selects the setup's desk tolerance
  std::optional<double> ref_tol;   // default tol / 10 for `reference`
  int max_iter = 30;
  double solver_tol = 1e-10;
  std::string output_dir = ".";
  int threads = 1;
  bool dump_meshes = false;
  bool dump_indicators = false;
};

/// Default stopping tolerance of each setup for desk-scale runs.
double desk_tolerance(int setup);

/// Reads `key = value` lines ('#' starts a comment) into cfg. Keys match the
/// RunConfig field names.
void apply_config_file(std::istream& in, RunConfig& cfg);
void validate(const RunConfig& cfg);

inline constexpr const char* kCsvVersion = "# goafem-ml v1";
inline constexpr const char* kCsvColumns =
    "iter,dofs,mu,zeta,product,goal_value,n_indices,max_param,seconds";

void write_csv_header(std::ostream& os, bool with_reference);
void write_csv_row(std::ostream& os, const IterationRecord& r,
                   std::optional<double> ref_error = std::nullopt);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  /// Index of a column, -1 if absent.
  int column(const std::string& name) const;
};

/// Parses a convergence CSV; throws ConfigError naming the offending line.
CsvTable read_csv(std::istream& in);

/// Least-squares slope of log(y) against log(x) over the last `last` points.
double loglog_slope(std::span<const double> x, std::span<const double> y, std::size_t last = 5);

/// Entry point of the command-line tool; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace goafem
