#pragma once

#include <string>
#include <vector>

#include "civqr/model.hpp"

namespace civqr {

// Mapping from CSV header names to model roles.  The same column may appear
// among both the regressors and the instruments.  When an intercept flag is
// set, a leading column of ones is prepended to the corresponding side.
struct ColumnSpec {
  std::string y_col;
  std::string delta_col;
  std::vector<std::string> z_cols;
  std::vector<std::string> w_cols;
  bool intercept_z = false;
  bool intercept_w = false;
};

// Loads a comma-separated file with a header row.  The event column must
// contain only 0 and 1, durations must be positive, and every mapped cell
// must parse as a number; violations are reported with the 1-based data row
// and the column name.  Throws std::runtime_error on any problem.
Dataset load_csv(const std::string& path, const ColumnSpec& spec);

// Writes a dataset as CSV with columns y, delta, z1..zk, w1..wl.
void write_csv(const Dataset& data, const std::string& path,
               const std::vector<std::string>& z_names = {},
               const std::vector<std::string>& w_names = {});

}  // namespace civqr
