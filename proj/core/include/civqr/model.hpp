#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace civqr {

// One subject: follow-up duration y > 0, event indicator delta (true when the
// duration is an observed event rather than a censoring time), regressor
// vector z, and instrument vector w.  Intercepts, when wanted, are carried as
// explicit columns of ones.
struct Observation {
  double y = 0.0;
  bool delta = false;
  std::vector<double> z;
  std::vector<double> w;
};

// A quantile level, restricted to the open interval (0,1).
class QuantileLevel {
 public:
  explicit QuantileLevel(double u) : u_(u) {
    if (!(u > 0.0 && u < 1.0))
      throw std::invalid_argument("quantile level must lie strictly between 0 and 1");
  }
  double value() const { return u_; }

 private:
  double u_;
};

// A sample of observations with fixed regressor dimension k and instrument
// dimension l.  The constructor accepts anything (including ragged or empty
// rows) so that validate() can describe what is wrong; every estimation
// routine requires a clean report first.
class Dataset {
 public:
  Dataset(std::vector<Observation> rows, std::size_t k, std::size_t l)
      : rows_(std::move(rows)), k_(k), l_(l) {}

  // Infers k and l from the first row; throws if there is none.
  static Dataset from_rows(std::vector<Observation> rows);

  std::size_t n() const { return rows_.size(); }
  std::size_t k() const { return k_; }
  std::size_t l() const { return l_; }
  const std::vector<Observation>& rows() const { return rows_; }
  const Observation& operator[](std::size_t i) const { return rows_[i]; }

  // Fraction of rows with delta == false; 0 on an empty sample.
  double censored_fraction() const;

 private:
  std::vector<Observation> rows_;
  std::size_t k_;
  std::size_t l_;
};

// Returns human-readable messages for every violated invariant: empty sample,
// nonpositive or nonfinite durations, dimension mismatches, nonfinite
// regressors or instruments, and the absence of any uncensored row.  An empty
// report means the dataset is fit for estimation.  Row indices are 0-based.
std::vector<std::string> validate(const Dataset& data);

// Throws std::invalid_argument with the joined report if validate() is
// nonempty.
void require_valid(const Dataset& data);

}  // namespace civqr
