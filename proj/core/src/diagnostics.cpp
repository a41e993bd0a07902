#include "civqr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "civqr/km.hpp"

namespace civqr {

SupportReport support_check(const Dataset& data, std::span<const double> beta) {
  require_valid(data);
  if (beta.size() != data.k())
    throw std::invalid_argument("coefficient vector has wrong dimension");

  SupportReport report;
  report.c_bar = std::numeric_limits<double>::infinity();
  double max_censored = -std::numeric_limits<double>::infinity();
  bool any_censored = false;
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (!data[i].delta) {
      any_censored = true;
      max_censored = std::max(max_censored, data[i].y);
    }
  }
  if (any_censored) report.c_bar = max_censored;

  const double log_c_bar = std::log(report.c_bar);
  for (std::size_t i = 0; i < data.n(); ++i) {
    double zb = 0.0;
    for (std::size_t c = 0; c < data.k(); ++c) zb += data[i].z[c] * beta[c];
    if (zb > log_c_bar) report.violating_rows.push_back(i);
  }
  report.pass = report.violating_rows.empty();
  return report;
}

namespace {

bool is_binary_column(const Dataset& data, std::size_t col, bool in_z) {
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double v = in_z ? data[i].z[col] : data[i].w[col];
    if (v != 0.0 && v != 1.0) return false;
  }
  return true;
}

void check_binary_pair(const Dataset& data, std::size_t treat_col,
                       std::size_t instr_col) {
  require_valid(data);
  if (treat_col >= data.k())
    throw std::invalid_argument("treatment column index out of range");
  if (instr_col >= data.l())
    throw std::invalid_argument("instrument column index out of range");
  if (!is_binary_column(data, treat_col, true))
    throw std::invalid_argument("treatment column is not binary");
  if (!is_binary_column(data, instr_col, false))
    throw std::invalid_argument("instrument column is not binary");
}

}  // namespace

double relevance_check(const Dataset& data, std::size_t treat_col,
                       std::size_t instr_col) {
  check_binary_pair(data, treat_col, instr_col);
  std::size_t n_w1 = 0, n_w0 = 0, taken_w1 = 0, taken_w0 = 0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const bool taken = data[i].z[treat_col] == 1.0;
    if (data[i].w[instr_col] == 1.0) {
      ++n_w1;
      if (taken) ++taken_w1;
    } else {
      ++n_w0;
      if (taken) ++taken_w0;
    }
  }
  if (n_w1 == 0 || n_w0 == 0)
    throw std::invalid_argument("one instrument arm is empty");
  return static_cast<double>(taken_w1) / static_cast<double>(n_w1) -
         static_cast<double>(taken_w0) / static_cast<double>(n_w0);
}

namespace {

// Weighted quantile by inversion of the weighted empirical distribution,
// with linear interpolation between neighbouring points.
double weighted_quantile(std::vector<std::pair<double, double>> xw, double p) {
  std::sort(xw.begin(), xw.end());
  double total = 0.0;
  for (const auto& [x, w] : xw) total += w;
  const double target = p * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < xw.size(); ++i) {
    const double prev = cum;
    cum += xw[i].second;
    if (cum >= target) {
      if (i == 0 || xw[i].second <= 0.0) return xw[i].first;
      const double frac = (target - prev) / xw[i].second;
      return xw[i - 1].first + frac * (xw[i].first - xw[i - 1].first);
    }
  }
  return xw.back().first;
}

struct CellPoints {
  std::vector<double> x;  // log durations of uncensored member rows
  std::vector<double> w;  // their censoring weights
  double weight_sum = 0.0;
};

double gaussian_kde(const CellPoints& cell, double h, double t) {
  if (cell.weight_sum <= 0.0 || !(h > 0.0)) return 0.0;
  const double inv_norm = 0.3989422804014327;  // 1/sqrt(2 pi)
  double s = 0.0;
  for (std::size_t i = 0; i < cell.x.size(); ++i) {
    const double q = (t - cell.x[i]) / h;
    s += cell.w[i] * std::exp(-0.5 * q * q);
  }
  return s * inv_norm / (h * cell.weight_sum);
}

}  // namespace

std::pair<double, double> rank_center_from_fit(const Dataset& data,
                                               std::span<const double> beta,
                                               std::size_t treat_col) {
  require_valid(data);
  if (beta.size() != data.k())
    throw std::invalid_argument("coefficient vector has wrong dimension");
  if (treat_col >= data.k())
    throw std::invalid_argument("treatment column index out of range");

  std::vector<double> z_mean(data.k(), 0.0);
  for (std::size_t i = 0; i < data.n(); ++i)
    for (std::size_t c = 0; c < data.k(); ++c) z_mean[c] += data[i].z[c];
  for (double& m : z_mean) m /= static_cast<double>(data.n());

  double base = 0.0;
  for (std::size_t c = 0; c < data.k(); ++c)
    if (c != treat_col) base += z_mean[c] * beta[c];
  return {base, base + beta[treat_col]};
}

RankReport rank_condition_check(const Dataset& data, QuantileLevel u,
                                const RankOptions& opts) {
  check_binary_pair(data, opts.treat_col, opts.instr_col);
  if (opts.grid_steps < 1)
    throw std::invalid_argument("grid_steps must be positive");
  if (!(opts.grid_radius > 0.0))
    throw std::invalid_argument("grid_radius must be positive");

  const KmCurve curve = km_fit(data);
  const std::size_t n = data.n();

  RankReport report;

  // Cell membership, conditional treatment probabilities, and the uncensored
  // weighted points per cell.
  std::array<std::size_t, 2> n_arm{};               // by instrument value
  std::array<std::array<std::size_t, 2>, 2> n_cell{};  // [w][z]
  std::array<std::array<CellPoints, 2>, 2> cells;      // [w][z]
  std::array<std::vector<std::pair<double, double>>, 2> arm_points;  // by z
  for (std::size_t i = 0; i < n; ++i) {
    const int z = data[i].z[opts.treat_col] == 1.0 ? 1 : 0;
    const int w = data[i].w[opts.instr_col] == 1.0 ? 1 : 0;
    ++n_arm[w];
    ++n_cell[w][z];
    if (data[i].delta) {
      const double weight = 1.0 / curve.eval(data[i].y);
      const double log_y = std::log(data[i].y);
      cells[w][z].x.push_back(log_y);
      cells[w][z].w.push_back(weight);
      cells[w][z].weight_sum += weight;
      arm_points[z].push_back({log_y, weight});
    }
  }

  for (int w = 0; w < 2; ++w) {
    if (n_arm[w] == 0) {
      report.warnings.push_back("instrument arm w=" + std::to_string(w) +
                                " is empty");
      for (int z = 0; z < 2; ++z) report.cell_skipped[w][z] = true;
      continue;
    }
    for (int z = 0; z < 2; ++z) {
      report.cond_prob[w][z] = static_cast<double>(n_cell[w][z]) /
                               static_cast<double>(n_arm[w]);
      if (report.cond_prob[w][z] <= opts.prob_floor) {
        report.cell_skipped[w][z] = true;
      } else if (cells[w][z].weight_sum <= 0.0) {
        report.warnings.push_back("no uncensored rows in cell z=" +
                                  std::to_string(z) + ", w=" + std::to_string(w));
      }
    }
  }

  // Per-arm Silverman bandwidths on the weighted log durations.
  std::array<double, 2> h{};
  if (opts.bandwidths) {
    h = {opts.bandwidths->first, opts.bandwidths->second};
  } else {
    for (int z = 0; z < 2; ++z) {
      const auto& pts = arm_points[z];
      if (pts.size() < 2) {
        report.warnings.push_back("not enough uncensored rows in arm z=" +
                                  std::to_string(z) + " for a bandwidth");
        continue;
      }
      double wsum = 0.0, m1 = 0.0;
      for (const auto& [x, wt] : pts) {
        wsum += wt;
        m1 += wt * x;
      }
      m1 /= wsum;
      double var = 0.0;
      for (const auto& [x, wt] : pts) var += wt * (x - m1) * (x - m1);
      var /= wsum;
      const double iqr = weighted_quantile(pts, 0.75) - weighted_quantile(pts, 0.25);
      double scale = std::sqrt(var);
      if (iqr > 0.0) scale = std::min(scale, iqr / 1.34);
      const double bw = 0.9 * scale *
                        std::pow(static_cast<double>(pts.size()), -0.2);
      if (bw > 0.0 && std::isfinite(bw)) {
        h[z] = bw;
      } else {
        report.warnings.push_back("degenerate bandwidth in arm z=" +
                                  std::to_string(z));
      }
    }
  }
  report.bandwidths = {h[0], h[1]};

  // Grid center: supplied, or the per-arm weighted u-quantiles.
  if (opts.center) {
    report.center = *opts.center;
  } else {
    std::array<double, 2> c{};
    for (int z = 0; z < 2; ++z) {
      if (arm_points[z].empty())
        throw std::invalid_argument(
            "cannot center the grid: no uncensored rows in treatment arm z=" +
            std::to_string(z));
      c[z] = weighted_quantile(arm_points[z], u.value());
    }
    report.center = {c[0], c[1]};
  }

  const int steps = opts.grid_steps;
  const double r = opts.grid_radius;
  auto axis_value = [&](double center, int step) {
    if (steps == 1) return center;
    return center - r + 2.0 * r * static_cast<double>(step) /
                            static_cast<double>(steps - 1);
  };

  report.grid.reserve(static_cast<std::size_t>(steps) * steps);
  report.determinants.reserve(report.grid.capacity());
  report.min_abs_det = std::numeric_limits<double>::infinity();
  bool any_pos = false, any_neg = false, any_flat = false;

  for (int i0 = 0; i0 < steps; ++i0) {
    const double t0 = axis_value(report.center.first, i0);
    for (int i1 = 0; i1 < steps; ++i1) {
      const double t1 = axis_value(report.center.second, i1);
      std::array<std::array<double, 2>, 2> m{};  // [w][z]
      std::array<double, 2> t{t0, t1};
      for (int w = 0; w < 2; ++w)
        for (int z = 0; z < 2; ++z)
          m[w][z] = report.cell_skipped[w][z]
                        ? 0.0
                        : report.cond_prob[w][z] *
                              gaussian_kde(cells[w][z], h[z], t[z]);
      const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
      report.grid.push_back({t0, t1});
      report.determinants.push_back(det);
      report.min_abs_det = std::min(report.min_abs_det, std::abs(det));
      if (det > 0.0)
        any_pos = true;
      else if (det < 0.0)
        any_neg = true;
      else
        any_flat = true;

      // Region screen: arm-wise distribution mismatch and density floors.
      bool in_region = true;
      for (int w = 0; w < 2 && in_region; ++w) {
        if (n_arm[w] == 0) {
          in_region = false;
          break;
        }
        double hit = 0.0;
        for (int z = 0; z < 2; ++z) {
          const auto& cell = cells[w][z];
          for (std::size_t p = 0; p < cell.x.size(); ++p)
            if (cell.x[p] <= t[z]) hit += cell.w[p];
        }
        if (std::abs(hit / static_cast<double>(n_arm[w]) - u.value()) > opts.nu)
          in_region = false;
      }
      for (int w = 0; w < 2 && in_region; ++w)
        for (int z = 0; z < 2 && in_region; ++z)
          if (!report.cell_skipped[w][z] &&
              gaussian_kde(cells[w][z], h[z], t[z]) <= opts.f_lower)
            in_region = false;
      if (in_region) ++report.n_in_region;
    }
  }
  report.direction_consistent = !any_flat && (any_pos != any_neg);
  return report;
}

}  // namespace civqr
