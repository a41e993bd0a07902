#include "civqr/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "civqr/parallel.hpp"
#include "civqr/rng.hpp"

namespace civqr {

void OptimConfig::check() const {
  if (box_lower.empty()) throw std::invalid_argument("search box is empty");
  if (box_lower.size() != box_upper.size())
    throw std::invalid_argument("box bounds have mismatched dimensions");
  for (std::size_t c = 0; c < box_lower.size(); ++c) {
    if (!std::isfinite(box_lower[c]) || !std::isfinite(box_upper[c]))
      throw std::invalid_argument("box bounds must be finite");
    if (!(box_lower[c] < box_upper[c]))
      throw std::invalid_argument("box lower bound must be below upper bound");
  }
  if (n_starts < 1) throw std::invalid_argument("n_starts must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (!(f_tol > 0.0)) throw std::invalid_argument("f_tol must be positive");
  if (!(x_tol > 0.0)) throw std::invalid_argument("x_tol must be positive");
}

namespace {

bool inside_box(std::span<const double> x, const OptimConfig& cfg) {
  for (std::size_t c = 0; c < x.size(); ++c)
    if (x[c] < cfg.box_lower[c] || x[c] > cfg.box_upper[c]) return false;
  return true;
}

// Deterministic refinement of one descent endpoint.  The estimation
// objective is piecewise constant, and a simplex that collapsed inside one
// constant region cannot see past its edge; nearby strictly better regions a
// few percent of the box away are common.  Two recentring lattice scans (a
// coarse one reaching 10% of each side, a fine one reaching 2%) walk the
// point into such regions, and a shrinking compass stage sharpens the final
// cell.  Only strict improvements are taken, so a flat landscape leaves the
// point untouched.
void refine_candidate(const ObjectiveFn& f, const OptimConfig& cfg,
                      std::vector<double>& x, double& fx) {
  const std::size_t dim = cfg.dim();
  std::vector<double> width(dim);
  for (std::size_t c = 0; c < dim; ++c)
    width[c] = cfg.box_upper[c] - cfg.box_lower[c];

  // the lattice has (2 reach + 1)^dim points; keep that bounded as the
  // dimension grows
  const int reach = dim <= 3 ? 5 : dim == 4 ? 2 : dim == 5 ? 1 : 0;
  long budget = 200000;  // guards pathological caller objectives
  std::vector<double> probe(dim);

  const auto scan = [&](double rel_step) {
    if (reach == 0) return;
    for (int round = 0; round < 20; ++round) {
      std::vector<double> best_x = x;
      double best_f = fx;
      std::vector<int> off(dim, -reach);
      while (true) {
        bool ok = false;
        for (const int o : off) ok = ok || o != 0;
        if (ok) {
          for (std::size_t c = 0; c < dim; ++c) {
            probe[c] = x[c] + rel_step * width[c] * off[c];
            ok = ok && probe[c] >= cfg.box_lower[c] &&
                 probe[c] <= cfg.box_upper[c];
          }
        }
        if (ok && --budget >= 0) {
          const double fp = f(probe);
          if (fp < best_f) {
            best_f = fp;
            best_x = probe;
          }
        }
        std::size_t pos = 0;
        while (pos < dim && off[pos] == reach) off[pos++] = -reach;
        if (pos == dim) break;
        ++off[pos];
      }
      if (!(best_f < fx)) break;
      x = std::move(best_x);
      fx = best_f;
    }
  };
  scan(0.02);
  scan(0.004);

  // axis and pairwise-diagonal probes over halving steps
  std::vector<std::vector<double>> dirs;
  for (std::size_t c = 0; c < dim; ++c)
    for (const double s : {1.0, -1.0}) {
      std::vector<double> d(dim, 0.0);
      d[c] = s;
      dirs.push_back(std::move(d));
    }
  for (std::size_t i = 0; i + 1 < dim; ++i)
    for (std::size_t j = i + 1; j < dim; ++j)
      for (const double si : {1.0, -1.0})
        for (const double sj : {1.0, -1.0}) {
          std::vector<double> d(dim, 0.0);
          d[i] = si;
          d[j] = sj;
          dirs.push_back(std::move(d));
        }
  for (double h = 0.004; h >= 1e-5; h *= 0.5) {
    bool moved = true;
    while (moved && budget > 0) {
      moved = false;
      for (const auto& d : dirs) {
        bool ok = true;
        for (std::size_t c = 0; c < dim; ++c) {
          probe[c] = x[c] + h * width[c] * d[c];
          ok = ok && probe[c] >= cfg.box_lower[c] && probe[c] <= cfg.box_upper[c];
        }
        if (!ok || --budget < 0) continue;
        const double fp = f(probe);
        if (fp < fx) {
          x = probe;
          fx = fp;
          moved = true;
        }
      }
    }
  }
}

}  // namespace

NmRun nelder_mead(const ObjectiveFn& f, std::vector<double> x0,
                  const OptimConfig& cfg) {
  cfg.check();
  const std::size_t dim = cfg.dim();
  if (x0.size() != dim)
    throw std::invalid_argument("start point has wrong dimension");
  if (!inside_box(x0, cfg))
    throw std::invalid_argument("start point lies outside the box");

  // Objective with the box enforced by rejection.  Because the initial
  // simplex is inside the box and outside points evaluate to +infinity,
  // every accepted vertex stays inside and every stored f is finite.
  const double inf = std::numeric_limits<double>::infinity();
  auto fbox = [&](const std::vector<double>& x) {
    return inside_box(x, cfg) ? f(x) : inf;
  };

  const std::size_t nv = dim + 1;
  std::vector<std::vector<double>> vertex(nv, x0);
  for (std::size_t c = 0; c < dim; ++c) {
    const double step = 0.05 * (cfg.box_upper[c] - cfg.box_lower[c]);
    double moved = x0[c] + step;
    if (moved > cfg.box_upper[c]) moved = x0[c] - step;
    vertex[c + 1][c] = moved;
  }
  std::vector<double> fv(nv);
  for (std::size_t v = 0; v < nv; ++v) fv[v] = fbox(vertex[v]);

  // order[0] is the best vertex; ties keep the earlier vertex first, so a
  // flat objective converges immediately at x0.
  std::vector<std::size_t> order(nv);
  std::iota(order.begin(), order.end(), 0);
  auto sort_order = [&] {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
  };
  sort_order();

  NmRun run;
  std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);
  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    const std::size_t best = order[0];
    const std::size_t worst = order[nv - 1];
    const std::size_t second_worst = order[nv - 2];

    const double spread = fv[worst] - fv[best];
    double diameter = 0.0;
    for (std::size_t v = 0; v < nv; ++v)
      for (std::size_t c = 0; c < dim; ++c)
        diameter = std::max(diameter, std::abs(vertex[v][c] - vertex[best][c]));
    if (spread < cfg.f_tol || diameter < cfg.x_tol) {
      run.converged = true;
      break;
    }

    for (std::size_t c = 0; c < dim; ++c) {
      double s = 0.0;
      for (std::size_t v = 0; v < nv; ++v)
        if (v != worst) s += vertex[v][c];
      centroid[c] = s / static_cast<double>(dim);
    }

    for (std::size_t c = 0; c < dim; ++c)
      xr[c] = centroid[c] + (centroid[c] - vertex[worst][c]);
    const double fr = fbox(xr);

    if (fr < fv[order[0]]) {
      for (std::size_t c = 0; c < dim; ++c)
        xe[c] = centroid[c] + 2.0 * (centroid[c] - vertex[worst][c]);
      const double fe = fbox(xe);
      if (fe < fr) {
        vertex[worst] = xe;
        fv[worst] = fe;
      } else {
        vertex[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second_worst]) {
      vertex[worst] = xr;
      fv[worst] = fr;
    } else {
      bool shrink = false;
      if (fr < fv[worst]) {
        // outside contraction
        for (std::size_t c = 0; c < dim; ++c)
          xc[c] = centroid[c] + 0.5 * (centroid[c] - vertex[worst][c]);
        const double fc = fbox(xc);
        if (fc <= fr) {
          vertex[worst] = xc;
          fv[worst] = fc;
        } else {
          shrink = true;
        }
      } else {
        // inside contraction
        for (std::size_t c = 0; c < dim; ++c)
          xc[c] = centroid[c] - 0.5 * (centroid[c] - vertex[worst][c]);
        const double fc = fbox(xc);
        if (fc < fv[worst]) {
          vertex[worst] = xc;
          fv[worst] = fc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        const std::size_t keep = order[0];
        for (std::size_t v = 0; v < nv; ++v) {
          if (v == keep) continue;
          for (std::size_t c = 0; c < dim; ++c)
            vertex[v][c] = vertex[keep][c] + 0.5 * (vertex[v][c] - vertex[keep][c]);
          fv[v] = fbox(vertex[v]);
        }
      }
    }
    sort_order();
    if (cfg.record_trace) run.trace.push_back(fv[order[0]]);
  }

  run.iterations = iter;
  run.x = vertex[order[0]];
  run.f = fv[order[0]];
  return run;
}

OptimResult multi_start(const ObjectiveFn& f, const OptimConfig& cfg,
                        unsigned n_threads) {
  cfg.check();
  const std::size_t dim = cfg.dim();
  const auto n_starts = static_cast<std::size_t>(cfg.n_starts);

  OptimResult result;
  result.starts.resize(n_starts);
  parallel_for(n_starts, n_threads, [&](std::size_t s) {
    auto engine = seeded_engine(cfg.seed, s);
    std::vector<double> x0(dim);
    for (std::size_t c = 0; c < dim; ++c)
      x0[c] = uniform_in(engine, cfg.box_lower[c], cfg.box_upper[c]);
    result.starts[s] = nelder_mead(f, std::move(x0), cfg);
  });

  std::size_t best = 0;
  for (std::size_t s = 1; s < n_starts; ++s)
    if (result.starts[s].f < result.starts[best].f) best = s;
  result.best_x = result.starts[best].x;
  result.best_f = result.starts[best].f;

  // refine the most promising runs, not only the winner: on a piecewise
  // constant objective distinct runs settle in distinct flat regions, and
  // the deepest region is not always under the run with the smallest value
  std::vector<std::size_t> order(n_starts);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.starts[a].f < result.starts[b].f;
  });
  std::vector<const std::vector<double>*> seen;
  std::size_t refined = 0;
  for (std::size_t t = 0; t < n_starts && refined < 6; ++t) {
    const NmRun& run = result.starts[order[t]];
    const auto near = [&](const std::vector<double>& prior) {
      for (std::size_t c = 0; c < dim; ++c)
        if (std::fabs(run.x[c] - prior[c]) >
            0.01 * (cfg.box_upper[c] - cfg.box_lower[c]))
          return false;
      return true;
    };
    if (std::any_of(seen.begin(), seen.end(),
                    [&](const auto* p) { return near(*p); }))
      continue;
    seen.push_back(&run.x);
    ++refined;
    std::vector<double> x = run.x;
    double fx = run.f;
    refine_candidate(f, cfg, x, fx);
    if (fx < result.best_f) {
      result.best_x = std::move(x);
      result.best_f = fx;
    }
  }
  return result;
}

}  // namespace civqr
