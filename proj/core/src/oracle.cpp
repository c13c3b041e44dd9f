#include "covpack/oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace covpack {

namespace {

constexpr int kMaxBisectionSteps = 100;
constexpr int kMaxInnerIterations = 20000;
constexpr double kSlopeMin = -50.0;

struct CurveEval {
  double distortion = 0.0;
  double rate = 0.0;  // bits
  bool converged = false;
  int iterations = 0;
};

/// Fixed-slope alternating minimization. q is the output marginal, warm
/// started across slope steps. Rate comes from the parametric form
/// R = s*D - sum_x p_x log2 c_x at the fixed point.
CurveEval evaluate_at_slope(const std::vector<double>& p,
                            const std::vector<std::vector<double>>& d, double s,
                            double inner_tol, std::vector<double>& q) {
  const std::size_t nx = p.size();
  const std::size_t ny = q.size();
  std::vector<std::vector<double>> a(nx, std::vector<double>(ny));
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) a[x][y] = std::exp2(s * d[x][y]);

  std::vector<double> c(nx);
  CurveEval eval;
  double prev_rate = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= kMaxInnerIterations; ++it) {
    eval.iterations = it;
    for (std::size_t x = 0; x < nx; ++x) {
      double cx = 0.0;
      for (std::size_t y = 0; y < ny; ++y) cx += q[y] * a[x][y];
      c[x] = cx;
    }
    double distortion = 0.0;
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y)
        distortion += p[x] * q[y] * a[x][y] * d[x][y] / c[x];
    double rate = s * distortion;
    for (std::size_t x = 0; x < nx; ++x) rate -= p[x] * std::log2(c[x]);
    eval.distortion = distortion;
    eval.rate = std::max(rate, 0.0);
    if (!std::isnan(prev_rate) && std::abs(rate - prev_rate) < inner_tol) {
      eval.converged = true;
      return eval;
    }
    prev_rate = rate;
    // Marginal update; renormalize to absorb rounding.
    std::vector<double> next(ny, 0.0);
    double total = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      double v = 0.0;
      for (std::size_t x = 0; x < nx; ++x) v += p[x] * a[x][y] / c[x];
      next[y] = q[y] * v;
      total += next[y];
    }
    for (std::size_t y = 0; y < ny; ++y) q[y] = next[y] / total;
  }
  return eval;
}

}  // namespace

RdCurvePoint blahut_arimoto(const std::vector<double>& p,
                            const std::vector<std::vector<double>>& d,
                            double target_distortion, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  if (target_distortion < 0.0)
    throw std::invalid_argument("distortion must be nonnegative");
  if (p.empty() || d.size() != p.size() || d[0].empty())
    throw std::invalid_argument("pmf / distortion shape mismatch");
  const std::size_t ny = d[0].size();
  for (const auto& row : d)
    if (row.size() != ny) throw std::invalid_argument("ragged distortion matrix");

  // Nothing to encode beyond D_max = min_y E_p d(X, y).
  double d_max = std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < ny; ++y) {
    double ed = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) ed += p[x] * d[x][y];
    d_max = std::min(d_max, ed);
  }
  if (target_distortion >= d_max)
    return RdCurvePoint{target_distortion, 0.0, true, 0, 0.0};

  const double inner_tol = std::min(tol * 1e-3, 1e-12);
  std::vector<double> q(ny, 1.0 / static_cast<double>(ny));
  RdCurvePoint point;
  point.distortion = target_distortion;

  double lo = kSlopeMin, hi = 0.0;
  CurveEval eval;
  int total_iterations = 0;
  for (int step = 0; step < kMaxBisectionSteps; ++step) {
    const double s = (lo + hi) / 2.0;
    eval = evaluate_at_slope(p, d, s, inner_tol, q);
    total_iterations += eval.iterations;
    point.slope = s;
    point.rate = eval.rate;
    point.iterations = total_iterations;
    point.converged = eval.converged;
    if (std::abs(eval.distortion - target_distortion) <= tol) return point;
    // Distortion grows with the slope.
    if (eval.distortion > target_distortion)
      hi = s;
    else
      lo = s;
  }
  point.converged = false;
  return point;
}

double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("entropy arg out of [0,1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double binary_hamming_rd(double distortion) {
  if (distortion < 0.0) throw std::invalid_argument("distortion must be >= 0");
  if (distortion >= 0.5) return 0.0;
  return 1.0 - binary_entropy(distortion);
}

}  // namespace covpack
