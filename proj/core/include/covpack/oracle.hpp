#pragma once

#include <vector>

namespace covpack {

/// One point of an i.i.d. rate-distortion curve.
struct RdCurvePoint {
  double distortion = 0.0;
  double rate = 0.0;  // bits per letter
  bool converged = false;
  int iterations = 0;
  double slope = 0.0;  // Lagrangian slope s <= 0 at the point
};

/// Alternating minimization on the rate-distortion Lagrangian with an outer
/// bisection on the slope to land on the target distortion. Floating point
/// only; serves as an independent reference for the finite-n exponents.
RdCurvePoint blahut_arimoto(const std::vector<double>& p,
                            const std::vector<std::vector<double>>& d,
                            double target_distortion, double tol = 1e-9);

double binary_entropy(double p);

/// max(0, 1 - h(D)) for the uniform binary source under Hamming distortion.
double binary_hamming_rd(double distortion);

}  // namespace covpack
