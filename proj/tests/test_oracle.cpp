#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "covpack/oracle.hpp"

using namespace covpack;

namespace {

const std::vector<double> kUniform2{0.5, 0.5};
const std::vector<std::vector<double>> kHamming2{{0.0, 1.0}, {1.0, 0.0}};

}  // namespace

TEST_CASE("binary entropy and the Hamming closed form") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
  CHECK(binary_hamming_rd(0.0) == doctest::Approx(1.0));
  CHECK(binary_hamming_rd(0.5) == 0.0);
  CHECK(binary_hamming_rd(0.7) == 0.0);
  CHECK(binary_hamming_rd(0.11) ==
        doctest::Approx(0.4999447129909705).epsilon(1e-10));
}

TEST_CASE("lossless point recovers the source entropy") {
  {
    const auto pt = blahut_arimoto(kUniform2, kHamming2, 0.0, 1e-9);
    CHECK(pt.converged);
    CHECK(pt.rate == doctest::Approx(1.0).epsilon(1e-7));
  }
  {
    const auto pt = blahut_arimoto({0.3, 0.7}, kHamming2, 0.0, 1e-9);
    CHECK(pt.converged);
    CHECK(pt.rate == doctest::Approx(binary_entropy(0.3)).epsilon(1e-6));
  }
}

TEST_CASE("rate is zero at and beyond the trivial reproduction distortion") {
  const auto pt = blahut_arimoto(kUniform2, kHamming2, 0.5, 1e-9);
  CHECK(pt.converged);
  CHECK(pt.rate == 0.0);
  CHECK(blahut_arimoto(kUniform2, kHamming2, 0.75, 1e-9).rate == 0.0);
}

TEST_CASE("binary Hamming curve matches 1 - h(D) to 1e-6") {
  for (double D = 0.01; D < 0.495; D += 0.02) {
    const auto pt = blahut_arimoto(kUniform2, kHamming2, D, 1e-9);
    CHECK(pt.converged);
    CHECK(std::abs(pt.rate - binary_hamming_rd(D)) <= 1e-6);
  }
  const auto pt = blahut_arimoto(kUniform2, kHamming2, 0.11, 1e-9);
  CHECK(pt.rate == doctest::Approx(binary_hamming_rd(0.11)).epsilon(1e-8));
}

TEST_CASE("computed curves are convex and nonincreasing") {
  std::vector<double> rates;
  const double step = 0.03;
  for (double D = 0.02; D < 0.47; D += step) {
    const auto pt = blahut_arimoto(kUniform2, kHamming2, D, 1e-9);
    rates.push_back(pt.rate);
  }
  for (std::size_t i = 1; i < rates.size(); ++i)
    CHECK(rates[i] <= rates[i - 1] + 1e-12);
  for (std::size_t i = 1; i + 1 < rates.size(); ++i) {
    const double second = rates[i + 1] - 2 * rates[i] + rates[i - 1];
    CHECK(second >= -1e-9);
  }
}

TEST_CASE("an asymmetric ternary instance stays consistent under refinement") {
  const std::vector<double> p{0.2, 0.5, 0.3};
  const std::vector<std::vector<double>> d{
      {0.0, 1.0, 2.0}, {1.0, 0.0, 1.0}, {2.0, 1.0, 0.0}};
  const auto coarse = blahut_arimoto(p, d, 0.3, 1e-6);
  const auto fine = blahut_arimoto(p, d, 0.3, 1e-10);
  CHECK(coarse.converged);
  CHECK(fine.converged);
  // Tightening the tolerance moves the answer by less than the loose tol.
  CHECK(std::abs(coarse.rate - fine.rate) < 1e-6);
  CHECK(fine.iterations >= coarse.iterations);
}

TEST_CASE("iteration counts are reported and convergence is never silent") {
  const auto pt = blahut_arimoto(kUniform2, kHamming2, 0.25, 1e-9);
  CHECK(pt.converged);
  CHECK(pt.iterations > 0);
  CHECK(pt.slope < 0.0);
  // An unreachable tolerance reports converged = false instead of lying.
  const auto hopeless = blahut_arimoto(kUniform2, kHamming2, 0.25, 1e-17);
  CHECK(!hopeless.converged);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(blahut_arimoto(kUniform2, kHamming2, -0.1, 1e-9),
                  std::invalid_argument);
  CHECK_THROWS_AS(blahut_arimoto(kUniform2, kHamming2, 0.1, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(blahut_arimoto({0.5}, kHamming2, 0.1, 1e-9),
                  std::invalid_argument);
}
