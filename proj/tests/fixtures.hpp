#pragma once

// Shared fixtures: the Lorenz field in coordinates adapted to the
// eigenbasis of its linearization at the origin.

#include <cmath>
#include <random>

#include "cone_verify/fields.hpp"
#include "oracles.hpp"

namespace fixtures {

using cone_verify::Matrix;

/// Eigenvalues of DX(0) for Lorenz(10, 28, 8/3): strong stable, weak stable
/// (the z axis), unstable.
inline double lorenz_strong() { return (-11.0 - std::sqrt(1201.0)) / 2.0; }
inline double lorenz_weak() { return -8.0 / 3.0; }
inline double lorenz_unstable() { return (-11.0 + std::sqrt(1201.0)) / 2.0; }

/// Columns: eigenvectors for (strong, weak, unstable).
inline Matrix lorenz_eigenbasis() {
  const double s = lorenz_strong(), u = lorenz_unstable();
  Matrix p(3, 3);
  p(0, 0) = 10.0;
  p(1, 0) = s + 10.0;
  p(2, 1) = 1.0;
  p(0, 2) = 10.0;
  p(1, 2) = u + 10.0;
  return p;
}

inline cone_verify::VectorFieldModel lorenz_adapted() {
  return cone_verify::builtin("lorenz").conjugated(lorenz_eigenbasis());
}

/// exp(J S) with S skew: a J-isometry for diagonal J = diag(+-1).
inline Matrix random_j_isometry(const Matrix& j, std::mt19937_64& rng, double scale) {
  const std::size_t n = j.rows();
  std::normal_distribution<double> g(0.0, scale);
  Matrix s(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) {
      s(r, c) = g(rng);
      s(c, r) = -s(r, c);
    }
  return oracle::expm(oracle::multiply(j, s));
}

/// V D W with J-isometries V, W and D = diag(a_1..a_q, b_1..b_p),
/// max a < min b: a strictly J-separated operator whose R has spectrum D.
struct SeparatedSample {
  Matrix j;
  Matrix l;
  cone_verify::Vector d;
};

inline SeparatedSample random_j_separated(std::size_t n, std::size_t q, std::mt19937_64& rng,
                                          double boost = 0.5) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  cone_verify::Vector jd(n), d(n);
  const double split = 0.3 + 2.0 * u(rng);
  for (std::size_t i = 0; i < n; ++i) {
    jd[i] = i < q ? -1.0 : 1.0;
    d[i] = i < q ? split * (0.2 + 0.75 * u(rng)) : split * (1.05 + 1.5 * u(rng));
  }
  const Matrix j = Matrix::diagonal(jd);
  const Matrix v = random_j_isometry(j, rng, boost), w = random_j_isometry(j, rng, boost);
  return {j, oracle::multiply(oracle::multiply(v, Matrix::diagonal(d)), w), d};
}

}  // namespace fixtures
