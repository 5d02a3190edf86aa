#include <doctest.h>

#include <random>

#include "cone_verify/linalg.hpp"
#include "oracles.hpp"

using namespace cone_verify;

TEST_CASE("symmetric eigen decomposition reconstructs the matrix") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const Matrix a = symmetrize(oracle::random_matrix(n, rng));
    const SymmetricEigen e = symmetric_eigen(a);
    for (std::size_t k = 1; k < n; ++k) CHECK(e.values[k - 1] <= e.values[k]);
    const Matrix rebuilt = e.vectors * Matrix::diagonal(e.values) * e.vectors.transpose();
    CHECK(oracle::relative_error(rebuilt, a) < 1e-12);
    const Matrix gram = e.vectors.transpose() * e.vectors;
    CHECK(oracle::relative_error(gram, Matrix::identity(n)) < 1e-12);
  }
}

TEST_CASE("general eigenvalues match the cubic formula") {
  // Companion-like matrix with characteristic polynomial x^3 - 7x + 6 = (x-1)(x-2)(x+3).
  const Matrix a{{0, 0, -6}, {1, 0, 7}, {0, 1, 0}};
  auto eig = eigenvalues(a);
  std::vector<double> re;
  for (auto& e : eig) {
    CHECK(std::abs(e.imag()) < 1e-10);
    re.push_back(e.real());
  }
  std::sort(re.begin(), re.end());
  const Vector expect = oracle::cubic_roots(0.0, -7.0, 6.0);
  for (int k = 0; k < 3; ++k) CHECK(re[k] == doctest::Approx(expect[k]).epsilon(1e-10));
}

TEST_CASE("complex pairs are found") {
  const Matrix rot{{0, -2}, {2, 0}};
  auto eig = eigenvalues(rot);
  REQUIRE(eig.size() == 2);
  CHECK(std::abs(eig[0].real()) < 1e-12);
  CHECK(std::abs(std::abs(eig[0].imag()) - 2.0) < 1e-12);
}

TEST_CASE("LU solves and inverts") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const Matrix a = oracle::random_matrix(n, rng, 3.0);
    const Matrix inv = inverse(a);
    CHECK(oracle::relative_error(oracle::multiply(a, inv), Matrix::identity(n)) < 1e-12);
    Vector b(n, 1.0);
    const Vector x = solve(a, b);
    const Vector ax = a * x;
    for (std::size_t i = 0; i < n; ++i) CHECK(ax[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(determinant(Matrix{{1, 2}, {3, 4}}) == doctest::Approx(-2.0));
  CHECK(LU(Matrix{{1, 2}, {2, 4}}).singular());
}

TEST_CASE("orthonormalization and complements") {
  const Matrix a = Matrix::from_columns({{1, 1, 0}, {1, 0, 0}});
  const Matrix q = orthonormalize_columns(a);
  CHECK(q.cols() == 2);
  CHECK(oracle::relative_error(q.transpose() * q, Matrix::identity(2)) < 1e-14);
  const Matrix c = orthogonal_complement(a);
  REQUIRE(c.cols() == 1);
  CHECK(std::abs(std::abs(c(2, 0)) - 1.0) < 1e-14);
  // Dependent columns are dropped.
  CHECK(orthonormalize_columns(Matrix::from_columns({{1, 0}, {2, 0}})).cols() == 1);
}

TEST_CASE("principal angles") {
  const Matrix e1 = Matrix::from_columns({{1, 0, 0}});
  const double t = 0.3;
  const Matrix tilted = Matrix::from_columns({{std::cos(t), std::sin(t), 0}});
  CHECK(max_principal_angle(e1, tilted) == doctest::Approx(t).epsilon(1e-12));
  CHECK(min_principal_angle(e1, tilted) == doctest::Approx(t).epsilon(1e-12));
  const Matrix plane = Matrix::from_columns({{1, 0, 0}, {0, 1, 0}});
  const Matrix other = Matrix::from_columns({{1, 0, 0}, {0, std::cos(t), std::sin(t)}});
  CHECK(max_principal_angle(plane, other) == doctest::Approx(t).epsilon(1e-12));
  CHECK(min_principal_angle(plane, other) == doctest::Approx(0.0));
  // Tiny angles keep their precision.
  const Matrix close = Matrix::from_columns({{1, 1e-10, 0}});
  CHECK(max_principal_angle(e1, close) == doctest::Approx(1e-10).epsilon(1e-6));
}

TEST_CASE("singular values and spectral norm") {
  const Matrix a{{3, 0}, {0, -4}, {0, 0}};
  const Vector s = singular_values(a);
  CHECK(s[0] == doctest::Approx(4.0));
  CHECK(s[1] == doctest::Approx(3.0));
  CHECK(spectral_norm(a) == doctest::Approx(4.0));
}

TEST_CASE("matrix square root") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const Matrix b = oracle::random_matrix(n, rng);
    const Matrix spd = b * b.transpose() + Matrix::identity(n);
    const Matrix r = sqrt_positive(spd);
    CHECK(oracle::relative_error(r * r, spd) < 1e-12);
  }
  // Non-symmetric with positive spectrum.
  const Matrix m{{4, 1}, {0, 9}};
  const Matrix r = sqrt_positive(m);
  CHECK(oracle::relative_error(r * r, m) < 1e-12);
}
