#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mmrelax/linalg.hpp"

using namespace mmrelax;

namespace {

// reference solve through the dense path
std::vector<double> dense_solve(int n, const std::vector<double>& a,
                                std::vector<double> b) {
  DenseLU lu;
  lu.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) lu.at(i, j) = a[i * n + j];
  }
  REQUIRE(lu.factor());
  lu.solve(b);
  return b;
}

}  // namespace

TEST_CASE("dense LU solves random systems") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 15);
    std::vector<double> a(n * n), x_true(n), b(n, 0.0);
    for (auto& v : a) v = dist(rng);
    for (int i = 0; i < n; ++i) a[i * n + i] += 3.0;
    for (auto& v : x_true) v = dist(rng);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) b[i] += a[i * n + j] * x_true[j];
    }
    const auto x = dense_solve(n, a, b);
    for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-10));
  }
}

TEST_CASE("banded LU matches dense on random banded systems") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 30);
    const int kl = static_cast<int>(rng() % 4);
    const int ku = static_cast<int>(rng() % 4);
    std::vector<double> dense(n * n, 0.0);
    BandLU band;
    band.resize(n, kl, ku);
    for (int i = 0; i < n; ++i) {
      for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
        double v = dist(rng);
        if (i == j) v += 2.0;
        dense[i * n + j] = v;
        band.at(i, j) = v;
      }
    }
    std::vector<double> b(n);
    for (auto& v : b) v = dist(rng);
    const auto x_ref = dense_solve(n, dense, b);
    REQUIRE(band.factor());
    std::vector<double> x = b;
    band.solve(x);
    for (int i = 0; i < n; ++i) {
      CHECK(x[i] == doctest::Approx(x_ref[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("banded LU needs pivoting: zero diagonal entry") {
  // [0 1; 1 0] has a zero pivot without row exchange
  BandLU band;
  band.resize(2, 1, 1);
  band.at(0, 0) = 0.0;
  band.at(0, 1) = 1.0;
  band.at(1, 0) = 1.0;
  band.at(1, 1) = 0.0;
  REQUIRE(band.factor());
  std::vector<double> b = {2.0, 3.0};
  band.solve(b);
  CHECK(b[0] == doctest::Approx(3.0));
  CHECK(b[1] == doctest::Approx(2.0));
}

TEST_CASE("singular matrix is reported") {
  DenseLU lu;
  lu.resize(2);
  lu.at(0, 0) = 1.0;
  lu.at(0, 1) = 2.0;
  lu.at(1, 0) = 2.0;
  lu.at(1, 1) = 4.0;
  CHECK(!lu.factor());
}
