/// @file linalg.hpp
/// @brief Direct LU factorizations (dense and banded) with partial pivoting.
#pragma once

#include <span>
#include <vector>

namespace mmrelax {

/// Dense LU with partial pivoting (row-major storage).
class DenseLU {
 public:
  void resize(int n);
  int size() const { return n_; }

  double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double at(int i, int j) const {
    return a_[static_cast<std::size_t>(i) * n_ + j];
  }
  void set_zero();

  /// Factors in place; returns false on a zero pivot (singular matrix).
  bool factor();
  /// Solves A x = b in place using the stored factors.
  void solve(std::span<double> b) const;

 private:
  int n_ = 0;
  std::vector<double> a_;
  std::vector<int> pivot_;
  bool factored_ = false;
};

/// Banded LU with partial pivoting, LAPACK-style storage: entry (i, j) with
/// |i - j| within the band lives at row (kl + ku + i - j) of column j; the
/// top kl rows hold pivoting fill.
class BandLU {
 public:
  void resize(int n, int kl, int ku);
  int size() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

  /// Valid for |i - j| inside the band only.
  double& at(int i, int j) {
    return a_[static_cast<std::size_t>(j) * ld_ + (kl_ + ku_ + i - j)];
  }
  double at(int i, int j) const {
    return a_[static_cast<std::size_t>(j) * ld_ + (kl_ + ku_ + i - j)];
  }
  bool in_band(int i, int j) const {
    return i - j <= kl_ && j - i <= ku_;
  }
  void set_zero();

  bool factor();
  void solve(std::span<double> b) const;

 private:
  int n_ = 0, kl_ = 0, ku_ = 0, ld_ = 0;
  std::vector<double> a_;
  std::vector<int> pivot_;
  bool factored_ = false;
};

}  // namespace mmrelax
