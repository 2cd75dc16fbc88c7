#include "mmrelax/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace mmrelax {

// ============================================================================
// DenseLU
// ============================================================================

void DenseLU::resize(int n) {
  n_ = n;
  a_.assign(static_cast<std::size_t>(n) * n, 0.0);
  pivot_.assign(n, 0);
  factored_ = false;
}

void DenseLU::set_zero() {
  std::fill(a_.begin(), a_.end(), 0.0);
  factored_ = false;
}

bool DenseLU::factor() {
  for (int k = 0; k < n_; ++k) {
    int piv = k;
    double pmax = std::abs(at(k, k));
    for (int i = k + 1; i < n_; ++i) {
      const double v = std::abs(at(i, k));
      if (v > pmax) {
        pmax = v;
        piv = i;
      }
    }
    pivot_[k] = piv;
    if (pmax == 0.0) return false;
    if (piv != k) {
      for (int j = 0; j < n_; ++j) std::swap(at(k, j), at(piv, j));
    }
    const double inv = 1.0 / at(k, k);
    for (int i = k + 1; i < n_; ++i) {
      const double m = at(i, k) * inv;
      at(i, k) = m;
      if (m != 0.0) {
        for (int j = k + 1; j < n_; ++j) at(i, j) -= m * at(k, j);
      }
    }
  }
  factored_ = true;
  return true;
}

void DenseLU::solve(std::span<double> b) const {
  for (int k = 0; k < n_; ++k) {
    if (pivot_[k] != k) std::swap(b[k], b[pivot_[k]]);
    for (int i = k + 1; i < n_; ++i) b[i] -= at(i, k) * b[k];
  }
  for (int k = n_ - 1; k >= 0; --k) {
    b[k] /= at(k, k);
    for (int i = 0; i < k; ++i) b[i] -= at(i, k) * b[k];
  }
}

// ============================================================================
// BandLU
// ============================================================================

void BandLU::resize(int n, int kl, int ku) {
  n_ = n;
  kl_ = kl;
  ku_ = ku;
  ld_ = 2 * kl + ku + 1;
  a_.assign(static_cast<std::size_t>(n) * ld_, 0.0);
  pivot_.assign(n, 0);
  factored_ = false;
}

void BandLU::set_zero() {
  std::fill(a_.begin(), a_.end(), 0.0);
  factored_ = false;
}

// Band GEPP following the classic LAPACK dgbtrf/dgbsv organization: the
// factored band gains up to kl extra superdiagonals of fill, which is why
// storage reserves 2*kl + ku + 1 rows per column.
bool BandLU::factor() {
  const int ldab = ld_;
  auto entry = [&](int band_row, int col) -> double& {
    return a_[static_cast<std::size_t>(col) * ldab + band_row];
  };
  // Working band occupies rows [0, 2kl+ku]; the diagonal of column j sits at
  // band row kl+ku.
  const int kv = kl_ + ku_;  // fill-extended upper bandwidth
  for (int j = 0; j < n_; ++j) {
    // rows of column j present in storage: i in [j-kv, j+kl]
    const int km = std::min(kl_, n_ - 1 - j);  // subdiagonal span
    // pivot search on column j among rows j..j+km
    int piv = 0;
    double pmax = std::abs(entry(kv + 0, j));
    for (int l = 1; l <= km; ++l) {
      const double v = std::abs(entry(kv + l, j));
      if (v > pmax) {
        pmax = v;
        piv = l;
      }
    }
    pivot_[j] = j + piv;
    if (pmax == 0.0) return false;
    const int ju = std::min(j + kv, n_ - 1);  // last column touched by row j
    if (piv != 0) {
      // swap rows j and j+piv across columns j..ju
      for (int col = j; col <= ju; ++col) {
        std::swap(entry(kv + (j - col), col), entry(kv + (j + piv - col), col));
      }
    }
    const double inv = 1.0 / entry(kv, j);
    for (int l = 1; l <= km; ++l) entry(kv + l, j) *= inv;
    for (int col = j + 1; col <= ju; ++col) {
      const double ajk = entry(kv + (j - col), col);
      if (ajk != 0.0) {
        for (int l = 1; l <= km; ++l) {
          entry(kv + (j + l - col), col) -= entry(kv + l, j) * ajk;
        }
      }
    }
  }
  factored_ = true;
  return true;
}

void BandLU::solve(std::span<double> b) const {
  const int kv = kl_ + ku_;
  auto entry = [&](int band_row, int col) -> double {
    return a_[static_cast<std::size_t>(col) * ld_ + band_row];
  };
  // forward elimination with the stored multipliers and pivots
  for (int j = 0; j < n_; ++j) {
    if (pivot_[j] != j) std::swap(b[j], b[pivot_[j]]);
    const int km = std::min(kl_, n_ - 1 - j);
    for (int l = 1; l <= km; ++l) {
      b[j + l] -= entry(kv + l, j) * b[j];
    }
  }
  // back substitution on the fill-extended upper triangle
  for (int j = n_ - 1; j >= 0; --j) {
    b[j] /= entry(kv, j);
    const int top = std::max(0, j - kv);
    for (int i = top; i < j; ++i) {
      b[i] -= entry(kv + (i - j), j) * b[j];
    }
  }
}

}  // namespace mmrelax
