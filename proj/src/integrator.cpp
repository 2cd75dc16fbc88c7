#include "mmrelax/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace mmrelax {

namespace {

constexpr double kSqrtEps = 1.4901161193847656e-08;  // sqrt(2^-52)
constexpr double kNewtonTol = 0.33;

double harmonic(int m) {
  double s = 0.0;
  for (int j = 1; j <= m; ++j) s += 1.0 / j;
  return s;
}

}  // namespace

double wrms_norm(std::span<const double> v, std::span<const double> weights) {
  double acc = 0.0;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = v[i] / weights[i];
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

// ============================================================================
// IterationMatrix
// ============================================================================

void IterationMatrix::configure(const JacobianLayout& layout, int n) {
  layout_ = layout;
  n_ = n;
  perm_.resize(n);
  pinv_.resize(n);
  if (layout_.perm.empty()) {
    for (int i = 0; i < n; ++i) perm_[i] = i;
  } else {
    perm_ = layout_.perm;
  }
  for (int i = 0; i < n; ++i) pinv_[perm_[i]] = i;
  if (layout_.banded) {
    band_.resize(n, layout_.kl, layout_.ku);
  } else {
    dense_.resize(n);
  }
  f_base_.resize(n);
  f_pert_.resize(n);
  y_pert_.resize(n);
  ydot_pert_.resize(n);
  rhs_.resize(n);
}

bool IterationMatrix::assemble(ImplicitSystem& sys, double t,
                               std::span<const double> y,
                               std::span<const double> ydot, double c,
                               double atol, long* residual_count) {
  auto count = [&] {
    if (residual_count) ++(*residual_count);
  };
  count();
  if (!sys.residual(t, y, ydot, f_base_)) return false;

  if (!layout_.banded) {
    dense_.set_zero();
    std::copy(y.begin(), y.end(), y_pert_.begin());
    std::copy(ydot.begin(), ydot.end(), ydot_pert_.begin());
    for (int j = 0; j < n_; ++j) {
      double sigma = kSqrtEps * std::max(std::abs(y[j]), atol);
      bool ok = false;
      for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
        y_pert_[j] = y[j] + sigma;
        ydot_pert_[j] = ydot[j] + c * sigma;
        count();
        ok = sys.residual(t, y_pert_, ydot_pert_, f_pert_);
        if (!ok) sigma *= 0.5;
      }
      y_pert_[j] = y[j];
      ydot_pert_[j] = ydot[j];
      if (!ok) return false;
      const double inv = 1.0 / sigma;
      for (int i = 0; i < n_; ++i) {
        dense_.at(i, j) = (f_pert_[i] - f_base_[i]) * inv;
      }
    }
    return true;
  }

  // Banded: batches of columns whose band coordinates are nb apart never
  // share a residual row, so one evaluation serves the whole batch.
  band_.set_zero();
  const int kl = layout_.kl, ku = layout_.ku;
  const int nb = kl + ku + 1;
  std::vector<double> sigma(n_);
  for (int group = 0; group < nb && group < n_; ++group) {
    bool ok = false;
    double shrink = 1.0;
    for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
      std::copy(y.begin(), y.end(), y_pert_.begin());
      std::copy(ydot.begin(), ydot.end(), ydot_pert_.begin());
      for (int pj = group; pj < n_; pj += nb) {
        const int j = pinv_[pj];
        sigma[j] = shrink * kSqrtEps * std::max(std::abs(y[j]), atol);
        y_pert_[j] = y[j] + sigma[j];
        ydot_pert_[j] = ydot[j] + c * sigma[j];
      }
      count();
      ok = sys.residual(t, y_pert_, ydot_pert_, f_pert_);
      if (!ok) shrink *= 0.5;
    }
    if (!ok) return false;
    for (int pj = group; pj < n_; pj += nb) {
      const int j = pinv_[pj];
      const double inv = 1.0 / sigma[j];
      const int lo = std::max(0, pj - ku);
      const int hi = std::min(n_ - 1, pj + kl);
      for (int pi = lo; pi <= hi; ++pi) {
        const int i = pinv_[pi];
        band_.at(pi, pj) = (f_pert_[i] - f_base_[i]) * inv;
      }
    }
  }
  return true;
}

bool IterationMatrix::factor() {
  return layout_.banded ? band_.factor() : dense_.factor();
}

void IterationMatrix::solve(std::span<double> b) {
  if (!layout_.banded) {
    dense_.solve(b);
    return;
  }
  for (int i = 0; i < n_; ++i) rhs_[perm_[i]] = b[i];
  band_.solve(rhs_);
  for (int i = 0; i < n_; ++i) b[i] = rhs_[perm_[i]];
}

double IterationMatrix::entry(int i, int j) const {
  if (!layout_.banded) return dense_.at(i, j);
  const int pi = perm_[i], pj = perm_[j];
  if (!band_.in_band(pi, pj)) return 0.0;
  return band_.at(pi, pj);
}

// ============================================================================
// Dense reference Jacobian
// ============================================================================

bool fd_jacobian_dense(ImplicitSystem& sys, double t,
                       std::span<const double> y,
                       std::span<const double> ydot, double c, double atol,
                       std::vector<double>& out) {
  const int n = sys.size();
  out.assign(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> f0(n), f1(n);
  if (!sys.residual(t, y, ydot, f0)) return false;
  std::vector<double> yp(y.begin(), y.end());
  std::vector<double> ydp(ydot.begin(), ydot.end());
  for (int j = 0; j < n; ++j) {
    double sigma = kSqrtEps * std::max(std::abs(y[j]), atol);
    bool ok = false;
    for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
      yp[j] = y[j] + sigma;
      ydp[j] = ydot[j] + c * sigma;
      ok = sys.residual(t, yp, ydp, f1);
      if (!ok) sigma *= 0.5;
    }
    yp[j] = y[j];
    ydp[j] = ydot[j];
    if (!ok) return false;
    const double inv = 1.0 / sigma;
    for (int i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i) * n + j] = (f1[i] - f0[i]) * inv;
    }
  }
  return true;
}

// ============================================================================
// Consistent initialization
// ============================================================================

std::optional<std::vector<double>> consistent_initial_derivatives(
    ImplicitSystem& sys, double t0, std::span<const double> y0,
    std::string* error) {
  const int n = sys.size();
  std::vector<double> zero(n, 0.0), f0(n), f1(n), probe(n, 0.0);
  if (!sys.residual(t0, y0, zero, f0)) {
    if (error) *error = "residual not evaluable at the initial state";
    return std::nullopt;
  }

  // F is linear in ydot, so unit probes give exact columns of dF/dydot.
  const JacobianLayout layout = sys.jacobian_layout();
  auto algebraic = [&](int i) { return sys.row_kind(i) == RowKind::algebraic; };

  auto fail = [&](const char* what) -> std::optional<std::vector<double>> {
    if (error) {
      *error = what;
      const std::string ctx = sys.diagnostic_context();
      if (!ctx.empty()) *error += " (" + ctx + ")";
    }
    return std::nullopt;
  };

  std::vector<double> rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = algebraic(i) ? 0.0 : -f0[i];

  if (!layout.banded) {
    DenseLU a;
    a.resize(n);
    for (int j = 0; j < n; ++j) {
      probe[j] = 1.0;
      if (!sys.residual(t0, y0, probe, f1)) {
        return fail("residual not evaluable during initialization");
      }
      probe[j] = 0.0;
      for (int i = 0; i < n; ++i) a.at(i, j) = f1[i] - f0[i];
    }
    for (int i = 0; i < n; ++i) {
      if (algebraic(i)) {
        for (int j = 0; j < n; ++j) a.at(i, j) = 0.0;
        a.at(i, i) = 1.0;
      }
    }
    if (!a.factor()) {
      return fail("singular coefficient matrix in consistent initialization");
    }
    a.solve(rhs);
  } else {
    std::vector<int> perm = layout.perm;
    if (perm.empty()) {
      perm.resize(n);
      for (int i = 0; i < n; ++i) perm[i] = i;
    }
    std::vector<int> pinv(n);
    for (int i = 0; i < n; ++i) pinv[perm[i]] = i;
    BandLU a;
    a.resize(n, layout.kl, layout.ku);
    const int nb = layout.kl + layout.ku + 1;
    for (int group = 0; group < nb && group < n; ++group) {
      for (int pj = group; pj < n; pj += nb) probe[pinv[pj]] = 1.0;
      if (!sys.residual(t0, y0, probe, f1)) {
        return fail("residual not evaluable during initialization");
      }
      for (int pj = group; pj < n; pj += nb) {
        const int j = pinv[pj];
        probe[j] = 0.0;
        const int lo = std::max(0, pj - layout.ku);
        const int hi = std::min(n - 1, pj + layout.kl);
        for (int pi = lo; pi <= hi; ++pi) {
          a.at(pi, pj) = f1[pinv[pi]] - f0[pinv[pi]];
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      if (!algebraic(i)) continue;
      const int pi = perm[i];
      const int lo = std::max(0, pi - a.upper());
      const int hi = std::min(n - 1, pi + a.lower());
      for (int pj = lo; pj <= hi; ++pj) {
        if (a.in_band(pi, pj)) a.at(pi, pj) = 0.0;
      }
      a.at(pi, pi) = 1.0;
    }
    if (!a.factor()) {
      return fail("singular coefficient matrix in consistent initialization");
    }
    std::vector<double> prhs(n);
    for (int i = 0; i < n; ++i) prhs[perm[i]] = rhs[i];
    a.solve(prhs);
    for (int i = 0; i < n; ++i) rhs[i] = prhs[perm[i]];
  }

  for (double v : rhs) {
    if (!std::isfinite(v)) {
      return fail("non-finite initial derivative");
    }
  }
  return rhs;
}

// ============================================================================
// BDF stepper
// ============================================================================

namespace {

class BdfStepper {
 public:
  BdfStepper(ImplicitSystem& sys, const IntegratorConfig& cfg)
      : sys_(sys), cfg_(cfg), n_(sys.size()) {
    for (int m = 0; m <= 6; ++m) hsum_[m] = harmonic(m);
  }

  IntegrationResult run(double t0, std::span<const double> y0, double t_end,
                        const StepObserver& on_accept);

 private:
  using Vec = std::vector<double>;

  ImplicitSystem& sys_;
  IntegratorConfig cfg_;
  int n_;
  double hsum_[7];

  double t_ = 0.0, h_ = 0.0;
  int k_ = 1;
  int valid_ = 1;  // highest trustworthy backward difference
  std::vector<Vec> d_;  // d_[j] = j-th backward difference of y at spacing h_
  Vec weights_, y_work_, ydot_work_, delta_, dy_, f_, ydot_base_, y_pred_;
  Vec delta_prev_, ydot_accept_;
  bool delta_prev_valid_ = false;
  int streak_ = 0;  // accepted steps since the last (h, k) change

  IterationMatrix jac_;
  bool have_jac_ = false;
  double c_jac_ = 0.0;
  double saved_rate_ = -1.0;

  int consec_failures_ = 0;
  IntegrationResult result_;

  double wrms(const Vec& v) const { return wrms_norm(v, weights_); }

  void update_weights() {
    for (int i = 0; i < n_; ++i) {
      weights_[i] = cfg_.atol + cfg_.rtol * std::abs(d_[0][i]);
    }
  }

  // Rescales the difference table to spacing r*h by interpolating the
  // polynomial through the stored (virtual) past values.
  void rescale(double r) {
    const int q = std::min(valid_, k_ + 1);
    // evaluate the history interpolant at the new spacing: the virtual past
    // points are P(s = -i*r) in units of h, written in backward-Newton form
    std::vector<Vec> npts(q + 1, Vec(n_, 0.0));
    npts[0] = pts[0];
    for (int i = 1; i <= q; ++i) {
      const double s = -static_cast<double>(i) * r;
      // backward-Newton coefficients c_m = s(s+1)...(s+m-1)/m!
      double cm = 1.0;
      Vec& p = npts[i];
      p = d_[0];
      for (int m = 1; m <= q; ++m) {
        cm *= (s + (m - 1)) / m;
        const Vec& dm = d_[m];
        for (int ii = 0; ii < n_; ++ii) p[ii] += cm * dm[ii];
      }
    }
    // rebuild differences at the new spacing
    for (int m = 1; m <= q; ++m) {
      for (int j = q; j >= m; --j) {
        Vec& a = npts[j];
        const Vec& b = npts[j - 1];
        for (int i = 0; i < n_; ++i) a[i] = b[i] - a[i];
      }
    }
    for (int j = 0; j <= q; ++j) d_[j] = npts[j];
    h_ *= r;
    valid_ = q;
    k_ = std::min(k_, valid_);
    streak_ = 0;
    delta_prev_valid_ = false;
  }

  bool shrink_step(double factor) {
    const double h_new = h_ * factor;
    if (h_new < cfg_.min_step) return false;
    rescale(factor);
    return true;
  }

  enum class Attempt { accepted, rejected_error, rejected_newton, rejected_eval };

  Attempt attempt_step(double& est_out, int& iters_out);
  void record(double t, double dt, int order, int iters, bool failed,
              double est) {
    result_.steps.push_back({t, dt, order, iters, failed, est});
  }
};

IntegrationResult BdfStepper::run(double t0, std::span<const double> y0,
                                  double t_end, const StepObserver& on_accept) {
  t_ = t0;
  result_ = IntegrationResult{};
  weights_.resize(n_);
  y_work_.resize(n_);
  ydot_work_.resize(n_);
  delta_.resize(n_);
  dy_.resize(n_);
  f_.resize(n_);
  ydot_base_.resize(n_);
  y_pred_.resize(n_);
  delta_prev_.assign(n_, 0.0);
  ydot_accept_.assign(n_, 0.0);

  // consistent initial derivatives
  std::string err;
  auto ydot0 = consistent_initial_derivatives(sys_, t0, y0, &err);
  if (!ydot0) {
    result_.reason = StopReason::init_failure;
    result_.message = err;
    result_.t_final = t0;
    result_.y_final.assign(y0.begin(), y0.end());
    return result_;
  }
  ydot_accept_ = *ydot0;

  d_.assign(8, Vec(n_, 0.0));
  d_[0].assign(y0.begin(), y0.end());
  update_weights();

  // initial step size: a fraction of the horizon, limited by the initial
  // derivative scale, as in classic DAE codes
  const double span = t_end - t0;
  if (cfg_.fixed_step > 0.0) {
    h_ = cfg_.fixed_step;
  } else if (cfg_.initial_step > 0.0) {
    h_ = cfg_.initial_step;
  } else {
    h_ = 1e-6 * span;
    const double ynorm = wrms(ydot_accept_);
    if (ynorm * h_ > 0.5) h_ = 0.5 / ynorm;
  }
  h_ = std::max(h_, cfg_.min_step);
  for (int i = 0; i < n_; ++i) d_[1][i] = h_ * ydot_accept_[i];
  k_ = 1;
  valid_ = 1;

  jac_.configure(sys_.jacobian_layout(), n_);

  const double roundoff_span =
      4.0 * std::numeric_limits<double>::epsilon() *
      std::max(std::abs(t0), std::abs(t_end));

  long attempts = 0;
  while (t_ < t_end - roundoff_span) {
    if (++attempts > cfg_.max_steps) {
      result_.reason = StopReason::step_limit;
      result_.message = "step limit reached";
      break;
    }
    // land exactly on t_end
    if (cfg_.fixed_step <= 0.0 && t_ + h_ > t_end) {
      const double r = (t_end - t_) / h_;
      if (r < 1.0) rescale(r);
    }

    double est = -1.0;
    int iters = 0;
    const Attempt outcome = attempt_step(est, iters);
    const double t_target = t_ + h_;

    if (outcome == Attempt::accepted) {
      consec_failures_ = 0;
      ++result_.n_accepted;
      record(t_target, h_, k_, iters, false, est);
      // promote the corrected solution into the difference table:
      // D_new[k+1] = delta, D_new[j] = D_old[j] + D_new[j+1]
      d_[k_ + 1] = delta_;
      for (int j = k_; j >= 0; --j) {
        Vec& dj = d_[j];
        const Vec& above = d_[j + 1];
        for (int i = 0; i < n_; ++i) dj[i] += above[i];
      }
      t_ = t_target;
      valid_ = k_ + 1;
      ++streak_;

      if (on_accept) on_accept(t_, d_[0], result_.steps.back());

      if (cfg_.fixed_step <= 0.0) {
        // ------------------------------------------------- order/step choice
        const double floor_est = 1e-14;
        auto factor = [&](int order, double e) {
          return 0.9 * std::pow(std::max(e, floor_est),
                                -1.0 / (order + 1));
        };
        double fac_keep = factor(k_, est);
        int k_next = k_;
        double fac_next = fac_keep;
        if (k_ > 1) {
          const double est_down = wrms(d_[k_]) / k_;
          const double f = factor(k_ - 1, est_down);
          if (f > 1.05 * fac_next) {
            k_next = k_ - 1;
            fac_next = f;
          }
        }
        if (k_ < cfg_.max_order && valid_ >= k_ + 1 && delta_prev_valid_ &&
            streak_ >= k_ + 2) {
          for (int i = 0; i < n_; ++i) dy_[i] = delta_[i] - delta_prev_[i];
          const double est_up = wrms(dy_) / (k_ + 2);
          const double f = factor(k_ + 1, est_up);
          if (f > 1.05 * fac_next) {
            k_next = k_ + 1;
            fac_next = f;
          }
        }
        delta_prev_ = delta_;
        delta_prev_valid_ = true;
        if (k_next != k_) {
          k_ = k_next;
          streak_ = 0;
          delta_prev_valid_ = false;
        }
        // quasi-constant steps: grow only by doubling, otherwise keep h
        if (fac_next >= 2.0) {
          rescale(2.0);
        }
      }
      update_weights();
      continue;
    }

    // ---------------------------------------------------------- failure path
    ++result_.n_failed;
    ++consec_failures_;
    record(t_target, h_, k_, iters, true, est);
    if (consec_failures_ >= cfg_.max_failures) {
      result_.reason = StopReason::failure_cascade;
      result_.message = "consecutive failure limit reached";
      break;
    }
    double factor;
    if (outcome == Attempt::rejected_error) {
      if (consec_failures_ == 1 && est > 0.0) {
        factor = std::clamp(0.9 * std::pow(est, -1.0 / (k_ + 1)), 0.25, 0.9);
      } else if (consec_failures_ == 2) {
        factor = 0.25;
      } else {
        k_ = 1;
        factor = 0.25;
      }
    } else {
      factor = 0.25;
      if (consec_failures_ >= 3) k_ = 1;
    }
    if (!shrink_step(factor)) {
      result_.reason = StopReason::failure_cascade;
      result_.message = "step size underflow";
      break;
    }
  }

  if (t_ >= t_end - roundoff_span) {
    result_.reason = StopReason::reached_t_end;
  }
  result_.t_final = t_;
  result_.y_final = d_[0];
  result_.ydot_final = ydot_accept_;
  return result_;
}

BdfStepper::Attempt BdfStepper::attempt_step(double& est_out, int& iters_out) {
  est_out = -1.0;
  iters_out = 0;
  const double t_new = t_ + h_;
  const double c = hsum_[k_] / h_;

  // predictor: y_pred = sum_j D[j];  h ydot = sum_m H_m D[m] + H_k * delta
  for (int i = 0; i < n_; ++i) {
    double acc = d_[0][i];
    double dacc = 0.0;
    for (int j = 1; j <= k_; ++j) {
      acc += d_[j][i];
      dacc += hsum_[j] * d_[j][i];
    }
    y_pred_[i] = acc;
    ydot_base_[i] = dacc / h_;
  }

  // iteration matrix refresh policy
  const bool need_jac = !have_jac_ || saved_rate_ > 0.25 ||
                        std::abs(c / c_jac_ - 1.0) > 0.3;
  if (need_jac) {
    ++result_.n_jacobian;
    if (!jac_.assemble(sys_, t_new, y_pred_, ydot_base_, c, cfg_.atol,
                       &result_.n_residual) ||
        !jac_.factor()) {
      have_jac_ = false;
      return Attempt::rejected_eval;
    }
    have_jac_ = true;
    c_jac_ = c;
    saved_rate_ = -1.0;
  }

  bool fresh_jac = need_jac;
  for (int pass = 0; pass < 2; ++pass) {
    // modified Newton iteration on the correction delta
    std::fill(delta_.begin(), delta_.end(), 0.0);
    std::copy(y_pred_.begin(), y_pred_.end(), y_work_.begin());
    std::copy(ydot_base_.begin(), ydot_base_.end(), ydot_work_.begin());

    bool converged = false;
    bool eval_failed = false;
    double prev_norm = 0.0;
    double rate = -1.0;
    int m = 0;
    for (m = 1; m <= cfg_.max_newton_iters; ++m) {
      ++result_.n_residual;
      if (!sys_.residual(t_new, y_work_, ydot_work_, f_)) {
        eval_failed = true;
        break;
      }
      for (int i = 0; i < n_; ++i) dy_[i] = -f_[i];
      jac_.solve(dy_);
      bool finite = true;
      for (int i = 0; i < n_; ++i) {
        if (!std::isfinite(dy_[i])) {
          finite = false;
          break;
        }
        delta_[i] += dy_[i];
        y_work_[i] = y_pred_[i] + delta_[i];
        ydot_work_[i] = ydot_base_[i] + c * delta_[i];
      }
      if (!finite) {
        eval_failed = true;
        break;
      }
      const double norm = wrms(dy_);
      if (norm == 0.0) {
        converged = true;
        break;
      }
      if (m == 1) {
        if (norm <= 0.01 * kNewtonTol) {
          converged = true;
          break;
        }
        if (saved_rate_ > 0.0 && saved_rate_ < 0.9 &&
            saved_rate_ / (1.0 - saved_rate_) * norm <= kNewtonTol) {
          converged = true;
          break;
        }
      } else {
        rate = norm / prev_norm;
        if (rate > 0.9) break;  // diverging
        if (rate / (1.0 - rate) * norm <= kNewtonTol) {
          converged = true;
          saved_rate_ = rate;
          break;
        }
      }
      prev_norm = norm;
    }
    iters_out = std::min(m, cfg_.max_newton_iters);
    if (rate > 0.0) saved_rate_ = rate;

    if (eval_failed) return Attempt::rejected_eval;
    if (converged) break;

    // not converged: refresh a stale Jacobian once and retry in place
    if (!fresh_jac) {
      ++result_.n_jacobian;
      if (!jac_.assemble(sys_, t_new, y_pred_, ydot_base_, c, cfg_.atol,
                         &result_.n_residual) ||
          !jac_.factor()) {
        have_jac_ = false;
        return Attempt::rejected_eval;
      }
      have_jac_ = true;
      c_jac_ = c;
      saved_rate_ = -1.0;
      fresh_jac = true;
      continue;
    }
    return Attempt::rejected_newton;
  }

  if (!sys_.state_ok(t_new, y_work_)) return Attempt::rejected_eval;

  est_out = wrms(delta_) / (k_ + 1);
  if (cfg_.fixed_step <= 0.0 && est_out > 1.0) return Attempt::rejected_error;

  for (int i = 0; i < n_; ++i) ydot_accept_[i] = ydot_work_[i];
  return Attempt::accepted;
}

}  // namespace

IntegrationResult integrate(ImplicitSystem& sys, double t0,
                            std::span<const double> y0, double t_end,
                            const IntegratorConfig& config,
                            const StepObserver& on_accept) {
  BdfStepper stepper(sys, config);
  return stepper.run(t0, y0, t_end, on_accept);
}

}  // namespace mmrelax
