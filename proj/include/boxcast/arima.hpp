#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "boxcast/errors.hpp"
#include "boxcast/optim.hpp"

namespace boxcast::arima {

inline constexpr int kMaxP = 5;
inline constexpr int kMaxD = 2;
inline constexpr int kMaxQ = 5;

/// Orders of a non-seasonal ARIMA(p,d,q). `drift` adds a constant to the
/// d-times differenced series: the mean when d = 0, the drift when d = 1.
struct ArimaSpec {
  int p = 0;
  int d = 0;
  int q = 0;
  bool drift = false;

  [[nodiscard]] int n_params() const noexcept { return p + q + (drift ? 1 : 0); }
  [[nodiscard]] bool valid() const noexcept {
    return p >= 0 && p <= kMaxP && d >= 0 && d <= kMaxD && q >= 0 && q <= kMaxQ &&
           (!drift || d <= 1);
  }
  [[nodiscard]] std::string str() const {
    return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")" +
           (drift ? "+drift" : "");
  }
  friend bool operator==(const ArimaSpec&, const ArimaSpec&) = default;
  friend bool operator<(const ArimaSpec& a, const ArimaSpec& b) {
    return std::tie(a.p, a.d, a.q, a.drift) < std::tie(b.p, b.d, b.q, b.drift);
  }
};

struct ArimaFit {
  ArimaSpec spec;
  Eigen::VectorXd ar;  ///< phi_1..phi_p in (1 - sum phi_i B^i)
  Eigen::VectorXd ma;  ///< theta_1..theta_q in (1 + sum theta_j B^j)
  double drift_coeff = 0.0;
  double sigma2 = 0.0;
  double loglik = 0.0;
  double aicc = 0.0;
  int n_effective = 0;
};

struct ArimaForecast {
  Eigen::VectorXd point;
  Eigen::VectorXd variance;
};

/// Innovation variances are floored here so exactly predictable series keep
/// a finite likelihood.
inline constexpr double kSigma2Floor = 1e-300;
/// Fits with an AR or MA root closer to the unit circle than this are rejected.
inline constexpr double kMinRootModulus = 1.01;

// ---------------------------------------------------------------------------
// differencing and unit-root testing

inline std::vector<double> difference(std::span<const double> series, int d) {
  if (d < 0) throw ValidationError("differencing order must be nonnegative");
  if (static_cast<int>(series.size()) <= d) {
    throw ValidationError("series of length " + std::to_string(series.size()) +
                          " too short for " + std::to_string(d) + " differences");
  }
  std::vector<double> out(series.begin(), series.end());
  for (int k = 0; k < d; ++k) {
    for (std::size_t t = 0; t + 1 < out.size(); ++t) out[t] = out[t + 1] - out[t];
    out.pop_back();
  }
  return out;
}

/// KPSS level-stationarity statistic with Bartlett long-run variance,
/// lag floor(3 sqrt(n) / 13). Returns 0 for (numerically) constant input.
inline double kpss_statistic(std::span<const double> series) {
  const auto n = static_cast<int>(series.size());
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= n;
  std::vector<double> e(series.size());
  double scale = 0.0;
  for (int t = 0; t < n; ++t) {
    e[t] = series[t] - mean;
    scale = std::max(scale, std::fabs(series[t]));
  }
  double s0 = 0.0;
  for (double v : e) s0 += v * v;
  if (s0 <= 1e-24 * std::max(1.0, scale * scale) * n) return 0.0;

  const int lags = static_cast<int>(std::floor(3.0 * std::sqrt(static_cast<double>(n)) / 13.0));
  double long_run = s0;
  for (int l = 1; l <= lags; ++l) {
    double acc = 0.0;
    for (int t = l; t < n; ++t) acc += e[t] * e[t - l];
    long_run += 2.0 * (1.0 - static_cast<double>(l) / (lags + 1)) * acc;
  }
  long_run /= n;
  double partial = 0.0, eta = 0.0;
  for (double v : e) {
    partial += v;
    eta += partial * partial;
  }
  eta /= static_cast<double>(n) * n;
  return long_run > 0.0 ? eta / long_run : std::numeric_limits<double>::infinity();
}

/// 5% critical value of the level-stationarity KPSS test.
inline constexpr double kKpssCritical5 = 0.463;

/// Smallest d in 0..2 whose d-th difference passes the KPSS test at 5%.
inline int select_differencing(std::span<const double> series) {
  for (int d = 0; d < kMaxD; ++d) {
    if (static_cast<int>(series.size()) - d < 3) return d;
    const auto w = difference(series, d);
    if (kpss_statistic(w) < kKpssCritical5) return d;
  }
  return kMaxD;
}

// ---------------------------------------------------------------------------
// parameter transforms

/// Maps unconstrained values to the coefficients of a stationary
/// (1 - sum phi_j z^j) via partial autocorrelations tanh(u_k) and the
/// Durbin-Levinson recursion.
inline Eigen::VectorXd to_stationary(const Eigen::VectorXd& raw) {
  const Eigen::Index p = raw.size();
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd prev(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const double r = std::tanh(raw(k));
    prev.head(k) = phi.head(k);
    for (Eigen::Index j = 0; j < k; ++j) phi(j) = prev(j) - r * prev(k - 1 - j);
    phi(k) = r;
  }
  return phi;
}

/// Step-down (Schur-Cohn) check: true when every root of
/// 1 - sum phi_j z^j has modulus strictly greater than `radius`.
inline bool roots_outside(const Eigen::VectorXd& phi, double radius) {
  Eigen::VectorXd a = phi;
  double scale = radius;
  for (Eigen::Index j = 0; j < a.size(); ++j, scale *= radius) a(j) *= scale;
  for (Eigen::Index k = a.size(); k > 0; --k) {
    const double r = a(k - 1);
    if (!(std::fabs(r) < 1.0)) return false;
    const double denom = 1.0 - r * r;
    Eigen::VectorXd next(k - 1);
    for (Eigen::Index j = 0; j < k - 1; ++j) next(j) = (a(j) + r * a(k - 2 - j)) / denom;
    a = next;
  }
  return true;
}

// ---------------------------------------------------------------------------
// likelihood

namespace detail {

inline constexpr int kMaxState = std::max(kMaxP, kMaxQ + 1);
// stack-allocated, bounded by the search space
using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxState, kMaxState>;
using StateVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxState, 1>;
using KronMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxState * kMaxState,
                                 kMaxState * kMaxState>;
using KronVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxState * kMaxState, 1>;

/// ARMA state-space form with state dimension r = max(p, q + 1).
struct StateSpace {
  StateMatrix transition;
  StateVector loading;  // R = (1, theta_1, ..., theta_{r-1})
  StateMatrix initial_cov;

  StateSpace(const Eigen::VectorXd& phi, const Eigen::VectorXd& theta) {
    const Eigen::Index p = phi.size(), q = theta.size();
    const Eigen::Index r = std::max<Eigen::Index>(p, q + 1);
    transition.setZero(r, r);
    transition.col(0).head(p) = phi;
    for (Eigen::Index i = 0; i + 1 < r; ++i) transition(i, i + 1) = 1.0;
    loading.setZero(r);
    loading(0) = 1.0;
    loading.segment(1, q) = theta;

    // stationary covariance: P = T P T' + R R'
    if (r == 1) {
      initial_cov.setConstant(1, 1, 1.0 / (1.0 - transition(0, 0) * transition(0, 0)));
      return;
    }
    const Eigen::Index r2 = r * r;
    KronMatrix system = KronMatrix::Identity(r2, r2);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index k = 0; k < r; ++k)
          for (Eigen::Index l = 0; l < r; ++l)
            system(i * r + j, k * r + l) -= transition(i, k) * transition(j, l);
    const StateMatrix rr = loading * loading.transpose();
    KronVector rhs(r2);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j) rhs(i * r + j) = rr(i, j);
    const KronVector sol = system.partialPivLu().solve(rhs);
    initial_cov.resize(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j) initial_cov(i, j) = sol(i * r + j);
    const StateMatrix sym = 0.5 * (initial_cov + initial_cov.transpose());
    initial_cov = sym;
  }
};

struct FilterResult {
  double sum_sq = 0.0;   // sum v_t^2 / F_t
  double sum_log = 0.0;  // sum log F_t
  StateVector state;  // filtered state at the last observation
  bool ok = true;
};

/// Kalman filter over the mean-adjusted series x (innovations form, sigma2 = 1).
inline FilterResult kalman_filter(const StateSpace& ss, std::span<const double> x) {
  FilterResult out;
  const int r = static_cast<int>(ss.transition.rows());
  // transition is a companion matrix: (T a)_i = phi_i a_0 + a_{i+1}
  std::array<double, kMaxState> phi{}, R{}, a{}, next{};
  std::array<double, kMaxState * kMaxState> P{}, Pn{};
  for (int i = 0; i < r; ++i) {
    phi[i] = ss.transition(i, 0);
    R[i] = ss.loading(i);
    for (int j = 0; j < r; ++j) P[i * r + j] = ss.initial_cov(i, j);
  }
  auto at = [&](int i, int j) { return (i < r && j < r) ? P[i * r + j] : 0.0; };
  // once the predicted covariance stops changing it stays fixed
  bool steady = false;
  std::array<double, kMaxState * kMaxState> P_steady{};
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (t > 0) {
      for (int i = 0; i < r; ++i) next[i] = phi[i] * a[0] + (i + 1 < r ? a[i + 1] : 0.0);
      a = next;
    }
    if (steady) {
      P = P_steady;
    } else if (t > 0) {
      const double p00 = P[0];
      for (int i = 0; i < r; ++i) {
        for (int j = i; j < r; ++j) {
          const double v = phi[i] * phi[j] * p00 + phi[i] * at(0, j + 1) +
                           phi[j] * at(i + 1, 0) + at(i + 1, j + 1) + R[i] * R[j];
          Pn[i * r + j] = v;
          Pn[j * r + i] = v;
        }
      }
      if (t > 1) {
        double change = 0.0;
        for (int i = 0; i < r * r; ++i) change = std::max(change, std::fabs(Pn[i] - P_steady[i]));
        steady = change < 1e-13 * std::max(1.0, std::fabs(Pn[0]));
      }
      P = Pn;
      P_steady = Pn;
    }
    const double F = P[0];
    if (!(F > 1e-12)) {
      out.ok = false;
      return out;
    }
    const double v = x[t] - a[0];
    std::array<double, kMaxState> m{};
    for (int i = 0; i < r; ++i) m[i] = P[i * r];
    for (int i = 0; i < r; ++i) {
      a[i] += m[i] * v / F;
      for (int j = 0; j < r; ++j) P[i * r + j] -= m[i] * m[j] / F;
    }
    out.sum_sq += v * v / F;
    out.sum_log += std::log(F);
  }
  out.state = StateVector::Map(a.data(), r);
  return out;
}

/// Unpacked parameters of one optimizer vector.
struct Params {
  Eigen::VectorXd phi;
  Eigen::VectorXd theta;
  double constant = 0.0;
};

struct Layout {
  ArimaSpec spec;
  double constant_center = 0.0;
  double constant_scale = 1.0;

  [[nodiscard]] Params unpack(const Eigen::VectorXd& v) const {
    Params out;
    out.phi = to_stationary(v.head(spec.p));
    out.theta = -to_stationary(v.segment(spec.p, spec.q));
    out.constant = spec.drift ? constant_center + constant_scale * v(spec.p + spec.q) : 0.0;
    return out;
  }
};

/// Concentrated CSS objective: 0.5 log(mean squared conditional residual).
inline double css_objective(const Layout& layout, const Eigen::VectorXd& v,
                            std::span<const double> w) {
  const Params prm = layout.unpack(v);
  const int p = layout.spec.p, q = layout.spec.q;
  const auto n = static_cast<int>(w.size());
  std::vector<double> e(w.size(), 0.0);
  double ss = 0.0;
  for (int t = p; t < n; ++t) {
    double r = w[t] - prm.constant;
    for (int i = 1; i <= p; ++i) r -= prm.phi(i - 1) * (w[t - i] - prm.constant);
    for (int j = 1; j <= q && t - j >= 0; ++j) r -= prm.theta(j - 1) * e[t - j];
    e[t] = r;
    ss += r * r;
  }
  const double mean_sq = std::max(ss / (n - p), kSigma2Floor);
  return 0.5 * std::log(mean_sq);
}

struct Likelihood {
  double sigma2;
  double loglik;
  double objective;  // concentrated, scaled by 1/n
};

inline std::optional<Likelihood> exact_likelihood(const Params& prm, std::span<const double> w) {
  const auto n = static_cast<double>(w.size());
  std::vector<double> x(w.begin(), w.end());
  for (double& v : x) v -= prm.constant;
  const StateSpace ss(prm.phi, prm.theta);
  if (!ss.initial_cov.allFinite() || !(ss.initial_cov(0, 0) > 0.0)) return std::nullopt;
  const FilterResult fr = kalman_filter(ss, x);
  if (!fr.ok) return std::nullopt;
  const double sigma2 = std::max(fr.sum_sq / n, kSigma2Floor);
  Likelihood out;
  out.sigma2 = sigma2;
  out.loglik = -0.5 * (n * std::log(2.0 * std::numbers::pi * sigma2) + fr.sum_log + n);
  out.objective = 0.5 * (std::log(sigma2) + fr.sum_log / n);
  return out;
}

inline double aicc(double loglik, int n_params_with_sigma, int n) {
  const int m = n_params_with_sigma;
  if (n - m - 1 <= 0) return std::numeric_limits<double>::infinity();
  return -2.0 * loglik + 2.0 * m * (static_cast<double>(n) / (n - m - 1));
}

struct FitOutcome {
  std::optional<ArimaFit> fit;
  std::string failure;
};

inline FitOutcome try_fit(std::span<const double> series, const ArimaSpec& spec) {
  if (!spec.valid()) return {std::nullopt, "invalid spec " + spec.str()};
  const auto w = difference(series, spec.d);
  const int n = static_cast<int>(w.size());
  if (n < spec.n_params() + 5) {
    return {std::nullopt, "differenced series too short for " + spec.str()};
  }

  double mean = 0.0;
  for (double v : w) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : w) var += (v - mean) * (v - mean);
  var /= n;

  ArimaFit fit;
  fit.spec = spec;
  fit.n_effective = n;

  if (spec.p == 0 && spec.q == 0) {
    // closed-form Gaussian ML
    fit.ar.resize(0);
    fit.ma.resize(0);
    fit.drift_coeff = spec.drift ? mean : 0.0;
    double ss = 0.0;
    for (double v : w) ss += (v - fit.drift_coeff) * (v - fit.drift_coeff);
    fit.sigma2 = std::max(ss / n, kSigma2Floor);
    fit.loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi * fit.sigma2) + 1.0);
    fit.aicc = aicc(fit.loglik, spec.n_params() + 1, n);
    if (!std::isfinite(fit.aicc)) return {std::nullopt, "AICc undefined for " + spec.str()};
    return {fit, {}};
  }

  Layout layout{spec, mean, 1.0};
  if (var > 0.0) layout.constant_scale = std::sqrt(var / n);
  const Eigen::Index dim = spec.n_params();
  const optim::BfgsOptions options;

  auto css = [&](const Eigen::VectorXd& v) { return css_objective(layout, v, w); };
  const auto css_min = optim::bfgs_minimize(css, Eigen::VectorXd::Zero(dim), options);
  Eigen::VectorXd start = std::isfinite(css_min.value) ? css_min.x : Eigen::VectorXd::Zero(dim);

  auto ml = [&](const Eigen::VectorXd& v) {
    const auto lik = exact_likelihood(layout.unpack(v), w);
    return lik ? lik->objective : std::numeric_limits<double>::infinity();
  };
  if (!std::isfinite(ml(start))) start.setZero();
  const auto ml_min = optim::bfgs_minimize(ml, start, options);
  if (!ml_min.converged) return {std::nullopt, "ML did not converge for " + spec.str()};

  const Params prm = layout.unpack(ml_min.x);
  const auto lik = exact_likelihood(prm, w);
  if (!lik) return {std::nullopt, "likelihood undefined at optimum for " + spec.str()};
  if (!roots_outside(prm.phi, kMinRootModulus)) {
    return {std::nullopt, "non-stationary optimum for " + spec.str()};
  }
  if (!roots_outside(-prm.theta, kMinRootModulus)) {
    return {std::nullopt, "non-invertible optimum for " + spec.str()};
  }
  fit.ar = prm.phi;
  fit.ma = prm.theta;
  fit.drift_coeff = prm.constant;
  fit.sigma2 = lik->sigma2;
  fit.loglik = lik->loglik;
  fit.aicc = aicc(fit.loglik, spec.n_params() + 1, n);
  if (!std::isfinite(fit.aicc)) return {std::nullopt, "AICc undefined for " + spec.str()};
  return {fit, {}};
}

}  // namespace detail

/// Gaussian maximum-likelihood fit of `spec` to `series`. Conditional sum of
/// squares supplies start values for the exact likelihood, which is evaluated
/// by a Kalman filter on the differenced, mean/drift-adjusted series.
/// Throws NumericalError when the optimum is not usable.
inline ArimaFit fit(std::span<const double> series, const ArimaSpec& spec) {
  if (!spec.valid()) throw ValidationError("invalid ARIMA spec " + spec.str());
  if (static_cast<int>(series.size()) - spec.d < spec.n_params() + 5) {
    throw ValidationError("series too short to fit " + spec.str());
  }
  auto outcome = detail::try_fit(series, spec);
  if (!outcome.fit) throw NumericalError(outcome.failure);
  return *outcome.fit;
}

// ---------------------------------------------------------------------------
// order selection

/// One candidate visited by the stepwise search.
struct Candidate {
  ArimaSpec spec;
  std::optional<double> aicc;  ///< empty when the fit was discarded
};

struct SelectionTrace {
  int d = 0;
  std::vector<Candidate> visited;
};

namespace detail {

/// Strict preference: lower AICc; within 1e-8, fewer parameters, then lower p.
inline bool better(const ArimaFit& a, const ArimaFit& b) {
  if (a.aicc < b.aicc - 1e-8) return true;
  if (b.aicc < a.aicc - 1e-8) return false;
  if (a.spec.n_params() != b.spec.n_params()) return a.spec.n_params() < b.spec.n_params();
  if (a.spec.p != b.spec.p) return a.spec.p < b.spec.p;
  return std::tie(a.spec.q, a.spec.drift) < std::tie(b.spec.q, b.spec.drift);
}

}  // namespace detail

/// Stepwise AICc search: d by repeated KPSS tests, then hill climbing over
/// p +/- 1, q +/- 1 and drift toggling from the seeds (2,2), (0,0), (1,0),
/// (0,1) with drift allowed for d <= 1, plus (0,0) without drift.
inline ArimaFit auto_select(std::span<const double> series, SelectionTrace* trace = nullptr) {
  if (series.size() < 10) {
    throw ValidationError("automatic ARIMA selection needs at least 10 observations");
  }
  const int d = select_differencing(series);
  const int n_diff = static_cast<int>(series.size()) - d;
  const bool short_series = n_diff < 10;
  const bool drift_allowed = d <= 1;

  std::map<ArimaSpec, std::optional<ArimaFit>> cache;
  if (trace) {
    trace->d = d;
    trace->visited.clear();
  }
  auto admissible = [&](const ArimaSpec& s) {
    return s.valid() && n_diff >= s.n_params() + 5 && (!short_series || s.p + s.q <= 1);
  };
  auto evaluate = [&](const ArimaSpec& s) -> const std::optional<ArimaFit>& {
    auto it = cache.find(s);
    if (it != cache.end()) return it->second;
    auto outcome = detail::try_fit(series, s);
    if (trace) {
      trace->visited.push_back(
          {s, outcome.fit ? std::optional<double>(outcome.fit->aicc) : std::nullopt});
    }
    return cache.emplace(s, std::move(outcome.fit)).first->second;
  };

  std::optional<ArimaFit> best;
  auto consider = [&](const ArimaSpec& s) {
    if (!admissible(s)) return false;
    const auto& f = evaluate(s);
    if (f && (!best || detail::better(*f, *best))) {
      best = *f;
      return true;
    }
    return false;
  };

  const std::pair<int, int> seeds[] = {{2, 2}, {0, 0}, {1, 0}, {0, 1}};
  for (const auto& [p, q] : seeds) consider({p, d, q, drift_allowed});
  if (drift_allowed) consider({0, d, 0, false});

  for (int step = 0; best && step < 100; ++step) {
    const ArimaSpec center = best->spec;
    bool improved = false;
    const ArimaSpec neighbours[] = {
        {center.p - 1, d, center.q, center.drift}, {center.p + 1, d, center.q, center.drift},
        {center.p, d, center.q - 1, center.drift}, {center.p, d, center.q + 1, center.drift},
        {center.p, d, center.q, !center.drift},
    };
    for (const auto& s : neighbours) {
      if (s.drift && !drift_allowed) continue;
      improved = consider(s) || improved;
    }
    if (!improved) break;
  }

  if (!best) {
    auto fallback = detail::try_fit(series, {0, d, 0, false});
    if (!fallback.fit) throw NumericalError("no ARIMA candidate could be fitted");
    if (trace) trace->visited.push_back({fallback.fit->spec, fallback.fit->aicc});
    best = std::move(fallback.fit);
  }
  return *best;
}

// ---------------------------------------------------------------------------
// forecasting

/// psi weights psi_0..psi_{h-1} of theta(B) / (phi(B) (1 - B)^d).
inline Eigen::VectorXd psi_weights(const ArimaFit& fit, int h) {
  // phi*(B) = phi(B)(1-B)^d, written as 1 - sum a_i B^i
  std::vector<double> poly{1.0};
  for (Eigen::Index i = 0; i < fit.ar.size(); ++i) poly.push_back(-fit.ar(i));
  for (int k = 0; k < fit.spec.d; ++k) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= poly[i];
    }
    poly = std::move(next);
  }
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(h);
  psi(0) = 1.0;
  for (int j = 1; j < h; ++j) {
    double v = j <= fit.ma.size() ? fit.ma(j - 1) : 0.0;
    for (int i = 1; i < static_cast<int>(poly.size()) && i <= j; ++i) v -= poly[i] * psi(j - i);
    psi(j) = v;
  }
  return psi;
}

/// Conditional-mean forecasts for horizons 1..H and their variances
/// sigma2 * sum_{j<h} psi_j^2.
inline ArimaForecast forecast(const ArimaFit& fit, std::span<const double> series, int horizon) {
  if (horizon < 1) throw ValidationError("forecast horizon must be at least 1");
  const int d = fit.spec.d;
  const auto w = difference(series, d);

  std::vector<double> x(w.begin(), w.end());
  for (double& v : x) v -= fit.drift_coeff;
  const detail::StateSpace ss(fit.ar, fit.ma);
  const auto filtered = detail::kalman_filter(ss, x);
  if (!filtered.ok) throw NumericalError("Kalman filter failed while forecasting");

  Eigen::VectorXd w_hat(horizon);
  detail::StateVector a = filtered.state;
  for (int h = 0; h < horizon; ++h) {
    const detail::StateVector next = ss.transition * a;
    a = next;
    w_hat(h) = fit.drift_coeff + a(0);
  }

  // integrate back through each differencing level, last values first
  std::vector<double> last_levels;
  {
    std::vector<double> level(series.begin(), series.end());
    for (int k = 0; k < d; ++k) {
      last_levels.push_back(level.back());
      level = difference(level, 1);
    }
  }
  Eigen::VectorXd point = w_hat;
  for (int k = d - 1; k >= 0; --k) {
    double prev = last_levels[k];
    for (int h = 0; h < horizon; ++h) {
      prev += point(h);
      point(h) = prev;
    }
  }

  const Eigen::VectorXd psi = psi_weights(fit, horizon);
  Eigen::VectorXd variance(horizon);
  double acc = 0.0;
  for (int h = 0; h < horizon; ++h) {
    acc += psi(h) * psi(h);
    variance(h) = fit.sigma2 * acc;
  }
  return {point, variance};
}

}  // namespace boxcast::arima
