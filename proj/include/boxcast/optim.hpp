#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Dense>

namespace boxcast::optim {

struct BfgsOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-8;
  /// relative decrease of the objective below which iteration stops
  double value_tolerance = 1e-8;
  double fd_step = 1e-5;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

namespace detail {

template <typename F>
double safe_eval(F& f, const Eigen::VectorXd& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

template <typename F>
Eigen::VectorXd central_gradient(F& f, Eigen::VectorXd x, double step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    const double h = step * std::max(1.0, std::fabs(xi));
    x(i) = xi + h;
    const double up = safe_eval(f, x);
    x(i) = xi - h;
    const double down = safe_eval(f, x);
    x(i) = xi;
    g(i) = (std::isfinite(up) && std::isfinite(down)) ? (up - down) / (2.0 * h) : 0.0;
  }
  return g;
}

}  // namespace detail

/// Quasi-Newton (BFGS inverse-Hessian update) minimization with central
/// finite-difference gradients and backtracking Armijo line search.
template <typename F>
MinimizeResult bfgs_minimize(F&& f, Eigen::VectorXd x, const BfgsOptions& options = {}) {
  MinimizeResult result;
  const Eigen::Index n = x.size();
  double fx = detail::safe_eval(f, x);
  if (n == 0 || !std::isfinite(fx)) {
    result.x = std::move(x);
    result.value = fx;
    result.converged = std::isfinite(fx);
    return result;
  }

  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g = detail::central_gradient(f, x, options.fd_step);
  bool just_reset = true;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd direction = -inv_hessian * g;
    double slope = g.dot(direction);
    if (!(slope < 0.0)) {
      inv_hessian.setIdentity();
      direction = -g;
      slope = -g.squaredNorm();
      just_reset = true;
    }

    double step = 1.0;
    Eigen::VectorXd candidate;
    double f_candidate = std::numeric_limits<double>::infinity();
    bool moved = false;
    for (int k = 0; k < 60; ++k) {
      candidate = x + step * direction;
      if ((candidate - x).lpNorm<Eigen::Infinity>() <=
          options.step_tolerance * (1.0 + x.lpNorm<Eigen::Infinity>())) {
        break;
      }
      f_candidate = detail::safe_eval(f, candidate);
      if (f_candidate <= fx + 1e-4 * step * slope) {
        moved = true;
        break;
      }
      step *= 0.2;
    }
    if (!moved) {
      if (just_reset) {
        result.converged = true;
        break;
      }
      inv_hessian.setIdentity();
      just_reset = true;
      continue;
    }

    const Eigen::VectorXd g_new = detail::central_gradient(f, candidate, options.fd_step);
    const Eigen::VectorXd s = candidate - x;
    const Eigen::VectorXd y = g_new - g;
    const double f_old = fx;
    x = candidate;
    fx = f_candidate;
    g = g_new;
    just_reset = false;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const Eigen::VectorXd hy = inv_hessian * y;
      const double yhy = y.dot(hy);
      inv_hessian += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
                     (hy * s.transpose() + s * hy.transpose()) / sy;
    }
    if (std::fabs(f_old - fx) <= options.value_tolerance * (std::fabs(fx) + options.value_tolerance)) {
      result.converged = true;
      ++iter;
      break;
    }
  }
  result.x = std::move(x);
  result.value = fx;
  result.iterations = iter;
  return result;
}

struct ScalarMinimum {
  double x;
  double value;
  int evaluations;
};

/// Brent's bounded minimizer on [lower, upper]: golden-section steps combined
/// with successive parabolic interpolation. `tolerance` bounds the final
/// bracket half-width (plus a relative machine-precision term).
template <typename F>
ScalarMinimum brent_minimize(F&& f, double lower, double upper, double tolerance) {
  const double golden = 0.5 * (3.0 - std::sqrt(5.0));
  const double eps = std::sqrt(std::numeric_limits<double>::epsilon());

  double a = lower, b = upper;
  double v = a + golden * (b - a);
  double w = v, x = v;
  double d = 0.0, e = 0.0;
  double fx = f(x);
  double fv = fx, fw = fx;
  int evaluations = 1;

  for (;;) {
    const double mid = 0.5 * (a + b);
    const double tol1 = eps * std::fabs(x) + tolerance / 3.0;
    const double tol2 = 2.0 * tol1;
    if (std::fabs(x - mid) <= tol2 - 0.5 * (b - a)) break;

    bool golden_step = true;
    if (std::fabs(e) > tol1) {
      // fit a parabola through x, v, w
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p; else q = -q;
      r = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * r) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < mid ? tol1 : -tol1;
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x < mid ? b : a) - x;
      d = golden * e;
    }
    const double u = std::fabs(d) >= tol1 ? x + d : (d > 0.0 ? x + tol1 : x - tol1);
    const double fu = f(u);
    ++evaluations;

    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, evaluations};
}

}  // namespace boxcast::optim
