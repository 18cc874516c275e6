#pragma once

// Small deterministic optimizers. All of them minimize; objectives have the
// signature double(const Eigen::VectorXd& x, Eigen::VectorXd* grad) and fill
// grad when it is non-null.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace milchar::optim {

template <typename F>
concept DifferentiableObjective = requires(F f, const Eigen::VectorXd& x, Eigen::VectorXd* g) {
  { f(x, g) } -> std::convertible_to<double>;
};

struct Result {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

struct DescentOptions {
  int max_iter = 2000;
  double grad_tol = 1e-6;
  double initial_step = 1.0;
};

// Full-batch gradient descent with Armijo backtracking. The accepted step is
// doubled as the next trial step, so well-conditioned problems move fast.
template <DifferentiableObjective F>
Result gradient_descent(F&& f, Eigen::VectorXd x, const DescentOptions& opt = {}) {
  Eigen::VectorXd g(x.size());
  double fx = f(x, &g);
  double step = opt.initial_step;
  Result r;
  for (r.iterations = 0; r.iterations < opt.max_iter; ++r.iterations) {
    const double gn2 = g.squaredNorm();
    if (std::sqrt(gn2) < opt.grad_tol) {
      r.converged = true;
      break;
    }
    bool accepted = false;
    Eigen::VectorXd trial;
    double ft = 0.0;
    for (int k = 0; k < 60; ++k) {
      trial = x - step * g;
      ft = f(trial, nullptr);
      if (std::isfinite(ft) && ft <= fx - 1e-4 * step * gn2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    x = std::move(trial);
    fx = f(x, &g);
    step = std::min(step * 2.0, 1e6);
  }
  r.x = std::move(x);
  r.value = fx;
  return r;
}

// Proximal gradient (ISTA with backtracking) for f(x) + sum_i l1(i) |x_i|.
// Convergence is measured on the norm of the gradient mapping.
template <DifferentiableObjective F>
Result proximal_gradient(F&& f, Eigen::VectorXd x, const Eigen::VectorXd& l1, const DescentOptions& opt = {}) {
  auto prox = [&](const Eigen::VectorXd& v, double t) {
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double thr = t * l1(i);
      out(i) = v(i) > thr ? v(i) - thr : (v(i) < -thr ? v(i) + thr : 0.0);
    }
    return out;
  };
  auto penalty = [&](const Eigen::VectorXd& v) { return (l1.array() * v.array().abs()).sum(); };

  Eigen::VectorXd g(x.size());
  double fx = f(x, &g);
  double step = opt.initial_step;
  Result r;
  for (r.iterations = 0; r.iterations < opt.max_iter; ++r.iterations) {
    bool accepted = false;
    Eigen::VectorXd trial;
    double ft = 0.0;
    for (int k = 0; k < 60; ++k) {
      trial = prox(x - step * g, step);
      const Eigen::VectorXd d = trial - x;
      ft = f(trial, nullptr);
      if (std::isfinite(ft) && ft <= fx + g.dot(d) + d.squaredNorm() / (2.0 * step)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double mapping_norm = (trial - x).norm() / step;
    x = std::move(trial);
    fx = f(x, &g);
    if (mapping_norm < opt.grad_tol) {
      r.converged = true;
      ++r.iterations;
      break;
    }
    step = std::min(step * 2.0, 1e6);
  }
  r.x = std::move(x);
  r.value = fx + penalty(r.x);
  return r;
}

struct LbfgsOptions {
  int max_iter = 200;
  int history = 6;
  double grad_tol = 1e-6;
  double rel_tol = 1e-10;  // stop when the objective improves less than this, relatively
};

// Limited-memory BFGS with a backtracking Armijo line search. Falls back to
// the steepest-descent direction whenever the two-loop direction is not a
// descent direction.
template <DifferentiableObjective F>
Result lbfgs(F&& f, Eigen::VectorXd x, const LbfgsOptions& opt = {}) {
  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  Eigen::VectorXd g(x.size());
  double fx = f(x, &g);
  Result r;
  if (!std::isfinite(fx)) {
    r.x = std::move(x);
    r.value = fx;
    return r;
  }
  for (r.iterations = 0; r.iterations < opt.max_iter; ++r.iterations) {
    if (g.norm() < opt.grad_tol) {
      r.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = g;
    const std::size_t m = s_hist.size();
    std::vector<double> alpha(m);
    for (std::size_t i = m; i-- > 0;) {
      alpha[i] = s_hist[i].dot(q) / y_hist[i].dot(s_hist[i]);
      q -= alpha[i] * y_hist[i];
    }
    if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
      const double beta = y_hist[i].dot(q) / y_hist[i].dot(s_hist[i]);
      q += s_hist[i] * (alpha[i] - beta);
    }
    Eigen::VectorXd dir = -q;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      dir = -g;
      slope = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
    }
    double step = m == 0 ? std::min(1.0, 1.0 / std::max(g.norm(), 1e-12)) : 1.0;
    Eigen::VectorXd trial;
    double ft = 0.0;
    bool accepted = false;
    for (int k = 0; k < 50; ++k) {
      trial = x + step * dir;
      ft = f(trial, nullptr);
      if (std::isfinite(ft) && ft <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    Eigen::VectorXd g_new(x.size());
    ft = f(trial, &g_new);
    Eigen::VectorXd s = trial - x;
    Eigen::VectorXd y = g_new - g;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      if (static_cast<int>(s_hist.size()) > opt.history) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }
    const double improvement = fx - ft;
    x = std::move(trial);
    g = std::move(g_new);
    fx = ft;
    if (improvement <= opt.rel_tol * std::max(1.0, std::abs(fx))) {
      r.converged = true;
      ++r.iterations;
      break;
    }
  }
  r.x = std::move(x);
  r.value = fx;
  return r;
}

// Golden-section search for a minimum of a unimodal function on [lo, hi].
template <typename F>
double golden_section(F&& f, double lo, double hi, int iterations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

struct NelderMeadOptions {
  int max_iter = 500;
  double tol = 1e-10;  // on the simplex diameter, scaled by max(1, initial step)
};

// Derivative-free simplex descent from x0 with an axis-aligned initial
// simplex of edge `step`.
template <typename F>
Result nelder_mead(F&& f, const Eigen::VectorXd& x0, double step, const NelderMeadOptions& opt = {}) {
  const Eigen::Index n = x0.size();
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  pts.push_back(x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd p = x0;
    p(i) += step;
    pts.push_back(std::move(p));
  }
  for (const auto& p : pts) vals.push_back(f(p));
  std::vector<std::size_t> order(pts.size());
  const double tol = opt.tol * std::max(1.0, std::abs(step));

  Result r;
  for (r.iterations = 0; r.iterations < opt.max_iter; ++r.iterations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    {
      std::vector<Eigen::VectorXd> p2;
      std::vector<double> v2;
      for (auto i : order) {
        p2.push_back(pts[i]);
        v2.push_back(vals[i]);
      }
      pts = std::move(p2);
      vals = std::move(v2);
    }
    double diameter = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) diameter = std::max(diameter, (pts[i] - pts[0]).norm());
    if (diameter < tol) {
      r.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
    centroid /= static_cast<double>(n);
    const auto worst = pts.size() - 1;

    Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = f(xr);
    if (fr < vals[0]) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = std::move(xe);
        vals[worst] = fe;
      } else {
        pts[worst] = std::move(xr);
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[worst - 1]) {
      pts[worst] = std::move(xr);
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                 : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = f(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = std::move(xc);
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
      pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
      vals[i] = f(pts[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  r.x = pts[best];
  r.value = vals[best];
  return r;
}

}  // namespace milchar::optim
