#include "comfp/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "comfp/errors.hpp"

namespace comfp {

namespace {

// All internals minimize phi(x) = -objective(x); results are flipped back.

struct Eval {
  double t = 0.0;
  double phi = 0.0;
  double dphi = 0.0;  // directional derivative along the search direction
  std::vector<double> grad;
};

class Line {
 public:
  Line(const ObjectiveHandle& obj, std::span<const double> x,
       std::span<const double> dir)
      : obj_(obj), x_(x.begin(), x.end()), dir_(dir.begin(), dir.end()) {}

  // Evaluates phi and dphi at x + t*dir. Non-finite values propagate to the
  // caller, which treats the trial as out of range.
  Eval at(double t) {
    Eval e;
    e.t = t;
    std::vector<double> xt(x_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) xt[i] = x_[i] + t * dir_[i];
    e.phi = -obj_.value(xt);
    e.grad.assign(x_.size(), 0.0);
    obj_.gradient(xt, e.grad);
    for (double& g : e.grad) g = -g;
    e.dphi = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) e.dphi += e.grad[i] * dir_[i];
    ++evals_;
    return e;
  }

  int evals() const { return evals_; }

 private:
  const ObjectiveHandle& obj_;
  std::vector<double> x_;
  std::vector<double> dir_;
  int evals_ = 0;
};

bool finite(const Eval& e) {
  return std::isfinite(e.phi) && std::isfinite(e.dphi);
}

// Minimizer of the quadratic through (a.t, a.phi, a.dphi) and (b.t, b.phi).
// Returns NaN when the fit is not convex.
double quad_interp(const Eval& a, double bt, double bphi) {
  const double dt = bt - a.t;
  const double c = (bphi - a.phi - a.dphi * dt) / (dt * dt);
  if (!(c > 0.0) || !std::isfinite(c)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return a.t - a.dphi / (2.0 * c);
}

// Secant step for the root of dphi; exact on quadratics.
double secant(const Eval& a, const Eval& b) {
  const double denom = b.dphi - a.dphi;
  if (denom == 0.0 || !std::isfinite(denom)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return b.t - b.dphi * (b.t - a.t) / denom;
}

struct WolfeParams {
  double phi0, dphi0, c1, c2;
  bool armijo(const Eval& e) const {
    return e.phi <= phi0 + c1 * e.t * dphi0;
  }
  bool curvature(const Eval& e) const {
    return std::fabs(e.dphi) <= c2 * std::fabs(dphi0);
  }
};

// Drives |dphi| toward zero with a few secant steps once a Wolfe point is
// known. On one-dimensional quadratics a single step lands on the exact
// minimizer, which is what makes the outer loop terminate finitely on
// quadratic objectives.
Eval refine(Line& line, const WolfeParams& w, Eval best, Eval other) {
  for (int r = 0; r < 6; ++r) {
    if (std::fabs(best.dphi) <= 1e-9 * std::max(1.0, std::fabs(w.dphi0))) {
      break;
    }
    const double tn = secant(other, best);
    if (!std::isfinite(tn) || tn <= 0.0) break;
    Eval e = line.at(tn);
    if (!finite(e) || !w.armijo(e) || e.phi > best.phi) break;
    other = best;
    best = e;
  }
  return best;
}

// Strong Wolfe line search (bracket + zoom with interpolation, then a
// secant refinement). Returns an Eval with t > 0 on success; t == 0 means
// no improving step was found.
Eval line_search(Line& line, const WolfeParams& w, double t_init) {
  Eval prev;
  prev.t = 0.0;
  prev.phi = w.phi0;
  prev.dphi = w.dphi0;

  double t = t_init;
  Eval lo, hi;
  bool bracketed = false;

  for (int iter = 0; iter < 30 && !bracketed; ++iter) {
    Eval e = line.at(t);
    if (!finite(e)) {
      // Too far out; fall back to a shrinking trial.
      t = prev.t + 0.5 * (t - prev.t);
      if (t - prev.t < 1e-16) break;
      continue;
    }
    if (!w.armijo(e) || (iter > 0 && e.phi >= prev.phi)) {
      lo = prev;
      hi = e;
      bracketed = true;
      break;
    }
    if (w.curvature(e)) {
      return refine(line, w, e, prev);
    }
    if (e.dphi >= 0.0) {
      lo = e;
      hi = prev;
      bracketed = true;
      break;
    }
    prev = e;
    t *= 2.0;
    if (t > 1e12) break;
  }

  if (!bracketed) {
    Eval fail;
    fail.t = 0.0;
    fail.phi = w.phi0;
    return fail;
  }

  // Zoom: lo always satisfies Armijo with the smaller phi seen so far.
  for (int iter = 0; iter < 50; ++iter) {
    double tn = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(hi.dphi) && hi.grad.size() == lo.grad.size() &&
        !hi.grad.empty() && lo.dphi * hi.dphi < 0.0) {
      tn = secant(lo, hi);
    }
    if (!std::isfinite(tn)) tn = quad_interp(lo, hi.t, hi.phi);
    const double a = std::min(lo.t, hi.t), b = std::max(lo.t, hi.t);
    const double width = b - a;
    if (!std::isfinite(tn) || tn <= a + 0.01 * width || tn >= b - 0.01 * width) {
      tn = 0.5 * (a + b);
    }
    if (width < 1e-16 * std::max(1.0, b)) break;

    Eval e = line.at(tn);
    if (!finite(e) || !w.armijo(e) || e.phi >= lo.phi) {
      hi = e;
      if (!finite(e)) {
        hi.phi = std::numeric_limits<double>::infinity();
        hi.dphi = std::numeric_limits<double>::quiet_NaN();
        hi.t = tn;
      }
      continue;
    }
    if (w.curvature(e)) {
      return refine(line, w, e, lo);
    }
    if (e.dphi * (hi.t - lo.t) >= 0.0) hi = lo;
    lo = e;
  }

  if (lo.t > 0.0 && w.armijo(lo)) return lo;  // best Armijo point found
  Eval fail;
  fail.t = 0.0;
  fail.phi = w.phi0;
  return fail;
}

}  // namespace

LbfgsResult lbfgs_maximize(const ObjectiveHandle& objective,
                           std::span<const double> x0,
                           const LbfgsOptions& options) {
  const std::size_t n = objective.dimension;
  if (x0.size() != n) {
    throw InvariantViolation("lbfgs_maximize: x0 length != dimension");
  }
  LbfgsResult result;
  result.x.assign(x0.begin(), x0.end());

  double phi = -objective.value(result.x);
  std::vector<double> g(n, 0.0);
  objective.gradient(result.x, g);
  for (double& v : g) v = -v;
  if (!std::isfinite(phi)) {
    throw NumericError("lbfgs_maximize: objective non-finite at start point");
  }
  for (double v : g) {
    if (!std::isfinite(v)) {
      throw NumericError("lbfgs_maximize: gradient non-finite at start point");
    }
  }

  auto grad_inf_norm = [&]() {
    double m = 0.0;
    for (double v : g) m = std::max(m, std::fabs(v));
    return m;
  };

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> dir(n), q(n);

  result.value = -phi;
  if (grad_inf_norm() < options.gradient_tolerance) {
    result.converged = true;
    return result;
  }

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    // Two-loop recursion for dir = -H*g.
    q = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      double sq = 0.0;
      for (std::size_t k = 0; k < n; ++k) sq += s_hist[i][k] * q[k];
      alpha[i] = rho_hist[i] * sq;
      for (std::size_t k = 0; k < n; ++k) q[k] -= alpha[i] * y_hist[i][k];
    }
    double scale = 1.0;
    if (!s_hist.empty()) {
      double sy = 0.0, yy = 0.0;
      const auto& s = s_hist.back();
      const auto& y = y_hist.back();
      for (std::size_t k = 0; k < n; ++k) {
        sy += s[k] * y[k];
        yy += y[k] * y[k];
      }
      if (yy > 0.0) scale = sy / yy;
    }
    for (std::size_t k = 0; k < n; ++k) q[k] *= scale;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      double yq = 0.0;
      for (std::size_t k = 0; k < n; ++k) yq += y_hist[i][k] * q[k];
      const double beta = rho_hist[i] * yq;
      for (std::size_t k = 0; k < n; ++k) {
        q[k] += s_hist[i][k] * (alpha[i] - beta);
      }
    }
    double dg = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      dir[k] = -q[k];
      dg += dir[k] * g[k];
    }
    if (dg >= 0.0) {
      // Curvature history went bad; fall back to steepest descent.
      dg = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        dir[k] = -g[k];
        dg -= g[k] * g[k];
      }
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    Line line(objective, result.x, dir);
    WolfeParams w{phi, dg, options.sufficient_increase, options.curvature};
    Eval step = line_search(line, w, 1.0);
    if (step.t <= 0.0) {
      result.line_search_failed = true;
      break;
    }
    if (!finite(step)) {
      throw NumericError("lbfgs_maximize: non-finite value at accepted step");
    }

    std::vector<double> s(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = step.t * dir[k];
      result.x[k] += s[k];
      y[k] = step.grad[k] - g[k];
    }
    phi = step.phi;
    g = step.grad;
    result.value = -phi;
    result.iterations = iter + 1;

    double sy = 0.0, ss = 0.0, yy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sy += s[k] * y[k];
      ss += s[k] * s[k];
      yy += y[k] * y[k];
    }
    if (sy > 1e-12 * std::sqrt(ss * yy)) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    if (grad_inf_norm() < options.gradient_tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::vector<double> finite_diff_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step) {
  if (!(step > 0.0)) {
    throw InvariantViolation("finite_diff_gradient: step must be positive");
  }
  std::vector<double> xt(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = xt[i];
    xt[i] = xi + step;
    const double fp = f(xt);
    xt[i] = xi - step;
    const double fm = f(xt);
    xt[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericError("finite_diff_gradient: non-finite evaluation");
    }
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

}  // namespace comfp
