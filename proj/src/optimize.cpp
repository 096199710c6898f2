#include "metocean/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "metocean/error.hpp"

namespace metocean::optim {

namespace {

constexpr double kGolden = 0.3819660112501051;

double finite_or_inf(double v) {
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

ScalarMinimum brent_minimize(const std::function<double(double)>& f, double lo, double hi,
                             double tol, int max_iter) {
  double a = lo, b = hi;
  double x = a + kGolden * (b - a);
  double w = x, v = x;
  double fx = finite_or_inf(f(x));
  double fw = fx, fv = fx;
  double d = 0, e = 0;
  int evals = 1;

  for (int iter = 0; iter < max_iter; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-12;
    const double tol2 = 2 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;

    bool golden = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2 * (q - r);
      if (q > 0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (m >= x) ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x >= m) ? a - x : b - x;
      d = kGolden * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = finite_or_inf(f(u));
    ++evals;
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
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
  return {x, fx, evals};
}

double brent_root(const std::function<double(double)>& f, double lo, double hi, double tol,
                  int max_iter) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  if ((fa > 0) == (fb > 0)) {
    throw Error(ErrorKind::Internal, "brent_root: bracket does not change sign");
  }
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0) == (fc > 0)) {
      c = a; fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol1 || fb == 0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2 * m * s;
        q = 1 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2 * m * q * (q - r) - (b - a) * (r - 1));
        q = (q - 1) * (r - 1) * (s - 1);
      }
      if (p > 0) q = -q; else p = -p;
      if (2 * p < std::min(3 * m * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (m > 0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

Minimum nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                    const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                    const NelderMeadOptions& options) {
  const Eigen::Index n = x0.size();
  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> values(static_cast<std::size_t>(n + 1));
  for (Eigen::Index i = 0; i < n; ++i) simplex[static_cast<std::size_t>(i + 1)](i) += step(i);
  for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = finite_or_inf(f(simplex[i]));

  std::vector<std::size_t> order(simplex.size());
  Minimum result;
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    double x_spread = 0;
    for (const auto& p : simplex) x_spread = std::max(x_spread, (p - simplex[best]).cwiseAbs().maxCoeff());
    if (std::isfinite(values[worst]) &&
        std::abs(values[worst] - values[best]) <= options.f_tol * (std::abs(values[best]) + 1e-12) &&
        x_spread <= options.x_tol) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < simplex.size(); ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = finite_or_inf(f(reflected));
    if (fr < values[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = finite_or_inf(f(expanded));
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = finite_or_inf(f(contracted));
    if (fc < std::min(fr, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = finite_or_inf(f(simplex[i]));
    }
  }
  const auto best_it = std::min_element(values.begin(), values.end());
  result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
  result.value = *best_it;
  result.iterations = iter;
  return result;
}

namespace {

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double fx, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi, double step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x(i)));
    Eigen::VectorXd xp = x, xm = x;
    const bool up = x(i) + h <= hi(i);
    const bool down = x(i) - h >= lo(i);
    if (up && down) {
      xp(i) += h;
      xm(i) -= h;
      g(i) = (f(xp) - f(xm)) / (2 * h);
    } else if (up) {
      xp(i) += h;
      g(i) = (f(xp) - fx) / h;
    } else {
      xm(i) -= h;
      g(i) = (fx - f(xm)) / h;
    }
  }
  return g;
}

}  // namespace

Minimum minimize_box(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
                     const Eigen::VectorXd& hi, const BoxOptions& options) {
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = project(x0, lo, hi);
  double fx = f(x);
  if (!std::isfinite(fx)) {
    throw Error(ErrorKind::Fit, "minimize_box: objective not finite at starting point");
  }
  Eigen::VectorXd g = fd_gradient(f, x, fx, lo, hi, options.fd_step);
  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);

  Minimum result;
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    // Variables pinned at a bound with the gradient pushing outward are held fixed.
    Eigen::VectorXd free_mask = Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = x(i) <= lo(i) && g(i) > 0;
      const bool at_hi = x(i) >= hi(i) && g(i) < 0;
      if (at_lo || at_hi) free_mask(i) = 0;
    }
    const Eigen::VectorXd g_free = g.cwiseProduct(free_mask);
    if (g_free.lpNorm<Eigen::Infinity>() < options.g_tol) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd dir = -(inv_hessian * g_free).cwiseProduct(free_mask);
    if (dir.dot(g_free) >= 0) {
      inv_hessian.setIdentity();
      dir = -g_free;
    }

    double step = 1.0;
    Eigen::VectorXd x_new;
    double f_new = fx;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = project(x + step * dir, lo, hi);
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * g.dot(x_new - x)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.converged = g_free.lpNorm<Eigen::Infinity>() < 1e3 * options.g_tol;
      break;
    }

    const Eigen::VectorXd g_new = fd_gradient(f, x_new, f_new, lo, hi, options.fd_step);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    const double f_change = std::abs(fx - f_new);
    x = x_new;
    g = g_new;
    const double f_old = fx;
    fx = f_new;
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      inv_hessian = (I - rho * s * y.transpose()) * inv_hessian * (I - rho * y * s.transpose()) +
                    rho * s * s.transpose();
    }
    if (f_change <= options.f_tol * (std::abs(f_old) + 1.0) && s.norm() < 1e-10) {
      result.converged = true;
      break;
    }
  }
  result.x = x;
  result.value = fx;
  result.iterations = iter;
  return result;
}

}  // namespace metocean::optim
