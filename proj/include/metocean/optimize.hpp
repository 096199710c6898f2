#pragma once

#include <functional>

#include <Eigen/Dense>

namespace metocean::optim {

struct ScalarMinimum {
  double x = 0;
  double value = 0;
  int evaluations = 0;
};

/// Brent's method on [lo, hi]. f need only be unimodal on the bracket.
ScalarMinimum brent_minimize(const std::function<double(double)>& f, double lo, double hi,
                             double tol = 1e-8, int max_iter = 200);

/// Brent root finder; f(lo) and f(hi) must have opposite signs.
double brent_root(const std::function<double(double)>& f, double lo, double hi,
                  double tol = 1e-12, int max_iter = 200);

struct Minimum {
  Eigen::VectorXd x;
  double value = 0;
  int iterations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  double f_tol = 1e-10;
  double x_tol = 1e-8;
  int max_iter = 5000;
};

/// Derivative-free simplex search. Non-finite objective values are treated as
/// +inf, so callers express constraints by returning infinity.
Minimum nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                    const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                    const NelderMeadOptions& options = {});

struct BoxOptions {
  double g_tol = 1e-7;
  double f_tol = 1e-12;
  double fd_step = 1e-6;
  int max_iter = 200;
};

/// Projected quasi-Newton (BFGS on the free variables, finite-difference
/// gradients) subject to lo <= x <= hi.
Minimum minimize_box(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
                     const Eigen::VectorXd& hi, const BoxOptions& options = {});

}  // namespace metocean::optim
