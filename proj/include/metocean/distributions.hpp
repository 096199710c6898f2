#pragma once

// Closed-form distribution kernels used throughout the library. Everything is
// templated on the scalar so the same code serves double, long double and
// Eigen array expressions evaluated coefficient-wise.

#include <cmath>
#include <limits>
#include <numbers>

namespace metocean::dist {

template <typename Scalar>
inline constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

// --- standard normal --------------------------------------------------------

template <typename Scalar>
Scalar normal_cdf(Scalar x) {
  using std::erfc;
  return Scalar(0.5) * erfc(-x / std::numbers::sqrt2_v<Scalar>);
}

template <typename Scalar>
Scalar normal_pdf(Scalar x) {
  using std::exp;
  return exp(Scalar(-0.5) * x * x) * std::numbers::inv_sqrtpi_v<Scalar> /
         std::numbers::sqrt2_v<Scalar>;
}

/// Inverse standard normal CDF. Rational initial guess followed by two Halley
/// steps against erfc, which brings it to full double precision including the
/// far tails.
template <typename Scalar>
Scalar normal_quantile(Scalar p) {
  using std::log;
  using std::sqrt;
  using std::exp;
  using std::erfc;
  if (!(p > 0)) return -kInf<Scalar>;
  if (!(p < 1)) return kInf<Scalar>;

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;

  const double pd = static_cast<double>(p);
  double x;
  if (pd < plow) {
    const double q = std::sqrt(-2 * std::log(pd));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (pd <= 1 - plow) {
    const double q = pd - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log1p(-pd));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }

  Scalar xs = static_cast<Scalar>(x);
  for (int it = 0; it < 2; ++it) {
    // Work on whichever tail keeps the residual well conditioned.
    Scalar e;
    if (xs < 0) {
      e = Scalar(0.5) * erfc(-xs / std::numbers::sqrt2_v<Scalar>) - p;
    } else {
      e = (Scalar(1) - p) - Scalar(0.5) * erfc(xs / std::numbers::sqrt2_v<Scalar>);
    }
    const Scalar u = e * sqrt(2 * std::numbers::pi_v<Scalar>) * exp(xs * xs / 2);
    xs = xs - u / (1 + xs * u / 2);
  }
  return xs;
}

/// Upper-tail normal quantile: returns x with Pr(Z > x) = q, accurate for tiny q.
template <typename Scalar>
Scalar normal_upper_quantile(Scalar q) {
  return -normal_quantile(q);
}

// --- generalised Pareto -----------------------------------------------------

/// Threshold below which the shape is treated as exactly zero (exponential).
template <typename Scalar>
inline constexpr Scalar kGpZeroShape = Scalar(1e-12);

/// Survival function Pr(Y > y) of GP(shape xi, scale sigma) for y >= 0.
template <typename Scalar>
Scalar gp_survival(Scalar y, Scalar xi, Scalar sigma) {
  using std::exp;
  using std::log1p;
  if (y <= 0) return Scalar(1);
  if (std::abs(xi) < kGpZeroShape<Scalar>) return exp(-y / sigma);
  const Scalar z = xi * y / sigma;
  if (z <= -1) return Scalar(0);
  return exp(-log1p(z) / xi);
}

template <typename Scalar>
Scalar gp_cdf(Scalar y, Scalar xi, Scalar sigma) {
  using std::expm1;
  using std::log1p;
  if (y <= 0) return Scalar(0);
  if (std::abs(xi) < kGpZeroShape<Scalar>) return -expm1(-y / sigma);
  const Scalar z = xi * y / sigma;
  if (z <= -1) return Scalar(1);
  return -expm1(-log1p(z) / xi);
}

/// Log density of GP(xi, sigma) at y; -inf outside the support.
template <typename Scalar>
Scalar gp_log_pdf(Scalar y, Scalar xi, Scalar sigma) {
  using std::log;
  using std::log1p;
  if (y < 0 || sigma <= 0) return -kInf<Scalar>;
  if (std::abs(xi) < kGpZeroShape<Scalar>) return -log(sigma) - y / sigma;
  const Scalar z = xi * y / sigma;
  if (z <= -1) return -kInf<Scalar>;
  return -log(sigma) - (Scalar(1) + Scalar(1) / xi) * log1p(z);
}

/// Inverse of the survival function: y with Pr(Y > y) = s.
template <typename Scalar>
Scalar gp_quantile_survival(Scalar s, Scalar xi, Scalar sigma) {
  using std::log;
  using std::expm1;
  if (s >= 1) return Scalar(0);
  if (s <= 0) return xi < 0 ? -sigma / xi : kInf<Scalar>;
  if (std::abs(xi) < kGpZeroShape<Scalar>) return -sigma * log(s);
  return sigma * expm1(-xi * log(s)) / xi;
}

template <typename Scalar>
Scalar gp_quantile(Scalar p, Scalar xi, Scalar sigma) {
  return gp_quantile_survival(Scalar(1) - p, xi, sigma);
}

/// Upper endpoint of the GP support (infinite for xi >= 0).
template <typename Scalar>
Scalar gp_upper_endpoint(Scalar xi, Scalar sigma) {
  return xi < 0 ? -sigma / xi : kInf<Scalar>;
}

// --- standard Laplace -------------------------------------------------------

template <typename Scalar>
Scalar laplace_cdf(Scalar z) {
  using std::exp;
  return z < 0 ? Scalar(0.5) * exp(z) : Scalar(1) - Scalar(0.5) * exp(-z);
}

template <typename Scalar>
Scalar laplace_pdf(Scalar z) {
  using std::exp;
  return Scalar(0.5) * exp(-std::abs(z));
}

/// Laplace value from a probability given as (u, 1-u) so that both tails keep
/// full relative precision.
template <typename Scalar>
Scalar laplace_from_probability(Scalar u, Scalar one_minus_u) {
  using std::log;
  if (u <= one_minus_u) return log(2 * u);
  return -log(2 * one_minus_u);
}

template <typename Scalar>
Scalar laplace_quantile(Scalar u) {
  return laplace_from_probability(u, Scalar(1) - u);
}

// --- Weibull ----------------------------------------------------------------

template <typename Scalar>
Scalar weibull_cdf(Scalar x, Scalar shape, Scalar scale) {
  using std::pow;
  using std::expm1;
  if (x <= 0) return Scalar(0);
  return -expm1(-pow(x / scale, shape));
}

template <typename Scalar>
Scalar weibull_log_pdf(Scalar x, Scalar shape, Scalar scale) {
  using std::log;
  using std::pow;
  if (x <= 0) return -kInf<Scalar>;
  const Scalar t = x / scale;
  return log(shape / scale) + (shape - 1) * log(t) - pow(t, shape);
}

template <typename Scalar>
Scalar weibull_quantile(Scalar p, Scalar shape, Scalar scale) {
  using std::pow;
  using std::log1p;
  if (p <= 0) return Scalar(0);
  if (p >= 1) return kInf<Scalar>;
  return scale * pow(-log1p(-p), Scalar(1) / shape);
}

// --- Rayleigh ---------------------------------------------------------------

template <typename Scalar>
Scalar rayleigh_cdf(Scalar r, Scalar scale) {
  using std::expm1;
  if (r <= 0) return Scalar(0);
  if (scale <= 0) return Scalar(1);
  return -expm1(-r * r / (2 * scale * scale));
}

template <typename Scalar>
Scalar rayleigh_pdf(Scalar r, Scalar scale) {
  using std::exp;
  if (r < 0 || scale <= 0) return Scalar(0);
  const Scalar s2 = scale * scale;
  return r / s2 * exp(-r * r / (2 * s2));
}

template <typename Scalar>
Scalar rayleigh_quantile(Scalar p, Scalar scale) {
  using std::sqrt;
  using std::log1p;
  if (p <= 0) return Scalar(0);
  if (p >= 1) return kInf<Scalar>;
  return scale * sqrt(-2 * log1p(-p));
}

}  // namespace metocean::dist
