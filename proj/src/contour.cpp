#include "metocean/contour.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "metocean/distributions.hpp"
#include "metocean/error.hpp"
#include "metocean/parallel.hpp"

namespace metocean {

namespace {

constexpr double kTwoPi = 2 * M_PI;

using Vec2 = std::array<double, 2>;

std::vector<double> circular_moving_average(const std::vector<double>& v, int window) {
  if (window <= 1) return v;
  const int half = window / 2;
  const int n = static_cast<int>(v.size());
  std::vector<double> out(v.size());
  for (int k = 0; k < n; ++k) {
    double s = 0;
    for (int d = -half; d <= half; ++d) s += v[static_cast<std::size_t>(((k + d) % n + n) % n)];
    out[static_cast<std::size_t>(k)] = s / (2 * half + 1);
  }
  return out;
}

// Upper-quantile of a scratch buffer (type 7), partially reordering it.
double upper_quantile(std::vector<double>& buf, double p) {
  const double h = (static_cast<double>(buf.size()) - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.end());
  const double a = buf[lo];
  if (lo + 1 >= buf.size()) return a;
  const double b = *std::min_element(buf.begin() + static_cast<std::ptrdiff_t>(lo) + 1, buf.end());
  return a + (h - static_cast<double>(lo)) * (b - a);
}

// Intersection of half-planes {x : x . n_k <= c_k} by successive clipping of a box.
std::vector<Vec2> half_plane_polygon(const std::vector<double>& theta, const std::vector<double>& c) {
  double bound = 1;
  for (double v : c) bound = std::max(bound, std::abs(v));
  bound = 4 * bound;
  std::vector<Vec2> poly = {{-bound, -bound}, {bound, -bound}, {bound, bound}, {-bound, bound}};
  for (std::size_t k = 0; k < theta.size() && !poly.empty(); ++k) {
    const double nx = std::cos(theta[k]), ny = std::sin(theta[k]);
    auto side = [&](const Vec2& p) { return p[0] * nx + p[1] * ny - c[k]; };
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % poly.size()];
      const double sa = side(a), sb = side(b);
      if (sa <= 0) out.push_back(a);
      if ((sa <= 0) != (sb <= 0)) {
        const double t = sa / (sa - sb);
        out.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
      }
    }
    poly = std::move(out);
  }
  return poly;
}

double signed_area(const std::vector<Vec2>& loop) {
  double a = 0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const auto& p = loop[i];
    const auto& q = loop[(i + 1) % loop.size()];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

Vec2 centroid(const std::vector<Vec2>& loop) {
  const double a = signed_area(loop);
  double cx = 0, cy = 0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const auto& p = loop[i];
    const auto& q = loop[(i + 1) % loop.size()];
    const double w = p[0] * q[1] - q[0] * p[1];
    cx += (p[0] + q[0]) * w;
    cy += (p[1] + q[1]) * w;
  }
  if (std::abs(a) < 1e-300) return loop.front();
  return {cx / (6 * a), cy / (6 * a)};
}

// Counter-clockwise loop starting from the smallest polar angle about its centroid.
std::vector<ContourPoint> as_contour_loop(std::vector<Vec2> loop, Vec2* centre_out = nullptr) {
  if (signed_area(loop) < 0) std::reverse(loop.begin(), loop.end());
  const Vec2 c = centroid(loop);
  if (centre_out) *centre_out = c;
  std::vector<ContourPoint> pts;
  pts.reserve(loop.size());
  for (const auto& p : loop) {
    double th = std::atan2(p[1] - c[1], p[0] - c[0]);
    if (th < 0) th += kTwoPi;
    pts.push_back({th, p[0], p[1], true});
  }
  const auto first = std::min_element(pts.begin(), pts.end(),
                                      [](const ContourPoint& a, const ContourPoint& b) { return a.theta < b.theta; });
  std::rotate(pts.begin(), first, pts.end());
  return pts;
}

}  // namespace

std::string to_string(ContourMethod m) {
  switch (m) {
    case ContourMethod::DirectSampling: return "direct-sampling";
    case ContourMethod::JointExceedance: return "joint-exceedance";
    case ContourMethod::Isodensity: return "isodensity";
    case ContourMethod::Iform: return "iform";
  }
  return "unknown";
}

ContourMethod parse_contour_method(const std::string& name) {
  for (auto m : {ContourMethod::DirectSampling, ContourMethod::JointExceedance, ContourMethod::Isodensity,
                 ContourMethod::Iform}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::Config, "unknown contour method '" + name + "'");
}

Points2 to_points(const std::vector<StormEvent>& events) {
  Points2 p(static_cast<Eigen::Index>(events.size()), 2);
  for (std::size_t i = 0; i < events.size(); ++i) {
    p(static_cast<Eigen::Index>(i), 0) = events[i].hs;
    p(static_cast<Eigen::Index>(i), 1) = events[i].tp;
  }
  return p;
}

// ---------------------------------------------------------------- direct sampling

Contour direct_sampling_contour(const Points2& sample, double alpha, const DirectSamplingOptions& options) {
  if (!(alpha > 0 && alpha < 0.5)) throw Error(ErrorKind::Config, "direct sampling: alpha must lie in (0, 0.5)");
  if (options.n_theta < 8) throw Error(ErrorKind::Config, "direct sampling: n_theta too small");
  const auto n = static_cast<double>(sample.rows());
  if (alpha * n < 10) {
    throw Error(ErrorKind::InsufficientTail, "direct sampling: alpha * n = " + std::to_string(alpha * n) +
                                                 " < 10; simulate a larger sample");
  }
  Contour c;
  c.method = ContourMethod::DirectSampling;
  c.alpha = alpha;
  if (n < 50 / alpha) c.warnings.push_back("sample smaller than 50/alpha; tail quantiles are noisy");

  const auto K = static_cast<std::size_t>(options.n_theta);
  std::vector<double> theta(K), raw(K);
  for (std::size_t k = 0; k < K; ++k) theta[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(K);
  parallel_for(K, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> buf(static_cast<std::size_t>(sample.rows()));
    for (std::size_t k = lo; k < hi; ++k) {
      Eigen::Map<Eigen::VectorXd> proj(buf.data(), sample.rows());
      proj = sample.col(0) * std::cos(theta[k]) + sample.col(1) * std::sin(theta[k]);
      raw[k] = upper_quantile(buf, 1 - alpha);
    }
  });
  c.support = raw;

  const auto C = circular_moving_average(raw, options.smoothing_window);
  const double step = kTwoPi / static_cast<double>(K);
  std::vector<Vec2> pts(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double dC = (C[(k + 1) % K] - C[(k + K - 1) % K]) / (2 * step);
    const double cs = std::cos(theta[k]), sn = std::sin(theta[k]);
    pts[k] = {C[k] * cs - dC * sn, C[k] * sn + dC * cs};
  }

  // Points violating another direction's half-plane are replaced by the support
  // point of the half-plane intersection, which is convex by construction.
  double scale = 1;
  for (double v : C) scale = std::max(scale, std::abs(v));
  const double tol = 1e-9 * scale;
  std::vector<Vec2> polygon;
  std::size_t repaired = 0;
  for (std::size_t k = 0; k < K; ++k) {
    bool ok = true;
    for (std::size_t j = 0; j < K && ok; ++j) {
      ok = pts[k][0] * std::cos(theta[j]) + pts[k][1] * std::sin(theta[j]) <= C[j] + tol;
    }
    if (ok) continue;
    if (polygon.empty()) polygon = half_plane_polygon(theta, C);
    if (polygon.empty()) throw Error(ErrorKind::Internal, "direct sampling: empty half-plane intersection");
    const double cs = std::cos(theta[k]), sn = std::sin(theta[k]);
    double best = -std::numeric_limits<double>::infinity(), best_d = 0;
    Vec2 chosen = polygon.front();
    for (const auto& v : polygon) {
      const double s = v[0] * cs + v[1] * sn;
      const double d = std::hypot(v[0] - pts[k][0], v[1] - pts[k][1]);
      if (s > best + tol || (s > best - tol && d < best_d)) {
        best = std::max(best, s);
        best_d = d;
        chosen = v;
      }
    }
    pts[k] = chosen;
    ++repaired;
  }
  if (repaired > 0) {
    c.warnings.push_back(std::to_string(repaired) + " direct-sampling points projected onto the convex hull of supporting half-planes");
  }
  c.points.resize(K);
  for (std::size_t k = 0; k < K; ++k) c.points[k] = {theta[k], pts[k][0], pts[k][1], true};
  if (!is_convex(c.points, 1e-7)) throw Error(ErrorKind::Internal, "direct sampling: non-convex output after smoothing");
  return c;
}

// ---------------------------------------------------------------- joint exceedance

double quadrant_probability(const Points2& sample, double theta, double x1, double x2) {
  const double s1 = std::cos(theta) >= 0 ? 1.0 : -1.0;
  const double s2 = std::sin(theta) >= 0 ? 1.0 : -1.0;
  const auto hit = ((s1 * (sample.col(0).array() - x1) > 0) && (s2 * (sample.col(1).array() - x2) > 0)).count();
  return static_cast<double>(hit) / static_cast<double>(sample.rows());
}

Contour joint_exceedance_contour(const Points2& sample, double alpha, std::array<double, 2> r_star,
                                 const JointExceedanceOptions& options) {
  if (!(alpha > 0 && alpha < 1)) throw Error(ErrorKind::Config, "joint exceedance: alpha must lie in (0, 1)");
  if (!std::isfinite(r_star[0]) || !std::isfinite(r_star[1])) {
    throw Error(ErrorKind::Config, "joint exceedance: reference point must be finite");
  }
  const auto n = static_cast<std::size_t>(sample.rows());
  const auto k_count = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n) - 1e-9));
  if (k_count < 1 || k_count >= n) {
    throw Error(ErrorKind::InsufficientTail, "joint exceedance: alpha * n outside [1, n)");
  }
  Contour c;
  c.method = ContourMethod::JointExceedance;
  c.alpha = alpha;
  c.reference = r_star;
  const auto K = static_cast<std::size_t>(options.n_theta);
  std::vector<double> theta(K), t_star(K);
  std::vector<char> attained(K, 1);
  // Half-step offset keeps every ray off the axes, where the quadrant is undefined.
  for (std::size_t k = 0; k < K; ++k) theta[k] = kTwoPi * (static_cast<double>(k) + 0.5) / static_cast<double>(K);
  parallel_for(K, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> t(n);
    for (std::size_t k = lo; k < hi; ++k) {
      const double cs = std::cos(theta[k]), sn = std::sin(theta[k]);
      const double s1 = cs >= 0 ? 1.0 : -1.0, s2 = sn >= 0 ? 1.0 : -1.0;
      std::size_t positive = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        t[i] = std::min(s1 * (sample(r, 0) - r_star[0]) / std::abs(cs), s2 * (sample(r, 1) - r_star[1]) / std::abs(sn));
        positive += t[i] > 0 ? 1 : 0;
      }
      // Quadrant event at distance s along the ray is {t_i > s}: place the point
      // midway between the k-th and (k+1)-th largest t_i so exactly k events exceed.
      const auto pos = static_cast<std::ptrdiff_t>(n - k_count);
      std::nth_element(t.begin(), t.begin() + pos, t.end());
      const double kth = t[static_cast<std::size_t>(pos)];
      const double next = *std::max_element(t.begin(), t.begin() + pos);
      t_star[k] = 0.5 * (kth + next);
      if (t_star[k] < 0 || positive < std::max(options.min_positive, k_count)) attained[k] = 0;
    }
  });
  const auto ts = circular_moving_average(t_star, options.smoothing_window);
  c.points.resize(K);
  std::size_t unattained = 0;
  for (std::size_t k = 0; k < K; ++k) {
    c.points[k] = {theta[k], r_star[0] + ts[k] * std::cos(theta[k]), r_star[1] + ts[k] * std::sin(theta[k]),
                   attained[k] != 0};
    unattained += attained[k] ? 0 : 1;
  }
  if (unattained) c.warnings.push_back(std::to_string(unattained) + " joint-exceedance rays unattained");
  return c;
}

// ---------------------------------------------------------------- isodensity

Contour isodensity_contour(const DensityGrid& grid, double level_p) {
  if (!(level_p > 0 && level_p < 1)) throw Error(ErrorKind::Config, "isodensity: level must lie in (0, 1)");
  const auto level = hdr_level(grid, level_p);
  if (!level) {
    throw Error(ErrorKind::Resolution, "isodensity: content " + std::to_string(level_p) +
                                           " is not resolvable on the density grid");
  }
  auto loops = level_loops(grid, *level);
  if (loops.empty()) throw Error(ErrorKind::Resolution, "isodensity: no closed level set on the grid");
  std::sort(loops.begin(), loops.end(),
            [](const auto& a, const auto& b) { return std::abs(signed_area(a)) > std::abs(signed_area(b)); });
  Contour c;
  c.method = ContourMethod::Isodensity;
  c.alpha = 1 - level_p;
  c.level = *level;
  c.points = as_contour_loop(loops.front(), &c.reference);
  for (std::size_t i = 1; i < loops.size(); ++i) c.extra.push_back(as_contour_loop(loops[i]));
  return c;
}

Contour isodensity_contour(const Points2& sample, double level_p, const IsodensityOptions& options) {
  return isodensity_contour(kde_grid(sample, options.kde), level_p);
}

// ---------------------------------------------------------------- IFORM

double iform_radius(double T, double n_per_year) {
  if (!(T > 0) || !(n_per_year > 0)) throw Error(ErrorKind::Config, "IFORM: T and n must be positive");
  return dist::normal_upper_quantile(1.0 / (T * n_per_year));
}

Contour iform_contour_radius(const Factorization& model, double beta, int n_theta) {
  Contour c;
  c.method = ContourMethod::Iform;
  c.level = beta;
  c.alpha = dist::normal_cdf(-beta);
  if (beta > 37) c.warnings.push_back("IFORM radius beyond double-precision normal tail; mapping clamped");
  const double b = std::min(beta, 37.0);
  c.points.resize(static_cast<std::size_t>(n_theta));
  for (int k = 0; k < n_theta; ++k) {
    const double th = kTwoPi * k / n_theta;
    const auto x = model.to_physical(b * std::cos(th), b * std::sin(th));
    c.points[static_cast<std::size_t>(k)] = {th, x[0], x[1], true};
  }
  return c;
}

Contour iform_contour(const Factorization& model, double T, double n_per_year, int n_theta) {
  auto c = iform_contour_radius(model, iform_radius(T, n_per_year), n_theta);
  c.T = T;
  c.alpha = 1.0 / (T * n_per_year);
  return c;
}

// ---------------------------------------------------------------- content

double enclosed_fraction(const Contour& contour, const Points2& sample) {
  struct Edge {
    double ax, ay, bx, by;
  };
  std::vector<Edge> edges;
  auto add_loop = [&](const std::vector<ContourPoint>& loop) {
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const auto& a = loop[i];
      const auto& b = loop[(i + 1) % loop.size()];
      if (a.x2 != b.x2) edges.push_back({a.x1, a.x2, b.x1, b.x2});
    }
  };
  add_loop(contour.points);
  for (const auto& l : contour.extra) add_loop(l);
  if (edges.empty() || sample.rows() == 0) return 0.0;

  double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  for (const auto& e : edges) {
    y_lo = std::min({y_lo, e.ay, e.by});
    y_hi = std::max({y_hi, e.ay, e.by});
  }
  const std::size_t S = 512;
  const double slab = (y_hi - y_lo) / static_cast<double>(S);
  std::vector<std::vector<std::size_t>> slabs(S);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double lo = std::min(edges[i].ay, edges[i].by), hi = std::max(edges[i].ay, edges[i].by);
    const auto s0 = std::min<std::size_t>(S - 1, static_cast<std::size_t>(std::max(0.0, (lo - y_lo) / slab)));
    const auto s1 = std::min<std::size_t>(S - 1, static_cast<std::size_t>(std::max(0.0, (hi - y_lo) / slab)));
    for (std::size_t s = s0; s <= s1; ++s) slabs[s].push_back(i);
  }
  const auto n = static_cast<std::size_t>(sample.rows());
  std::vector<std::size_t> inside_count(thread_count() + 1, 0);
  std::vector<char> inside(n, 0);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      const double x = sample(static_cast<Eigen::Index>(r), 0), y = sample(static_cast<Eigen::Index>(r), 1);
      if (!(y >= y_lo && y < y_hi)) continue;
      const auto s = std::min<std::size_t>(S - 1, static_cast<std::size_t>((y - y_lo) / slab));
      bool in = false;
      for (std::size_t i : slabs[s]) {
        const auto& e = edges[i];
        if ((e.ay > y) != (e.by > y)) {
          const double xc = e.ax + (y - e.ay) * (e.bx - e.ax) / (e.by - e.ay);
          if (x < xc) in = !in;
        }
      }
      inside[r] = in ? 1 : 0;
    }
  }, 4096);
  const auto count = std::count(inside.begin(), inside.end(), 1);
  return static_cast<double>(count) / static_cast<double>(n);
}

CalibrationResult calibrate_enclosed_probability(const std::function<Contour(double)>& builder,
                                                 const std::function<double(const Contour&)>& content,
                                                 double target_p, const CalibrationOptions& options) {
  if (!(target_p > 0 && target_p < 1)) throw Error(ErrorKind::Config, "calibration: target must lie in (0, 1)");
  auto evaluate = [&](double alpha, CalibrationResult& r) {
    r.alpha = alpha;
    r.contour = builder(alpha);
    r.content = content(r.contour);
    r.contour.enclosed_p = r.content;
    r.contour.alpha = alpha;
  };
  CalibrationResult lo, hi;
  evaluate(options.alpha_lo, lo);  // largest contour
  evaluate(options.alpha_hi, hi);
  if (lo.content + options.noise < hi.content) {
    throw Error(ErrorKind::Calibration, "calibration: enclosed content increases with alpha");
  }
  if (target_p >= lo.content) {
    lo.at_bound = true;
    lo.iterations = 2;
    return lo;
  }
  if (target_p <= hi.content) {
    hi.at_bound = true;
    hi.iterations = 2;
    return hi;
  }
  // Illinois false position on log(alpha); content decreases with alpha.
  double a = std::log(lo.alpha), b = std::log(hi.alpha);
  double fa = lo.content - target_p, fb = hi.content - target_p;  // fa > 0 > fb
  CalibrationResult best = std::abs(fa) < std::abs(fb) ? lo : hi;
  int side = 0;
  for (int it = 0; it < options.max_iter; ++it) {
    double x = (a * fb - b * fa) / (fb - fa);
    if (!(x > std::min(a, b) && x < std::max(a, b))) x = 0.5 * (a + b);
    CalibrationResult cur;
    evaluate(std::exp(x), cur);
    cur.iterations = it + 3;
    const double fx = cur.content - target_p;
    if (cur.content > lo.content + options.noise || cur.content + options.noise < hi.content) {
      throw Error(ErrorKind::Calibration, "calibration: content estimates are not monotone in alpha");
    }
    if (std::abs(fx) < std::abs(best.content - target_p)) best = cur;
    if (std::abs(fx) <= options.tol) return cur;
    if (fx > 0) {
      a = x;
      fa = fx;
      if (side == 1) fb *= 0.5;
      side = 1;
    } else {
      b = x;
      fb = fx;
      if (side == -1) fa *= 0.5;
      side = -1;
    }
    if (std::abs(b - a) < 1e-12) break;
  }
  best.contour.warnings.push_back("calibration did not reach tolerance");
  return best;
}

FailureEstimate failure_probability_mc(const std::function<double(double, double)>& g,
                                       const std::function<std::array<double, 2>(RandomStream&)>& draw,
                                       std::size_t n, std::uint64_t seed) {
  if (n < 1000) throw Error(ErrorKind::Config, "failure probability: need at least 1000 draws");
  RandomStream rng(seed, 0);
  std::size_t fail = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = draw(rng);
    if (g(x[0], x[1]) < 0) ++fail;
  }
  FailureEstimate f;
  f.n = n;
  f.p = static_cast<double>(fail) / static_cast<double>(n);
  f.standard_error = std::sqrt(f.p * (1 - f.p) / static_cast<double>(n));
  return f;
}

std::size_t find_governing_point(const Contour& contour, const std::function<double(double, double)>& response) {
  if (contour.points.empty()) throw Error(ErrorKind::Input, "governing point: empty contour");
  std::size_t best = 0;
  double best_v = response(contour.points[0].x1, contour.points[0].x2);
  for (std::size_t i = 1; i < contour.points.size(); ++i) {
    const double v = response(contour.points[i].x1, contour.points[i].x2);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  return best;
}

std::vector<bool> frontier_mask(const Contour& contour, const Points2& reference, double radius) {
  if (reference.rows() < 2) throw Error(ErrorKind::Input, "frontier: reference sample too small");
  std::array<double, 2> sd{};
  for (int c = 0; c < 2; ++c) {
    const double mean = reference.col(c).mean();
    sd[static_cast<std::size_t>(c)] =
        std::sqrt((reference.col(c).array() - mean).square().sum() / static_cast<double>(reference.rows() - 1));
  }
  auto key = [&](double u, double v) {
    const auto i = static_cast<std::int64_t>(std::floor(u / radius));
    const auto j = static_cast<std::int64_t>(std::floor(v / radius));
    return (i << 32) ^ (j & 0xffffffff);
  };
  std::unordered_map<std::int64_t, std::vector<Eigen::Index>> cells;
  for (Eigen::Index r = 0; r < reference.rows(); ++r) {
    cells[key(reference(r, 0) / sd[0], reference(r, 1) / sd[1])].push_back(r);
  }
  std::vector<bool> mask(contour.points.size(), false);
  for (std::size_t k = 0; k < contour.points.size(); ++k) {
    const double u = contour.points[k].x1 / sd[0], v = contour.points[k].x2 / sd[1];
    bool near = false;
    for (int di = -1; di <= 1 && !near; ++di) {
      for (int dj = -1; dj <= 1 && !near; ++dj) {
        const auto it = cells.find(key(u + di * radius, v + dj * radius));
        if (it == cells.end()) continue;
        for (auto r : it->second) {
          if (std::hypot(reference(r, 0) / sd[0] - u, reference(r, 1) / sd[1] - v) < radius) {
            near = true;
            break;
          }
        }
      }
    }
    mask[k] = near;
  }
  return mask;
}

bool is_convex(const std::vector<ContourPoint>& points, double tol) {
  std::vector<Vec2> p;
  for (const auto& q : points) {
    if (p.empty() || std::hypot(q.x1 - p.back()[0], q.x2 - p.back()[1]) > tol) p.push_back({q.x1, q.x2});
  }
  while (p.size() > 1 && std::hypot(p.front()[0] - p.back()[0], p.front()[1] - p.back()[1]) <= tol) p.pop_back();
  if (p.size() < 3) return true;
  double scale = 0;
  for (const auto& q : p) scale = std::max({scale, std::abs(q[0]), std::abs(q[1])});
  const double eps = tol * std::max(scale * scale, 1.0);
  int sign = 0;
  double turning = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    const auto& c = p[(i + 2) % p.size()];
    const double ux = b[0] - a[0], uy = b[1] - a[1], vx = c[0] - b[0], vy = c[1] - b[1];
    const double cross = ux * vy - uy * vx;
    turning += std::atan2(cross, ux * vx + uy * vy);
    if (std::abs(cross) <= eps) continue;
    const int s = cross > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  return std::abs(std::abs(turning) - kTwoPi) < 1e-6;
}

}  // namespace metocean
