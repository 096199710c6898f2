#include "metocean/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "metocean/error.hpp"

namespace metocean {

double DensityGrid::at(double px, double py) const {
  const double fx = (px - x0) / dx, fy = (py - y0) / dy;
  if (!(fx >= 0 && fy >= 0 && fx <= static_cast<double>(nx() - 1) && fy <= static_cast<double>(ny() - 1))) return 0.0;
  const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(fx), nx() - 2);
  const auto j = std::min<Eigen::Index>(static_cast<Eigen::Index>(fy), ny() - 2);
  const double tx = fx - static_cast<double>(i), ty = fy - static_cast<double>(j);
  return (1 - tx) * (1 - ty) * f(i, j) + tx * (1 - ty) * f(i + 1, j) + (1 - tx) * ty * f(i, j + 1) +
         tx * ty * f(i + 1, j + 1);
}

std::array<double, 2> silverman_bandwidth(const Points2& points) {
  const auto n = static_cast<double>(points.rows());
  if (n < 2) throw Error(ErrorKind::Input, "KDE: need at least two points");
  std::array<double, 2> h{};
  for (int c = 0; c < 2; ++c) {
    const double mean = points.col(c).mean();
    const double sd = std::sqrt((points.col(c).array() - mean).square().sum() / (n - 1));
    h[static_cast<std::size_t>(c)] = sd * std::pow(n, -1.0 / 6.0);
  }
  if (!(h[0] > 0 && h[1] > 0)) throw Error(ErrorKind::Degenerate, "KDE: zero spread on an axis");
  return h;
}

namespace {

// Convolve along the first axis of m with a Gaussian of bandwidth h (grid step d).
Eigen::MatrixXd convolve_rows(const Eigen::MatrixXd& m, double h, double d) {
  const auto half = static_cast<Eigen::Index>(std::ceil(4.0 * h / d));
  Eigen::VectorXd k(2 * half + 1);
  for (Eigen::Index i = -half; i <= half; ++i) {
    const double z = static_cast<double>(i) * d / h;
    k(i + half) = std::exp(-0.5 * z * z) / (h * std::sqrt(2 * M_PI));
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double v = m(r, c);
      if (v == 0) continue;
      const Eigen::Index lo = std::max<Eigen::Index>(0, r - half), hi = std::min<Eigen::Index>(m.rows() - 1, r + half);
      for (Eigen::Index t = lo; t <= hi; ++t) out(t, c) += v * k(t - r + half);
    }
  }
  return out;
}

}  // namespace

DensityGrid kde_grid(const Points2& points, const KdeOptions& options) {
  if (options.grid < 8) throw Error(ErrorKind::Config, "KDE: grid too coarse");
  const auto h = options.bandwidth ? *options.bandwidth : silverman_bandwidth(points);
  DensityGrid g;
  g.bandwidth = h;
  const int n_grid = options.grid;
  const double x_lo = points.col(0).minCoeff() - options.pad * h[0];
  const double x_hi = points.col(0).maxCoeff() + options.pad * h[0];
  const double y_lo = points.col(1).minCoeff() - options.pad * h[1];
  const double y_hi = points.col(1).maxCoeff() + options.pad * h[1];
  g.x0 = x_lo;
  g.y0 = y_lo;
  g.dx = (x_hi - x_lo) / (n_grid - 1);
  g.dy = (y_hi - y_lo) / (n_grid - 1);

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n_grid, n_grid);
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    const double fx = (points(r, 0) - g.x0) / g.dx, fy = (points(r, 1) - g.y0) / g.dy;
    const auto i = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(fx), 0, n_grid - 2);
    const auto j = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(fy), 0, n_grid - 2);
    const double tx = fx - static_cast<double>(i), ty = fy - static_cast<double>(j);
    counts(i, j) += (1 - tx) * (1 - ty);
    counts(i + 1, j) += tx * (1 - ty);
    counts(i, j + 1) += (1 - tx) * ty;
    counts(i + 1, j + 1) += tx * ty;
  }
  counts /= static_cast<double>(points.rows());
  Eigen::MatrixXd tmp = convolve_rows(counts, h[0], g.dx);
  Eigen::MatrixXd t2 = convolve_rows(tmp.transpose(), h[1], g.dy);
  g.f = t2.transpose();
  return g;
}

double kde_exact(const Points2& points, std::array<double, 2> h, double x, double y) {
  double s = 0;
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    const double a = (x - points(r, 0)) / h[0], b = (y - points(r, 1)) / h[1];
    s += std::exp(-0.5 * (a * a + b * b));
  }
  return s / (static_cast<double>(points.rows()) * 2 * M_PI * h[0] * h[1]);
}

DensityGrid density_grid(const std::function<double(double, double)>& density, std::array<double, 2> lo,
                         std::array<double, 2> hi, int grid) {
  DensityGrid g;
  g.x0 = lo[0];
  g.y0 = lo[1];
  g.dx = (hi[0] - lo[0]) / (grid - 1);
  g.dy = (hi[1] - lo[1]) / (grid - 1);
  g.f.resize(grid, grid);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) g.f(i, j) = density(g.x(i), g.y(j));
  return g;
}

std::optional<double> hdr_level(const DensityGrid& grid, double content) {
  std::vector<double> v(grid.f.data(), grid.f.data() + grid.f.size());
  std::sort(v.begin(), v.end(), std::greater<>());
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(total > 0) || !(content > 0 && content < 1)) return std::nullopt;
  double cum = 0;
  double level = 0;
  for (double x : v) {
    cum += x;
    level = x;
    if (cum >= content * total) break;
  }
  if (!(level > 0)) return std::nullopt;
  // The superlevel set must close inside the grid.
  double edge = 0;
  const auto nx = grid.nx(), ny = grid.ny();
  for (Eigen::Index i = 0; i < nx; ++i) edge = std::max({edge, grid.f(i, 0), grid.f(i, ny - 1)});
  for (Eigen::Index j = 0; j < ny; ++j) edge = std::max({edge, grid.f(0, j), grid.f(nx - 1, j)});
  if (edge >= level) return std::nullopt;
  return level;
}

std::vector<std::vector<std::array<double, 2>>> level_loops(const DensityGrid& grid, double level) {
  const auto nx = grid.nx(), ny = grid.ny();
  auto inside = [&](Eigen::Index i, Eigen::Index j) { return grid.f(i, j) >= level; };
  // Edge ids: horizontal (i,j)-(i+1,j) -> 2(j nx + i); vertical (i,j)-(i,j+1) -> 2(j nx + i) + 1.
  auto h_id = [&](Eigen::Index i, Eigen::Index j) { return 2 * (j * nx + i); };
  auto v_id = [&](Eigen::Index i, Eigen::Index j) { return 2 * (j * nx + i) + 1; };
  auto edge_point = [&](std::int64_t id) -> std::array<double, 2> {
    const std::int64_t cell = id / 2;
    const Eigen::Index i = cell % nx, j = cell / nx;
    const Eigen::Index i2 = (id % 2 == 0) ? i + 1 : i, j2 = (id % 2 == 0) ? j : j + 1;
    const double a = grid.f(i, j), b = grid.f(i2, j2);
    const double t = (level - a) / (b - a);
    return {grid.x(i) + t * (grid.x(i2) - grid.x(i)), grid.y(j) + t * (grid.y(j2) - grid.y(j))};
  };

  std::unordered_map<std::int64_t, std::array<std::int64_t, 2>> adj;
  auto link = [&](std::int64_t a, std::int64_t b) {
    for (auto [p, q] : {std::pair{a, b}, std::pair{b, a}}) {
      auto it = adj.find(p);
      if (it == adj.end()) {
        adj.emplace(p, std::array<std::int64_t, 2>{q, -1});
      } else {
        it->second[1] = q;
      }
    }
  };

  for (Eigen::Index j = 0; j + 1 < ny; ++j) {
    for (Eigen::Index i = 0; i + 1 < nx; ++i) {
      const bool b0 = inside(i, j), b1 = inside(i + 1, j), b2 = inside(i + 1, j + 1), b3 = inside(i, j + 1);
      const std::int64_t e0 = h_id(i, j), e1 = v_id(i + 1, j), e2 = h_id(i, j + 1), e3 = v_id(i, j);
      std::vector<std::int64_t> cross;
      if (b0 != b1) cross.push_back(e0);
      if (b1 != b2) cross.push_back(e1);
      if (b3 != b2) cross.push_back(e2);
      if (b0 != b3) cross.push_back(e3);
      if (cross.size() == 2) {
        link(cross[0], cross[1]);
      } else if (cross.size() == 4) {
        const double centre = 0.25 * (grid.f(i, j) + grid.f(i + 1, j) + grid.f(i + 1, j + 1) + grid.f(i, j + 1));
        if ((centre >= level) == b0) {
          link(e0, e1);
          link(e2, e3);
        } else {
          link(e3, e0);
          link(e1, e2);
        }
      }
    }
  }

  std::vector<std::vector<std::array<double, 2>>> loops;
  std::unordered_map<std::int64_t, bool> seen;
  std::vector<std::int64_t> keys;
  keys.reserve(adj.size());
  for (const auto& kv : adj) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());  // deterministic loop order
  for (std::int64_t start : keys) {
    if (seen[start]) continue;
    std::vector<std::array<double, 2>> loop;
    std::int64_t prev = -1, cur = start;
    while (cur >= 0 && !seen[cur]) {
      seen[cur] = true;
      loop.push_back(edge_point(cur));
      const auto& n = adj[cur];
      const std::int64_t next = n[0] != prev ? n[0] : n[1];
      prev = cur;
      cur = next;
    }
    if (loop.size() >= 3) loops.push_back(std::move(loop));
  }
  return loops;
}

}  // namespace metocean
