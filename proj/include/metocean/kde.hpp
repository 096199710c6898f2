#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace metocean {

/// n x 2 point set, one row per point.
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Density values on a regular grid. f(i, j) is the value at
/// (x0 + i dx, y0 + j dy).
struct DensityGrid {
  double x0 = 0, y0 = 0, dx = 1, dy = 1;
  Eigen::MatrixXd f;
  std::array<double, 2> bandwidth{0, 0};  ///< zero for analytic densities

  Eigen::Index nx() const { return f.rows(); }
  Eigen::Index ny() const { return f.cols(); }
  double x(Eigen::Index i) const { return x0 + static_cast<double>(i) * dx; }
  double y(Eigen::Index j) const { return y0 + static_cast<double>(j) * dy; }
  /// Bilinear interpolation; zero outside the grid.
  double at(double px, double py) const;
};

/// Normal-reference bandwidth per axis for a two-dimensional Gaussian kernel:
/// h_j = sd_j * n^(-1/6).
std::array<double, 2> silverman_bandwidth(const Points2& points);

struct KdeOptions {
  int grid = 400;
  std::optional<std::array<double, 2>> bandwidth;
  double pad = 4.0;  ///< grid extends this many bandwidths beyond the data
};

/// Binned Gaussian kernel density estimate: linear binning onto the grid then
/// separable convolution with a truncated Gaussian kernel.
DensityGrid kde_grid(const Points2& points, const KdeOptions& options = {});

/// Direct kernel sum at one location (slow; for tests and small samples).
double kde_exact(const Points2& points, std::array<double, 2> h, double x, double y);

/// Sample an analytic density on a grid spanning [lo, hi] in each axis.
DensityGrid density_grid(const std::function<double(double, double)>& density, std::array<double, 2> lo,
                         std::array<double, 2> hi, int grid = 400);

/// Closed level-set loops {f = level} by marching squares. Each loop is a
/// sequence of (x, y) vertices without the closing repeat.
std::vector<std::vector<std::array<double, 2>>> level_loops(const DensityGrid& grid, double level);

/// Density threshold whose superlevel set carries the given probability on the grid.
/// Returns nullopt when the grid cannot resolve it.
std::optional<double> hdr_level(const DensityGrid& grid, double content);

}  // namespace metocean
