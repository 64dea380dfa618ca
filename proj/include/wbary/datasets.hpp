#pragma once

// Synthetic measure families and raster conversion.
//
// Point-cloud families give M uniform-weight atoms per measure; grid families
// put weights on an s x s grid of [0,1]^2 with M = s^2. The shape parameters
// below are this library's own choices; every measure i is generated from
// derive_seed(seed, {i}) so the output does not depend on thread count.

#include "common.hpp"
#include "io.hpp"
#include "measures.hpp"
#include "parallel.hpp"
#include "random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace wbary {

struct FamilyParams {
  /// Semi-axis range for ellipses, crescents, nested ellipses and torsos.
  double axis_min = 0.08;
  double axis_max = 0.3;
  /// Shape centers are drawn from [center_min, center_max]^D.
  double center_min = 0.35;
  double center_max = 0.65;
  /// Rings per nested-ellipse measure.
  std::size_t nest_count = 3;
  /// Standard deviation range of Gaussian clouds along each principal axis.
  double sigma_min = 0.04;
  double sigma_max = 0.12;
  /// Cauchy scale range.
  double gamma_min = 0.05;
  double gamma_max = 0.15;
  /// Symmetric Dirichlet concentration.
  double concentration = 1.0;
  /// Extrusion height range of 3D families.
  double height_min = 0.5;
  double height_max = 0.9;
};

struct DatasetSpec {
  std::string family;
  std::size_t N = 1;
  std::size_t M = 1;
  /// Only the gaussian and dirichlet-uniform families accept D other than
  /// their native dimension (2, or 3 for torso and pentagonal-prism).
  std::size_t D = 0;
  FamilyParams params;
  std::uint64_t seed = 0;
};

inline const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names{"ellipses",         "crescents", "nested-ellipses",
                                              "gaussian",         "cauchy-grid", "dirichlet-grid",
                                              "dirichlet-uniform", "torso",     "pentagonal-prism"};
  return names;
}

namespace detail {

inline Eigen::Matrix2d rotation(double theta) {
  Eigen::Matrix2d R;
  R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return R;
}

inline std::size_t grid_side(std::size_t M) {
  const auto s = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(M))));
  if (s * s != M) throw InvalidInput("grid families need M to be a perfect square (got " + std::to_string(M) + ")");
  return s;
}

inline Matrix unit_grid(std::size_t s) {
  Matrix g(static_cast<Index>(s * s), 2);
  const double h = s > 1 ? 1.0 / static_cast<double>(s - 1) : 0.0;
  for (std::size_t r = 0; r < s; ++r)
    for (std::size_t c = 0; c < s; ++c) {
      const auto k = static_cast<Index>(r * s + c);
      g(k, 0) = s > 1 ? static_cast<double>(c) * h : 0.5;
      g(k, 1) = s > 1 ? 1.0 - static_cast<double>(r) * h : 0.5;
    }
  return g;
}

inline Vector dirichlet(Rng& rng, Index n, double alpha) {
  Vector w(n);
  for (Index k = 0; k < n; ++k) w[k] = rng.gamma(alpha);
  if (w.sum() == 0.0) w.setOnes();
  return w;
}

inline Eigen::RowVector2d center2(Rng& rng, const FamilyParams& fp) {
  return {rng.uniform(fp.center_min, fp.center_max), rng.uniform(fp.center_min, fp.center_max)};
}

/// M points on one ellipse at equally spaced parameter angles.
inline Matrix ellipse_points(Rng& rng, std::size_t M, const FamilyParams& fp) {
  const double a = rng.uniform(fp.axis_min, fp.axis_max), b = rng.uniform(fp.axis_min, fp.axis_max);
  const Eigen::Matrix2d R = rotation(rng.uniform(0.0, std::numbers::pi));
  const Eigen::RowVector2d c = center2(rng, fp);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  Matrix pts(static_cast<Index>(M), 2);
  for (std::size_t k = 0; k < M; ++k) {
    const double t = phase + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(M);
    const Eigen::Vector2d local(a * std::cos(t), b * std::sin(t));
    pts.row(static_cast<Index>(k)) = c + (R * local).transpose();
  }
  return pts;
}

/// Uniform points in a disc of radius r minus an overlapping disc shifted
/// along a random direction.
inline Matrix crescent_points(Rng& rng, std::size_t M, const FamilyParams& fp) {
  const double r = rng.uniform(fp.axis_min, fp.axis_max);
  const double inner = r * rng.uniform(0.75, 0.95);
  const double shift = r * rng.uniform(0.3, 0.6);
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const Eigen::RowVector2d c = center2(rng, fp);
  const Eigen::RowVector2d off = shift * Eigen::RowVector2d(std::cos(theta), std::sin(theta));
  Matrix pts(static_cast<Index>(M), 2);
  std::size_t k = 0;
  while (k < M) {
    const Eigen::RowVector2d z(rng.uniform(-r, r), rng.uniform(-r, r));
    if (z.norm() > r || (z - off).norm() < inner) continue;
    pts.row(static_cast<Index>(k++)) = c + z;
  }
  return pts;
}

/// Concentric, co-rotated ellipses scaled by (j+1)/nest_count; atoms split
/// in proportion to the scale, each ring at equally spaced angles.
inline Matrix nested_points(Rng& rng, std::size_t M, const FamilyParams& fp) {
  const std::size_t rings = std::max<std::size_t>(1, std::min(fp.nest_count, M));
  const double a = rng.uniform(fp.axis_min, fp.axis_max), b = rng.uniform(fp.axis_min, fp.axis_max);
  const Eigen::Matrix2d R = rotation(rng.uniform(0.0, std::numbers::pi));
  const Eigen::RowVector2d c = center2(rng, fp);
  const double total = static_cast<double>(rings * (rings + 1)) / 2.0;
  std::vector<std::size_t> counts(rings);
  std::size_t used = 0;
  for (std::size_t j = 0; j < rings; ++j) {
    counts[j] = std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(M) * static_cast<double>(j + 1) / total));
    used += counts[j];
  }
  // Settle the rounding on the outer ring.
  if (used > M) counts.back() -= used - M;
  else counts.back() += M - used;
  Matrix pts(static_cast<Index>(M), 2);
  Index k = 0;
  for (std::size_t j = 0; j < rings; ++j) {
    const double scale = static_cast<double>(j + 1) / static_cast<double>(rings);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t t = 0; t < counts[j]; ++t) {
      const double ang = phase + 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(counts[j]);
      const Eigen::Vector2d local(scale * a * std::cos(ang), scale * b * std::sin(ang));
      pts.row(k++) = c + (R * local).transpose();
    }
  }
  return pts;
}

/// Gaussian cloud with random mean and a random covariance with principal
/// standard deviations in [sigma_min, sigma_max].
inline Matrix gaussian_points(Rng& rng, std::size_t M, std::size_t D, const FamilyParams& fp) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Index>(D), static_cast<Index>(D));
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) A(i, j) = rng.normal();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd sd(static_cast<Index>(D));
  for (Index i = 0; i < sd.size(); ++i) sd[i] = rng.uniform(fp.sigma_min, fp.sigma_max);
  const Eigen::MatrixXd L = Q * sd.asDiagonal();
  Eigen::RowVectorXd mean(static_cast<Index>(D));
  for (Index i = 0; i < mean.size(); ++i) mean[i] = rng.uniform(fp.center_min, fp.center_max);
  Matrix pts(static_cast<Index>(M), static_cast<Index>(D));
  Eigen::VectorXd z(static_cast<Index>(D));
  for (Index k = 0; k < pts.rows(); ++k) {
    for (Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    pts.row(k) = mean + (L * z).transpose();
  }
  return pts;
}

/// Points on the lateral surface of an elliptic cylinder along x3.
inline Matrix torso_points(Rng& rng, std::size_t M, const FamilyParams& fp) {
  const double a = rng.uniform(fp.axis_min, fp.axis_max), b = rng.uniform(fp.axis_min, fp.axis_max);
  const double h = rng.uniform(fp.height_min, fp.height_max);
  const Eigen::Matrix2d R = rotation(rng.uniform(0.0, std::numbers::pi));
  const Eigen::RowVector2d c = center2(rng, fp);
  Matrix pts(static_cast<Index>(M), 3);
  for (Index k = 0; k < pts.rows(); ++k) {
    const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Eigen::Vector2d xy = R * Eigen::Vector2d(a * std::cos(t), b * std::sin(t));
    pts(k, 0) = c[0] + xy[0];
    pts(k, 1) = c[1] + xy[1];
    pts(k, 2) = 0.5 - h / 2.0 + rng.uniform(0.0, h);
  }
  return pts;
}

/// Points uniform on the surface (five sides and two caps) of a right
/// prism over a regular pentagon.
inline Matrix prism_points(Rng& rng, std::size_t M, const FamilyParams& fp) {
  const double r = rng.uniform(fp.axis_min, fp.axis_max);
  const double h = rng.uniform(fp.height_min, fp.height_max);
  const double rot = rng.uniform(0.0, 2.0 * std::numbers::pi / 5.0);
  const Eigen::RowVector2d c = center2(rng, fp);
  std::array<Eigen::Vector2d, 5> v;
  for (int j = 0; j < 5; ++j) {
    const double t = rot + 2.0 * std::numbers::pi * j / 5.0;
    v[static_cast<std::size_t>(j)] = {r * std::cos(t), r * std::sin(t)};
  }
  const double side = (v[1] - v[0]).norm();
  const double lateral = 5.0 * side * h;
  const double cap = 2.5 * r * r * std::sin(2.0 * std::numbers::pi / 5.0);
  const double z0 = 0.5 - h / 2.0;
  Matrix pts(static_cast<Index>(M), 3);
  for (Index k = 0; k < pts.rows(); ++k) {
    const double u = rng.uniform(0.0, lateral + 2.0 * cap);
    Eigen::Vector2d xy;
    double z;
    if (u < lateral) {
      const auto j = static_cast<std::size_t>(rng.below(5));
      xy = v[j] + rng.uniform() * (v[(j + 1) % 5] - v[j]);
      z = z0 + rng.uniform(0.0, h);
    } else {
      // Uniform in the fan triangle (0, v_j, v_{j+1}).
      const auto j = static_cast<std::size_t>(rng.below(5));
      double s = rng.uniform(), t = rng.uniform();
      if (s + t > 1.0) {
        s = 1.0 - s;
        t = 1.0 - t;
      }
      xy = s * v[j] + t * v[(j + 1) % 5];
      z = u < lateral + cap ? z0 : z0 + h;
    }
    pts(k, 0) = c[0] + xy[0];
    pts(k, 1) = c[1] + xy[1];
    pts(k, 2) = z;
  }
  return pts;
}

/// Bivariate Cauchy (t with one degree of freedom) density up to a constant.
inline double cauchy_density(const Eigen::RowVector2d& x, const Eigen::RowVector2d& m, double gamma) {
  return std::pow(1.0 + (x - m).squaredNorm() / (gamma * gamma), -1.5);
}

inline DiscreteMeasure generate_one(const DatasetSpec& spec, std::size_t i) {
  Rng rng(derive_seed(spec.seed, {i}));
  const auto& fp = spec.params;
  const auto& f = spec.family;
  if (f == "ellipses") return uniform_measure(ellipse_points(rng, spec.M, fp));
  if (f == "crescents") return uniform_measure(crescent_points(rng, spec.M, fp));
  if (f == "nested-ellipses") return uniform_measure(nested_points(rng, spec.M, fp));
  if (f == "gaussian") return uniform_measure(gaussian_points(rng, spec.M, spec.D == 0 ? 2 : spec.D, fp));
  if (f == "torso") return uniform_measure(torso_points(rng, spec.M, fp));
  if (f == "pentagonal-prism") return uniform_measure(prism_points(rng, spec.M, fp));
  if (f == "dirichlet-uniform") {
    const std::size_t D = spec.D == 0 ? 2 : spec.D;
    Matrix pts(static_cast<Index>(spec.M), static_cast<Index>(D));
    for (Index k = 0; k < pts.rows(); ++k)
      for (Index d = 0; d < pts.cols(); ++d) pts(k, d) = rng.uniform();
    return make_measure(std::move(pts), dirichlet(rng, static_cast<Index>(spec.M), fp.concentration));
  }
  const std::size_t s = grid_side(spec.M);
  Matrix grid = unit_grid(s);
  if (f == "dirichlet-grid") return make_measure(std::move(grid), dirichlet(rng, grid.rows(), fp.concentration));
  if (f == "cauchy-grid") {
    const Eigen::RowVector2d m = center2(rng, fp);
    const double gamma = rng.uniform(fp.gamma_min, fp.gamma_max);
    Vector w(grid.rows());
    for (Index k = 0; k < w.size(); ++k) w[k] = cauchy_density(grid.row(k), m, gamma);
    return make_measure(std::move(grid), std::move(w));
  }
  throw InvalidInput("unknown family");
}

}  // namespace detail

inline std::size_t native_dimension(const std::string& family) {
  return family == "torso" || family == "pentagonal-prism" ? 3 : 2;
}

inline void validate(const DatasetSpec& spec) {
  bool known = false;
  for (const auto& n : family_names()) known |= n == spec.family;
  if (!known) {
    std::string list;
    for (const auto& n : family_names()) list += (list.empty() ? "" : ", ") + n;
    throw InvalidInput("unknown family '" + spec.family + "' (known: " + list + ")");
  }
  if (spec.N < 1 || spec.M < 1) throw InvalidInput("N and M must be at least 1");
  const bool free_dim = spec.family == "gaussian" || spec.family == "dirichlet-uniform";
  if (spec.D != 0 && !free_dim && spec.D != native_dimension(spec.family))
    throw InvalidInput("family " + spec.family + " is " + std::to_string(native_dimension(spec.family)) + "-dimensional");
  const auto& fp = spec.params;
  if (!(0.0 < fp.axis_min && fp.axis_min <= fp.axis_max)) throw InvalidInput("need 0 < axis_min <= axis_max");
  if (!(fp.center_min <= fp.center_max)) throw InvalidInput("need center_min <= center_max");
  if (!(0.0 < fp.sigma_min && fp.sigma_min <= fp.sigma_max)) throw InvalidInput("need 0 < sigma_min <= sigma_max");
  if (!(0.0 < fp.gamma_min && fp.gamma_min <= fp.gamma_max)) throw InvalidInput("need 0 < gamma_min <= gamma_max");
  if (!(fp.concentration > 0.0)) throw InvalidInput("Dirichlet concentration must be positive");
  if (!(0.0 < fp.height_min && fp.height_min <= fp.height_max)) throw InvalidInput("need 0 < height_min <= height_max");
  if (fp.nest_count < 1) throw InvalidInput("nest_count must be at least 1");
}

inline std::vector<DiscreteMeasure> generate(const DatasetSpec& spec, std::size_t threads = 1) {
  validate(spec);
  std::vector<DiscreteMeasure> out(spec.N);
  parallel_for(spec.N, threads, [&](std::size_t i) { out[i] = detail::generate_one(spec, i); });
  return out;
}

// ---------------------------------------------------------------------------
// Rasters

/// Pixel (r, c) of a W x H raster sits at (c / (W-1), 1 - r / (H-1)).
inline DiscreteMeasure from_image(const Image& img, double drop_below = 0.0) {
  std::vector<Index> keep;
  for (Index k = 0; k < static_cast<Index>(img.pixels.size()); ++k) {
    const double v = img.pixels[static_cast<std::size_t>(k)];
    if (v > 0.0 && v >= drop_below) keep.push_back(k);
  }
  if (keep.empty()) throw InvalidInput("image has no intensity above the threshold");
  Matrix pts(static_cast<Index>(keep.size()), 2);
  Vector w(pts.rows());
  for (std::size_t t = 0; t < keep.size(); ++t) {
    const Index r = keep[t] / img.width, c = keep[t] % img.width;
    const auto row = static_cast<Index>(t);
    pts(row, 0) = img.width > 1 ? static_cast<double>(c) / static_cast<double>(img.width - 1) : 0.5;
    pts(row, 1) = img.height > 1 ? 1.0 - static_cast<double>(r) / static_cast<double>(img.height - 1) : 0.5;
    w[row] = img.pixels[static_cast<std::size_t>(keep[t])];
  }
  return make_measure(std::move(pts), std::move(w));
}

struct Raster {
  /// Intensities scaled to a maximum of 1.
  Image image;
  /// Binned mass before scaling.
  std::vector<double> mass;
  std::size_t clamped = 0;
};

/// Bins every atom to the nearest cell of a G x G grid over [0,1]^2.
inline Raster to_image(const DiscreteMeasure& mu, Index G) {
  if (mu.dim() != 2) throw InvalidInput("rendering needs a 2D measure");
  if (G < 1) throw InvalidInput("grid side must be positive");
  Raster out;
  out.image.width = out.image.height = G;
  out.mass.assign(static_cast<std::size_t>(G * G), 0.0);
  const double span = static_cast<double>(G - 1);
  for (Index k = 0; k < mu.size(); ++k) {
    double x = mu.points(k, 0), y = mu.points(k, 1);
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) {
      ++out.clamped;
      x = std::clamp(x, 0.0, 1.0);
      y = std::clamp(y, 0.0, 1.0);
    }
    const auto c = static_cast<Index>(std::lround(x * span));
    const auto r = static_cast<Index>(std::lround((1.0 - y) * span));
    out.mass[static_cast<std::size_t>(r * G + c)] += mu.weights[k];
  }
  const double peak = *std::max_element(out.mass.begin(), out.mass.end());
  out.image.pixels.resize(out.mass.size());
  for (std::size_t k = 0; k < out.mass.size(); ++k) out.image.pixels[k] = peak > 0.0 ? out.mass[k] / peak : 0.0;
  return out;
}

}  // namespace wbary
