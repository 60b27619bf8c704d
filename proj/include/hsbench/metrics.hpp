#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hsbench/core.hpp"

namespace hsbench::metrics {

struct MetricConfig {
  /// MRAE divides by max(gt, denom_floor).
  double denom_floor = 1e-8;
  std::size_t cluster_count = 1000;
  std::uint64_t cluster_seed = 0;
  std::size_t cluster_iterations = 100;
  /// Weight of the back-projection term in loss_combined.
  double tau = 10.0;

  void validate() const;
};

/// Mean over all entries of |gt - rec| / max(gt, floor).
double mrae(std::span<const double> gt, std::span<const double> rec, double denom_floor);
double rmse(std::span<const double> gt, std::span<const double> rec);

double mrae(const HsiCube& gt, const HsiCube& rec, const MetricConfig& cfg = {});
double rmse(const HsiCube& gt, const HsiCube& rec);
double mrae(const RgbImage& gt, const RgbImage& rec, const MetricConfig& cfg = {});

/// q-quantile of the per-entry relative error; a diagnostic only.
double relative_error_quantile(const HsiCube& gt, const HsiCube& rec, double q, const MetricConfig& cfg = {});

struct ClusterAssignment {
  std::vector<std::size_t> labels;  // one per pixel
  std::vector<std::vector<double>> centroids;
  std::size_t iterations = 0;

  std::size_t cluster_count() const { return centroids.size(); }
};

/// Seeded k-means++ / Lloyd on per-pixel spectra, k clamped to the number of
/// distinct spectra. Ties go to the lowest cluster index; empty clusters keep
/// their previous centroid.
ClusterAssignment cluster_spectra(const HsiCube& gt, const MetricConfig& cfg = {});

/// Unweighted mean of per-cluster MRAEs over nonempty clusters.
double weighted_mrae(const HsiCube& gt, const HsiCube& rec, const MetricConfig& cfg = {});
double weighted_mrae(const HsiCube& gt, const HsiCube& rec, const ClusterAssignment& clusters,
                     const MetricConfig& cfg = {});

/// Three-channel MRAE between the re-projection of `rec` and `original_rgb`.
double physical_consistency(const HsiCube& rec, const CameraResponse& css, const RgbImage& original_rgb,
                            const MetricConfig& cfg = {});

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// SSIM of two planes over all fully-contained 11x11 Gaussian windows.
/// Dynamic range is max(a); an all-nonpositive `a` falls back to range 1.
double ssim(std::span<const double> a, std::span<const double> b, std::size_t height, std::size_t width);
/// Mean of per-band SSIM.
double ssim(const HsiCube& a, const HsiCube& b);

/// Relative-error loss; identical to mrae.
double loss_rel(const HsiCube& gt, const HsiCube& rec, const MetricConfig& cfg = {});
/// Mean over pixels and channels of |css(gt) - css(rec)|.
double loss_backproj(const HsiCube& gt, const HsiCube& rec, const CameraResponse& css);
/// loss_rel + tau * loss_backproj.
double loss_combined(const HsiCube& gt, const HsiCube& rec, const CameraResponse& css, const MetricConfig& cfg = {});

/// Per-band 4-neighbour Laplacian (centre -4) with reflect-101 padding.
HsiCube laplacian(const HsiCube& cube);
/// Mean absolute difference of the Laplacian responses.
double loss_gradient(const HsiCube& gt, const HsiCube& rec);

/// Mean absolute error and mean squared error over all entries.
double mean_abs_error(const HsiCube& gt, const HsiCube& rec);
double mean_sq_error(const HsiCube& gt, const HsiCube& rec);

/// 10 * L1 + (1 - SSIM) + gradient loss.
double loss_l1_ssim_gradient(const HsiCube& gt, const HsiCube& rec);
/// L2 + (1 - SSIM).
double loss_l2_ssim(const HsiCube& gt, const HsiCube& rec);

}  // namespace hsbench::metrics
