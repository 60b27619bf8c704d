#pragma once

#include <cstdint>
#include <vector>

#include "hsbench/core.hpp"
#include "hsbench/io.hpp"

namespace hsbench::camera {

struct NoiseParams {
  /// Expected photon count per unit of linear signal. 0 disables shot noise.
  double photon_gain = 1000.0;
  /// Standard deviation of the additive Gaussian dark noise, linear units.
  double dark_sigma = 0.003;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class BayerColor : std::uint8_t { kRed = 0, kGreen = 1, kBlue = 2 };

/// RGGB tile: (0,0)=R, (0,1)=G, (1,0)=G, (1,1)=B.
constexpr BayerColor rggb_color(std::size_t row, std::size_t col) {
  if ((row & 1) == 0) return (col & 1) == 0 ? BayerColor::kRed : BayerColor::kGreen;
  return (col & 1) == 0 ? BayerColor::kGreen : BayerColor::kBlue;
}

/// Single-plane RGGB sensor image with even dimensions.
class BayerMosaic {
 public:
  BayerMosaic(std::size_t height, std::size_t width);
  BayerMosaic(std::size_t height, std::size_t width, std::vector<double> data);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  double at(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }
  double& at(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const BayerMosaic&, const BayerMosaic&) = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<double> data_;
};

/// Per-pixel css.matrix * spectrum.
RgbImage project_clean(const HsiCube& cube, const CameraResponse& css);

/// Clean-track input: the unquantized projection.
RgbImage simulate_clean(const HsiCube& cube, const CameraResponse& css);

BayerMosaic mosaic_rggb(const RgbImage& rgb);

/// x -> Poisson(gain * x) / gain + N(0, dark_sigma), clamped at 0. Site i
/// draws from the counter stream (seed, i), so the output does not depend on
/// traversal order.
BayerMosaic add_sensor_noise(const BayerMosaic& mosaic, const NoiseParams& params);

/// Bilinear demosaic: each missing channel is the mean of the same-colour
/// sites in the 3x3 neighbourhood, with reflect-101 borders (edge pixel not
/// repeated, which keeps the Bayer phase of mirrored sites).
RgbImage demosaic_bilinear(const BayerMosaic& mosaic);

/// round-half-up(255 * clamp(x / white_level, 0, 1)).
Rgb8Image quantize(const RgbImage& rgb, double white_level);

struct RealWorldParams {
  NoiseParams noise;
  int jpeg_quality = io::kDefaultJpegQuality;
  double white_level = 1.0;
};

/// Linear stages of the real-world track, stopping before JPEG encoding.
Rgb8Image simulate_real_world_prejpeg(const HsiCube& cube, const CameraResponse& css, const RealWorldParams& params);

/// project -> mosaic -> noise -> demosaic -> quantize -> JPEG encode -> decode.
Rgb8Image simulate_real_world(const HsiCube& cube, const CameraResponse& css, const RealWorldParams& params);

/// q-quantile (linear interpolation between order statistics) of all samples.
double percentile(std::vector<double> values, double q);

/// 99.9th percentile of the clean projections of `cubes`.
double default_white_level(std::span<const HsiCube> cubes, const CameraResponse& css);

}  // namespace hsbench::camera
