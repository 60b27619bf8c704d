#include "hsbench/camera.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hsbench/rng.hpp"

namespace hsbench::camera {

void NoiseParams::validate() const {
  if (!(photon_gain >= 0.0) || !std::isfinite(photon_gain))
    throw std::invalid_argument("photon_gain must be finite and >= 0");
  if (!(dark_sigma >= 0.0) || !std::isfinite(dark_sigma))
    throw std::invalid_argument("dark_sigma must be finite and >= 0");
}

BayerMosaic::BayerMosaic(std::size_t height, std::size_t width)
    : BayerMosaic(height, width, std::vector<double>(height * width, 0.0)) {}

BayerMosaic::BayerMosaic(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height_ % 2 != 0 || width_ % 2 != 0 || height_ == 0 || width_ == 0)
    throw std::invalid_argument("bayer mosaic dimensions must be even and nonzero");
  if (data_.size() != height_ * width_) throw std::invalid_argument("mosaic data length does not match geometry");
}

RgbImage project_clean(const HsiCube& cube, const CameraResponse& css) {
  if (!cube.grid().matches(css.grid()))
    throw std::invalid_argument("cube wavelength grid does not match the camera response");
  const std::size_t n = cube.pixels();
  const auto& m = css.matrix();
  std::vector<double> out(n * 3, 0.0);
  for (std::size_t b = 0; b < cube.bands(); ++b) {
    const auto band = cube.band(b);
    const double wr = m(0, static_cast<Eigen::Index>(b));
    const double wg = m(1, static_cast<Eigen::Index>(b));
    const double wb = m(2, static_cast<Eigen::Index>(b));
    for (std::size_t p = 0; p < n; ++p) {
      out[3 * p + 0] += wr * band[p];
      out[3 * p + 1] += wg * band[p];
      out[3 * p + 2] += wb * band[p];
    }
  }
  return RgbImage(cube.height(), cube.width(), std::move(out));
}

RgbImage simulate_clean(const HsiCube& cube, const CameraResponse& css) { return project_clean(cube, css); }

BayerMosaic mosaic_rggb(const RgbImage& rgb) {
  if (rgb.height() % 2 != 0 || rgb.width() % 2 != 0)
    throw std::invalid_argument("RGGB mosaic needs even image dimensions, got " + std::to_string(rgb.height()) + "x" +
                                std::to_string(rgb.width()));
  BayerMosaic out(rgb.height(), rgb.width());
  for (std::size_t r = 0; r < rgb.height(); ++r)
    for (std::size_t c = 0; c < rgb.width(); ++c)
      out.at(r, c) = rgb.at(r, c, static_cast<std::size_t>(rggb_color(r, c)));
  return out;
}

BayerMosaic add_sensor_noise(const BayerMosaic& mosaic, const NoiseParams& params) {
  params.validate();
  std::vector<double> out(mosaic.data().begin(), mosaic.data().end());
  for (double v : out)
    if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("sensor noise input must be finite and >= 0");
  if (params.photon_gain == 0.0 && params.dark_sigma == 0.0) return mosaic;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double x = out[i];
    if (params.photon_gain > 0.0) {
      rng::CounterStream shot(params.seed, i, 0);
      x = static_cast<double>(shot.poisson(params.photon_gain * x)) / params.photon_gain;
    }
    if (params.dark_sigma > 0.0) {
      rng::CounterStream dark(params.seed, i, 1);
      x += params.dark_sigma * dark.normal();
    }
    out[i] = std::max(x, 0.0);
  }
  return BayerMosaic(mosaic.height(), mosaic.width(), std::move(out));
}

namespace {

inline std::size_t reflect101(std::ptrdiff_t i, std::size_t n) {
  if (i < 0) return static_cast<std::size_t>(-i);
  if (static_cast<std::size_t>(i) >= n) return 2 * n - 2 - static_cast<std::size_t>(i);
  return static_cast<std::size_t>(i);
}

}  // namespace

RgbImage demosaic_bilinear(const BayerMosaic& mosaic) {
  const std::size_t h = mosaic.height();
  const std::size_t w = mosaic.width();
  RgbImage out(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      const auto own = static_cast<std::size_t>(rggb_color(r, c));
      double sum[3] = {0.0, 0.0, 0.0};
      int count[3] = {0, 0, 0};
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          // Mirrored coordinates keep parity, so the colour is that of the
          // unreflected offset.
          const auto color = static_cast<std::size_t>(rggb_color(r + 2 + dr, c + 2 + dc));
          if (color == own) continue;
          sum[color] += mosaic.at(reflect101(static_cast<std::ptrdiff_t>(r) + dr, h),
                                  reflect101(static_cast<std::ptrdiff_t>(c) + dc, w));
          ++count[color];
        }
      for (std::size_t ch = 0; ch < 3; ++ch)
        out.at(r, c, ch) = ch == own ? mosaic.at(r, c) : sum[ch] / count[ch];
    }
  return out;
}

Rgb8Image quantize(const RgbImage& rgb, double white_level) {
  if (!(white_level > 0.0) || !std::isfinite(white_level))
    throw std::invalid_argument("white_level must be positive and finite");
  std::vector<std::uint8_t> out(rgb.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = std::clamp(rgb.data()[i] / white_level, 0.0, 1.0);
    out[i] = static_cast<std::uint8_t>(std::floor(255.0 * x + 0.5));
  }
  return Rgb8Image(rgb.height(), rgb.width(), std::move(out), white_level);
}

Rgb8Image simulate_real_world_prejpeg(const HsiCube& cube, const CameraResponse& css, const RealWorldParams& params) {
  const RgbImage linear = project_clean(cube, css);
  const BayerMosaic noisy = add_sensor_noise(mosaic_rggb(linear), params.noise);
  return quantize(demosaic_bilinear(noisy), params.white_level);
}

Rgb8Image simulate_real_world(const HsiCube& cube, const CameraResponse& css, const RealWorldParams& params) {
  if (params.jpeg_quality < 1 || params.jpeg_quality > 100)
    throw std::invalid_argument("jpeg quality must be in [1, 100]");
  const Rgb8Image pre = simulate_real_world_prejpeg(cube, css, params);
  const Rgb8Image decoded = io::decode_image(io::encode_jpeg(pre, params.jpeg_quality));
  return Rgb8Image(decoded.height(), decoded.width(), std::vector<std::uint8_t>(decoded.data().begin(), decoded.data().end()),
                   params.white_level);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile q must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return values[lo] + t * (values[hi] - values[lo]);
}

double default_white_level(std::span<const HsiCube> cubes, const CameraResponse& css) {
  std::vector<double> all;
  for (const auto& cube : cubes) {
    const RgbImage rgb = project_clean(cube, css);
    all.insert(all.end(), rgb.data().begin(), rgb.data().end());
  }
  const double level = percentile(std::move(all), 0.999);
  if (!(level > 0.0)) throw std::invalid_argument("white level from an all-dark training set");
  return level;
}

}  // namespace hsbench::camera
