#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hsbench {

/// Uniform wavelength sampling of a spectral cube.
struct WavelengthGrid {
  double start_nm = 400.0;
  double step_nm = 10.0;
  std::size_t bands = 31;

  /// 31 bands from 400 nm to 700 nm in 10 nm steps.
  static WavelengthGrid standard() { return {}; }

  double wavelength(std::size_t band) const { return start_nm + step_nm * static_cast<double>(band); }
  double end_nm() const { return wavelength(bands - 1); }

  /// Same band count and wavelengths equal to within 1e-4 nm.
  bool matches(const WavelengthGrid& other) const;

  void validate() const;
};

/// Full-frame size of the challenge cubes. Exposed for reference, never enforced.
inline constexpr std::size_t kChallengeHeight = 482;
inline constexpr std::size_t kChallengeWidth = 512;

/// H x W x B spectral radiance cube.
///
/// Samples are stored band-sequential: all of band 0 row-major, then band 1,
/// and so on. Construction checks only the geometry; finiteness and
/// nonnegativity are reported by validate_cube() because linear
/// reconstructors can legitimately emit negative samples.
class HsiCube {
 public:
  HsiCube() = default;
  HsiCube(std::size_t height, std::size_t width, WavelengthGrid grid);
  HsiCube(std::size_t height, std::size_t width, WavelengthGrid grid, std::vector<double> data);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t bands() const { return grid_.bands; }
  std::size_t pixels() const { return height_ * width_; }
  std::size_t size() const { return data_.size(); }
  const WavelengthGrid& grid() const { return grid_; }

  std::size_t index(std::size_t row, std::size_t col, std::size_t band) const {
    return (band * height_ + row) * width_ + col;
  }
  double at(std::size_t row, std::size_t col, std::size_t band) const { return data_[index(row, col, band)]; }
  double& at(std::size_t row, std::size_t col, std::size_t band) { return data_[index(row, col, band)]; }

  std::span<const double> band(std::size_t b) const { return {data_.data() + b * pixels(), pixels()}; }
  std::span<double> band(std::size_t b) { return {data_.data() + b * pixels(), pixels()}; }

  /// Gathers the spectrum of pixel `p` (row-major pixel index).
  std::vector<double> spectrum(std::size_t p) const;
  void set_spectrum(std::size_t p, std::span<const double> values);

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool same_shape(const HsiCube& other) const;

  friend bool operator==(const HsiCube& a, const HsiCube& b);

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  WavelengthGrid grid_{};
  std::vector<double> data_;
};

/// Linear RGB, interleaved triplets, row-major.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(std::size_t height, std::size_t width);
  RgbImage(std::size_t height, std::size_t width, std::vector<double> data);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t pixels() const { return height_ * width_; }

  double at(std::size_t row, std::size_t col, std::size_t channel) const {
    return data_[(row * width_ + col) * 3 + channel];
  }
  double& at(std::size_t row, std::size_t col, std::size_t channel) {
    return data_[(row * width_ + col) * 3 + channel];
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  friend bool operator==(const RgbImage& a, const RgbImage& b) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// 8-bit RGB, interleaved, row-major. `white_level` is the linear value that
/// was mapped to code 255 when the image was quantized.
class Rgb8Image {
 public:
  Rgb8Image() = default;
  Rgb8Image(std::size_t height, std::size_t width, double white_level = 1.0);
  Rgb8Image(std::size_t height, std::size_t width, std::vector<std::uint8_t> data, double white_level = 1.0);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  double white_level() const { return white_level_; }

  std::uint8_t at(std::size_t row, std::size_t col, std::size_t channel) const {
    return data_[(row * width_ + col) * 3 + channel];
  }
  std::uint8_t& at(std::size_t row, std::size_t col, std::size_t channel) {
    return data_[(row * width_ + col) * 3 + channel];
  }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  /// Codes divided by 255, i.e. samples in [0, 1].
  RgbImage normalized() const;

  /// Pixel data equality; white_level is metadata and is not compared.
  friend bool operator==(const Rgb8Image& a, const Rgb8Image& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.data_ == b.data_;
  }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> data_;
  double white_level_ = 1.0;
};

using CssMatrix = Eigen::Matrix<double, 3, Eigen::Dynamic>;

/// Camera spectral sensitivity: three rows of per-band weights.
class CameraResponse {
 public:
  /// Throws std::invalid_argument on negative/non-finite weights, a column
  /// count that disagrees with the grid, or rank < 3.
  CameraResponse(WavelengthGrid grid, CssMatrix matrix);

  const WavelengthGrid& grid() const { return grid_; }
  const CssMatrix& matrix() const { return matrix_; }

 private:
  WavelengthGrid grid_;
  CssMatrix matrix_;
};

/// Numerical rank of a 3 x B matrix (relative singular-value threshold 1e-10).
int css_rank(const CssMatrix& matrix);

HsiCube scale_cube(const HsiCube& cube, double factor);
HsiCube crop_cube(const HsiCube& cube, std::size_t top, std::size_t left, std::size_t height, std::size_t width);
RgbImage scale_rgb(const RgbImage& image, double factor);

struct SampleIssue {
  enum class Kind { kNaN, kInfinite, kNegative };
  std::size_t row;
  std::size_t col;
  std::size_t band;
  Kind kind;
  double value;
};

/// Lists every NaN, infinite or negative sample. Empty iff the cube is valid.
std::vector<SampleIssue> validate_cube(const HsiCube& cube);

std::string to_string(SampleIssue::Kind kind);

}  // namespace hsbench
