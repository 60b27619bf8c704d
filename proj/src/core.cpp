#include "hsbench/core.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace hsbench {

bool WavelengthGrid::matches(const WavelengthGrid& other) const {
  constexpr double kTolNm = 1e-4;
  return bands == other.bands && std::abs(start_nm - other.start_nm) <= kTolNm &&
         std::abs(end_nm() - other.end_nm()) <= kTolNm;
}

void WavelengthGrid::validate() const {
  if (bands < 1) throw std::invalid_argument("wavelength grid needs at least one band");
  if (!(step_nm > 0.0) || !std::isfinite(step_nm) || !std::isfinite(start_nm))
    throw std::invalid_argument("wavelength grid step must be positive and finite");
}

HsiCube::HsiCube(std::size_t height, std::size_t width, WavelengthGrid grid)
    : HsiCube(height, width, grid, std::vector<double>(height * width * grid.bands, 0.0)) {}

HsiCube::HsiCube(std::size_t height, std::size_t width, WavelengthGrid grid, std::vector<double> data)
    : height_(height), width_(width), grid_(grid), data_(std::move(data)) {
  grid_.validate();
  if (data_.size() != height_ * width_ * grid_.bands)
    throw std::invalid_argument("cube data length " + std::to_string(data_.size()) + " != " +
                                std::to_string(height_) + "x" + std::to_string(width_) + "x" +
                                std::to_string(grid_.bands));
}

std::vector<double> HsiCube::spectrum(std::size_t p) const {
  std::vector<double> out(bands());
  const std::size_t n = pixels();
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = data_[b * n + p];
  return out;
}

void HsiCube::set_spectrum(std::size_t p, std::span<const double> values) {
  if (values.size() != bands()) throw std::invalid_argument("spectrum length does not match band count");
  const std::size_t n = pixels();
  for (std::size_t b = 0; b < values.size(); ++b) data_[b * n + p] = values[b];
}

bool HsiCube::same_shape(const HsiCube& other) const {
  return height_ == other.height_ && width_ == other.width_ && grid_.matches(other.grid_);
}

bool operator==(const HsiCube& a, const HsiCube& b) { return a.same_shape(b) && a.data_ == b.data_; }

RgbImage::RgbImage(std::size_t height, std::size_t width)
    : height_(height), width_(width), data_(height * width * 3, 0.0) {}

RgbImage::RgbImage(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (data_.size() != height_ * width_ * 3) throw std::invalid_argument("rgb data length does not match geometry");
}

Rgb8Image::Rgb8Image(std::size_t height, std::size_t width, double white_level)
    : Rgb8Image(height, width, std::vector<std::uint8_t>(height * width * 3, 0), white_level) {}

Rgb8Image::Rgb8Image(std::size_t height, std::size_t width, std::vector<std::uint8_t> data, double white_level)
    : height_(height), width_(width), data_(std::move(data)), white_level_(white_level) {
  if (data_.size() != height_ * width_ * 3) throw std::invalid_argument("rgb8 data length does not match geometry");
  if (!(white_level_ > 0.0) || !std::isfinite(white_level_))
    throw std::invalid_argument("white level must be positive and finite");
}

RgbImage Rgb8Image::normalized() const {
  std::vector<double> out(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<double>(data_[i]) / 255.0;
  return RgbImage(height_, width_, std::move(out));
}

int css_rank(const CssMatrix& matrix) {
  if (matrix.cols() < 3) return static_cast<int>(std::min<Eigen::Index>(matrix.cols(), 3));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * sv(0)) ++rank;
  return rank;
}

CameraResponse::CameraResponse(WavelengthGrid grid, CssMatrix matrix) : grid_(grid), matrix_(std::move(matrix)) {
  grid_.validate();
  if (static_cast<std::size_t>(matrix_.cols()) != grid_.bands)
    throw std::invalid_argument("camera response has " + std::to_string(matrix_.cols()) + " columns for " +
                                std::to_string(grid_.bands) + " bands");
  for (Eigen::Index c = 0; c < matrix_.cols(); ++c)
    for (Eigen::Index r = 0; r < 3; ++r)
      if (!std::isfinite(matrix_(r, c)) || matrix_(r, c) < 0.0)
        throw std::invalid_argument("camera response weights must be finite and nonnegative");
  if (css_rank(matrix_) < 3) throw std::invalid_argument("camera response must have rank 3");
}

namespace {

void check_factor(double factor) {
  if (!std::isfinite(factor) || !(factor > 0.0))
    throw std::invalid_argument("scale factor must be positive and finite");
}

}  // namespace

HsiCube scale_cube(const HsiCube& cube, double factor) {
  check_factor(factor);
  std::vector<double> out(cube.data().begin(), cube.data().end());
  for (double& v : out) v *= factor;
  return HsiCube(cube.height(), cube.width(), cube.grid(), std::move(out));
}

RgbImage scale_rgb(const RgbImage& image, double factor) {
  check_factor(factor);
  std::vector<double> out(image.data().begin(), image.data().end());
  for (double& v : out) v *= factor;
  return RgbImage(image.height(), image.width(), std::move(out));
}

HsiCube crop_cube(const HsiCube& cube, std::size_t top, std::size_t left, std::size_t height, std::size_t width) {
  if (top + height > cube.height() || left + width > cube.width() || top + height < top || left + width < left)
    throw std::out_of_range("crop rectangle exceeds cube bounds");
  HsiCube out(height, width, cube.grid());
  for (std::size_t b = 0; b < cube.bands(); ++b)
    for (std::size_t r = 0; r < height; ++r)
      for (std::size_t c = 0; c < width; ++c) out.at(r, c, b) = cube.at(top + r, left + c, b);
  return out;
}

std::vector<SampleIssue> validate_cube(const HsiCube& cube) {
  std::vector<SampleIssue> issues;
  for (std::size_t b = 0; b < cube.bands(); ++b)
    for (std::size_t r = 0; r < cube.height(); ++r)
      for (std::size_t c = 0; c < cube.width(); ++c) {
        const double v = cube.at(r, c, b);
        if (std::isnan(v))
          issues.push_back({r, c, b, SampleIssue::Kind::kNaN, v});
        else if (std::isinf(v))
          issues.push_back({r, c, b, SampleIssue::Kind::kInfinite, v});
        else if (v < 0.0)
          issues.push_back({r, c, b, SampleIssue::Kind::kNegative, v});
      }
  return issues;
}

std::string to_string(SampleIssue::Kind kind) {
  switch (kind) {
    case SampleIssue::Kind::kNaN: return "nan";
    case SampleIssue::Kind::kInfinite: return "infinite";
    case SampleIssue::Kind::kNegative: return "negative";
  }
  return "unknown";
}

}  // namespace hsbench
