#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "hsbench/core.hpp"

namespace support {

// Generators here use std::mt19937_64, independent of hsbench::rng.
inline hsbench::HsiCube random_cube(std::size_t h, std::size_t w, std::size_t bands, std::uint64_t seed,
                                    double lo = 0.05, double hi = 1.0, bool as_float = true) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  hsbench::WavelengthGrid grid{400.0, 10.0, bands};
  hsbench::HsiCube cube(h, w, grid);
  for (double& v : cube.data()) v = as_float ? static_cast<float>(u(rng)) : u(rng);
  return cube;
}

inline hsbench::RgbImage random_rgb(std::size_t h, std::size_t w, std::uint64_t seed, double lo = 0.0,
                                    double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  hsbench::RgbImage img(h, w);
  for (double& v : img.data()) v = u(rng);
  return img;
}

inline hsbench::CameraResponse random_css(std::size_t bands, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  hsbench::CssMatrix m(3, bands);
  for (Eigen::Index r = 0; r < 3; ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = u(rng);
  return hsbench::CameraResponse({400.0, 10.0, bands}, m);
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hsbench_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace support
