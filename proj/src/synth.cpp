#include "hsbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "hsbench/rng.hpp"

namespace hsbench::synth {

namespace {

double gauss(double x, double centre, double sigma) {
  const double z = (x - centre) / sigma;
  return std::exp(-0.5 * z * z);
}

}  // namespace

CameraResponse default_css(const WavelengthGrid& grid) {
  grid.validate();
  CssMatrix m(3, grid.bands);
  for (std::size_t b = 0; b < grid.bands; ++b) {
    const double nm = grid.wavelength(b);
    m(0, b) = gauss(nm, 600.0, 35.0) + 0.08 * gauss(nm, 440.0, 25.0);
    m(1, b) = gauss(nm, 535.0, 40.0);
    m(2, b) = gauss(nm, 455.0, 30.0);
  }
  m /= m.rowwise().sum().maxCoeff();
  return CameraResponse(grid, m);
}

HsiCube make_scene(std::size_t height, std::size_t width, const WavelengthGrid& grid, std::uint64_t seed,
                   std::size_t materials) {
  grid.validate();
  if (height == 0 || width == 0) throw std::invalid_argument("scene size must be nonzero");
  if (materials == 0) throw std::invalid_argument("scene needs at least one material");
  rng::CounterStream s(seed, 0);

  std::vector<std::vector<double>> reflectance(materials, std::vector<double>(grid.bands));
  for (auto& spectrum : reflectance) {
    const double base = 0.03 + 0.1 * s.uniform();
    std::vector<double> centre(3), width_nm(3), amp(3);
    for (int j = 0; j < 3; ++j) {
      centre[j] = 370.0 + 360.0 * s.uniform();
      width_nm[j] = 25.0 + 100.0 * s.uniform();
      amp[j] = 0.1 + 0.8 * s.uniform();
    }
    for (std::size_t b = 0; b < grid.bands; ++b) {
      double v = base;
      for (int j = 0; j < 3; ++j) v += amp[j] * gauss(grid.wavelength(b), centre[j], width_nm[j]);
      spectrum[b] = v;
    }
  }

  std::vector<double> seed_row(materials), seed_col(materials);
  for (std::size_t m = 0; m < materials; ++m) {
    seed_row[m] = s.uniform() * static_cast<double>(height);
    seed_col[m] = s.uniform() * static_cast<double>(width);
  }
  const double fy = 0.5 + 2.0 * s.uniform(), fx = 0.5 + 2.0 * s.uniform();
  const double py = 2.0 * std::numbers::pi * s.uniform(), px = 2.0 * std::numbers::pi * s.uniform();
  const double illum_tilt = 0.4 * (s.uniform() - 0.5);

  HsiCube cube(height, width, grid);
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < width; ++c) {
      std::size_t nearest = 0;
      double best = INFINITY;
      for (std::size_t m = 0; m < materials; ++m) {
        const double dy = static_cast<double>(r) + 0.5 - seed_row[m], dx = static_cast<double>(c) + 0.5 - seed_col[m];
        const double d = dy * dy + dx * dx;
        if (d < best) {
          best = d;
          nearest = m;
        }
      }
      const double v = static_cast<double>(r) / static_cast<double>(height);
      const double u = static_cast<double>(c) / static_cast<double>(width);
      const double shading = 0.55 + 0.2 * std::sin(2.0 * std::numbers::pi * fy * v + py) +
                             0.2 * std::cos(2.0 * std::numbers::pi * fx * u + px);
      for (std::size_t b = 0; b < grid.bands; ++b) {
        const double t = static_cast<double>(b) / static_cast<double>(std::max<std::size_t>(1, grid.bands - 1));
        const double illum = 1.0 + illum_tilt * (t - 0.5);
        cube.at(r, c, b) = static_cast<float>(reflectance[nearest][b] * shading * illum);
      }
    }
  return cube;
}

}  // namespace hsbench::synth
