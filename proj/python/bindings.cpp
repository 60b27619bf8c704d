#include <cstring>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hsbench/camera.hpp"
#include "hsbench/core.hpp"
#include "hsbench/io.hpp"
#include "hsbench/metrics.hpp"
#include "hsbench/recon.hpp"
#include "hsbench/rng.hpp"
#include "hsbench/robustness.hpp"
#include "hsbench/synth.hpp"

namespace py = pybind11;
using namespace hsbench;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Cubes cross the boundary as (height, width, bands) arrays.
HsiCube to_cube(const Array& a, double start_nm, double step_nm) {
  if (a.ndim() != 3) throw py::value_error("cube must be a (height, width, bands) array");
  const auto h = static_cast<std::size_t>(a.shape(0)), w = static_cast<std::size_t>(a.shape(1)),
             b = static_cast<std::size_t>(a.shape(2));
  HsiCube cube(h, w, {start_nm, step_nm, b});
  const double* src = a.data();
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      for (std::size_t k = 0; k < b; ++k) cube.at(r, c, k) = src[(r * w + c) * b + k];
  return cube;
}

Array from_cube(const HsiCube& cube) {
  const std::size_t h = cube.height(), w = cube.width(), b = cube.bands();
  Array out({h, w, b});
  double* dst = out.mutable_data();
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      for (std::size_t k = 0; k < b; ++k) dst[(r * w + c) * b + k] = cube.at(r, c, k);
  return out;
}

RgbImage to_rgb(const Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("rgb must be a (height, width, 3) array");
  const auto h = static_cast<std::size_t>(a.shape(0)), w = static_cast<std::size_t>(a.shape(1));
  return RgbImage(h, w, std::vector<double>(a.data(), a.data() + h * w * 3));
}

Array from_rgb(const RgbImage& img) {
  Array out({img.height(), img.width(), std::size_t{3}});
  std::memcpy(out.mutable_data(), img.data().data(), img.data().size() * sizeof(double));
  return out;
}

py::array_t<std::uint8_t> from_rgb8(const Rgb8Image& img) {
  py::array_t<std::uint8_t> out({img.height(), img.width(), std::size_t{3}});
  std::memcpy(out.mutable_data(), img.data().data(), img.data().size());
  return out;
}

metrics::MetricConfig metric_config(double denom_floor) {
  metrics::MetricConfig cfg;
  cfg.denom_floor = denom_floor;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral reconstruction benchmark core";

  py::register_exception<io::FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<recon::SolverError>(m, "SolverError", PyExc_ArithmeticError);

  py::class_<CameraResponse>(m, "CameraResponse")
      .def(py::init([](const Array& matrix, double start_nm, double step_nm) {
             if (matrix.ndim() != 2 || matrix.shape(0) != 3) throw py::value_error("css must be a (3, bands) array");
             const auto bands = static_cast<std::size_t>(matrix.shape(1));
             CssMatrix css(3, static_cast<Eigen::Index>(bands));
             for (Eigen::Index r = 0; r < 3; ++r)
               for (Eigen::Index c = 0; c < css.cols(); ++c) css(r, c) = matrix.at(r, c);
             return CameraResponse({start_nm, step_nm, bands}, css);
           }),
           py::arg("matrix"), py::arg("start_nm") = 400.0, py::arg("step_nm") = 10.0)
      .def_property_readonly("matrix",
                             [](const CameraResponse& c) {
                               Array out({std::size_t{3}, c.grid().bands});
                               for (Eigen::Index r = 0; r < 3; ++r)
                                 for (Eigen::Index k = 0; k < c.matrix().cols(); ++k) out.mutable_at(r, k) = c.matrix()(r, k);
                               return out;
                             })
      .def_property_readonly("bands", [](const CameraResponse& c) { return c.grid().bands; })
      .def_property_readonly("start_nm", [](const CameraResponse& c) { return c.grid().start_nm; })
      .def_property_readonly("step_nm", [](const CameraResponse& c) { return c.grid().step_nm; });

  m.def("default_css", [](std::size_t bands, double start_nm, double step_nm) {
    return synth::default_css({start_nm, step_nm, bands});
  }, py::arg("bands") = 31, py::arg("start_nm") = 400.0, py::arg("step_nm") = 10.0);
  m.def("make_scene", [](std::size_t height, std::size_t width, std::uint64_t seed, std::size_t bands) {
    return from_cube(synth::make_scene(height, width, {400.0, 10.0, bands}, seed));
  }, py::arg("height"), py::arg("width"), py::arg("seed"), py::arg("bands") = 31);

  // metrics
  m.def("mrae", [](const Array& gt, const Array& rec, double floor) {
    return metrics::mrae(to_cube(gt, 400, 10), to_cube(rec, 400, 10), metric_config(floor));
  }, py::arg("gt"), py::arg("rec"), py::arg("denom_floor") = 1e-8);
  m.def("rmse", [](const Array& gt, const Array& rec) { return metrics::rmse(to_cube(gt, 400, 10), to_cube(rec, 400, 10)); },
        py::arg("gt"), py::arg("rec"));
  m.def("weighted_mrae", [](const Array& gt, const Array& rec, std::size_t clusters, std::uint64_t seed) {
    metrics::MetricConfig cfg;
    cfg.cluster_count = clusters;
    cfg.cluster_seed = seed;
    return metrics::weighted_mrae(to_cube(gt, 400, 10), to_cube(rec, 400, 10), cfg);
  }, py::arg("gt"), py::arg("rec"), py::arg("clusters") = 1000, py::arg("seed") = 0);
  m.def("physical_consistency", [](const Array& rec, const CameraResponse& css, const Array& rgb) {
    const auto& g = css.grid();
    return metrics::physical_consistency(to_cube(rec, g.start_nm, g.step_nm), css, to_rgb(rgb));
  }, py::arg("rec"), py::arg("css"), py::arg("rgb"));
  m.def("ssim", [](const Array& a, const Array& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.shape(0) != b.shape(0) || a.shape(1) != b.shape(1))
      throw py::value_error("ssim takes two equally shaped 2-D arrays");
    const auto n = static_cast<std::size_t>(a.size());
    return metrics::ssim({a.data(), n}, {b.data(), n}, static_cast<std::size_t>(a.shape(0)),
                         static_cast<std::size_t>(a.shape(1)));
  }, py::arg("a"), py::arg("b"));

  // camera
  m.def("project", [](const Array& cube, const CameraResponse& css) {
    const auto& g = css.grid();
    return from_rgb(camera::project_clean(to_cube(cube, g.start_nm, g.step_nm), css));
  }, py::arg("cube"), py::arg("css"));
  m.def("simulate_real_world",
        [](const Array& cube, const CameraResponse& css, double white_level, double photon_gain, double dark_sigma,
           std::uint64_t seed, int jpeg_quality) {
          camera::RealWorldParams p;
          p.white_level = white_level;
          p.noise = {photon_gain, dark_sigma, seed};
          p.jpeg_quality = jpeg_quality;
          const auto& g = css.grid();
          return from_rgb8(camera::simulate_real_world(to_cube(cube, g.start_nm, g.step_nm), css, p));
        },
        py::arg("cube"), py::arg("css"), py::arg("white_level"), py::arg("photon_gain") = 1000.0,
        py::arg("dark_sigma") = 0.003, py::arg("seed") = 0, py::arg("jpeg_quality") = io::kDefaultJpegQuality);

  // reconstruction
  m.def("pseudoinverse_estimate", [](const CameraResponse& css, const Array& rgb) {
    return from_cube(recon::pseudoinverse_estimate(css, to_rgb(rgb)));
  }, py::arg("css"), py::arg("rgb"));
  m.def("fit_linear", [](const std::vector<std::pair<Array, Array>>& pairs, int order, double lambda) {
    std::vector<recon::TrainingPair> train;
    for (const auto& [rgb, cube] : pairs) train.push_back({to_rgb(rgb), to_cube(cube, 400, 10)});
    py::gil_scoped_release release;
    return recon::fit_linear(train, order, lambda);
  }, py::arg("pairs"), py::arg("order") = 1, py::arg("ridge_lambda") = 1e-8);
  py::class_<recon::LinearModel>(m, "LinearModel")
      .def_readonly("feature_order", &recon::LinearModel::feature_order)
      .def_readonly("ridge_lambda", &recon::LinearModel::ridge_lambda)
      .def_property_readonly("weights", [](const recon::LinearModel& lm) {
        Array out({static_cast<std::size_t>(lm.weights.rows()), static_cast<std::size_t>(lm.weights.cols())});
        for (Eigen::Index r = 0; r < lm.weights.rows(); ++r)
          for (Eigen::Index c = 0; c < lm.weights.cols(); ++c) out.mutable_at(r, c) = lm.weights(r, c);
        return out;
      })
      .def("predict", [](const recon::LinearModel& lm, const Array& rgb) {
        return from_cube(recon::predict_linear(lm, to_rgb(rgb)));
      }, py::arg("rgb"))
      .def("save", [](const recon::LinearModel& lm, const std::filesystem::path& p) { recon::save_model(lm, p); });

  // robustness
  m.def("shuffle_patches", [](const Array& rgb, std::size_t patch, std::uint64_t seed) {
    robustness::ShuffleSpec spec;
    spec.patch = patch;
    spec.seed = seed;
    auto [out, used] = robustness::shuffle_patches(to_rgb(rgb), spec);
    return py::make_tuple(from_rgb(out), used.permutation);
  }, py::arg("rgb"), py::arg("patch") = 4, py::arg("seed") = 0);

  // io and seeding
  m.def("read_cube", [](const std::filesystem::path& p) { return from_cube(io::read_cube(p)); }, py::arg("path"));
  m.def("write_cube", [](const Array& cube, const std::filesystem::path& p, double start_nm, double step_nm) {
    io::write_cube(to_cube(cube, start_nm, step_nm), p);
  }, py::arg("cube"), py::arg("path"), py::arg("start_nm") = 400.0, py::arg("step_nm") = 10.0);
  m.def("derive_seed", [](std::uint64_t base, const std::string& label) { return rng::derive_seed(base, label); },
        py::arg("base"), py::arg("label"));
}
