#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "doctest.h"
#include "hsbench/camera.hpp"
#include "hsbench/metrics.hpp"
#include "hsbench/synth.hpp"
#include "support.hpp"

using namespace hsbench;
using namespace hsbench::metrics;

namespace {

HsiCube triple(double a, double b, double c) { return HsiCube(1, 1, {400, 10, 3}, {a, b, c}); }

double oracle_mrae(const HsiCube& gt, const HsiCube& rec) {
  long double s = 0;
  for (std::size_t r = 0; r < gt.height(); ++r)
    for (std::size_t c = 0; c < gt.width(); ++c)
      for (std::size_t b = 0; b < gt.bands(); ++b)
        s += std::abs(static_cast<long double>(gt.at(r, c, b)) - rec.at(r, c, b)) / gt.at(r, c, b);
  return static_cast<double>(s / gt.size());
}

double oracle_rmse(const HsiCube& gt, const HsiCube& rec) {
  long double s = 0;
  for (std::size_t r = 0; r < gt.height(); ++r)
    for (std::size_t c = 0; c < gt.width(); ++c)
      for (std::size_t b = 0; b < gt.bands(); ++b) {
        const long double d = static_cast<long double>(gt.at(r, c, b)) - rec.at(r, c, b);
        s += d * d;
      }
  return static_cast<double>(std::sqrt(s / gt.size()));
}

// SSIM evaluated window by window with a 2-D Gaussian.
double oracle_ssim(const std::vector<double>& a, const std::vector<double>& b, std::size_t h, std::size_t w) {
  const int n = 11;
  double g[n][n], total = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      g[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      total += g[i][j];
    }
  const double range = std::max(*std::max_element(a.begin(), a.end()), 0.0) > 0 ? *std::max_element(a.begin(), a.end()) : 1.0;
  const double c1 = std::pow(0.01 * range, 2), c2 = std::pow(0.03 * range, 2);
  double acc = 0;
  std::size_t windows = 0;
  for (std::size_t r = 0; r + n <= h; ++r)
    for (std::size_t c = 0; c + n <= w; ++c) {
      double ma = 0, mb = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double wt = g[i][j] / total;
          ma += wt * a[(r + i) * w + c + j];
          mb += wt * b[(r + i) * w + c + j];
        }
      double va = 0, vb = 0, cov = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double wt = g[i][j] / total;
          const double da = a[(r + i) * w + c + j] - ma, db = b[(r + i) * w + c + j] - mb;
          va += wt * da * da;
          vb += wt * db * db;
          cov += wt * da * db;
        }
      acc += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++windows;
    }
  return acc / static_cast<double>(windows);
}

}  // namespace

TEST_CASE("hand fixture: MRAE and RMSE") {
  const auto gt = triple(1.0, 2.0, 4.0), rec = triple(1.1, 1.8, 4.0);
  CHECK(std::abs(mrae(gt, rec) - (0.1 / 1 + 0.2 / 2 + 0.0) / 3) < 1e-15);
  CHECK(std::abs(mrae(gt, rec) - 0.0666667) < 1e-6);
  CHECK(std::abs(rmse(gt, rec) - std::sqrt(0.05 / 3)) < 1e-15);
  CHECK(std::abs(rmse(gt, rec) - 0.129099) < 1e-6);
  CHECK(rmse(rec, gt) == rmse(gt, rec));
  CHECK(mrae(gt, gt) == 0.0);
  CHECK(rmse(gt, gt) == 0.0);
  CHECK(loss_rel(gt, rec) == mrae(gt, rec));
}

TEST_CASE("mrae and rmse match the triple-loop oracle") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t h = 1 + rng() % 8, w = 1 + rng() % 8, b = 1 + rng() % 31;
    const auto gt = support::random_cube(h, w, b, seed, 0.01, 2.0, false);
    const auto rec = support::random_cube(h, w, b, seed + 7777, 0.0, 2.0, false);
    const double m = oracle_mrae(gt, rec), r = oracle_rmse(gt, rec);
    CHECK(std::abs(mrae(gt, rec) - m) <= 1e-12 * m);
    CHECK(std::abs(rmse(gt, rec) - r) <= 1e-12 * r);
  }
}

TEST_CASE("mrae: scale invariance, floor, shape checks") {
  const auto gt = support::random_cube(4, 4, 31, 1, 0.1, 1.0);
  const auto rec = support::random_cube(4, 4, 31, 2, 0.1, 1.0);
  CHECK(mrae(scale_cube(gt, 2.0), scale_cube(rec, 2.0)) == mrae(gt, rec));
  CHECK(mrae(scale_cube(gt, 0.5), scale_cube(rec, 0.5)) == mrae(gt, rec));

  const auto zero = triple(0.0, 1.0, 1.0), off = triple(1e-9, 1.0, 1.0);
  CHECK(mrae(zero, off) == doctest::Approx((1e-9 / 1e-8) / 3));
  MetricConfig loose;
  loose.denom_floor = 1e-6;
  CHECK(mrae(zero, off, loose) == doctest::Approx((1e-9 / 1e-6) / 3));

  CHECK_THROWS_AS(mrae(gt, support::random_cube(4, 5, 31, 3)), std::invalid_argument);
  CHECK_THROWS_AS(rmse(gt, support::random_cube(4, 4, 30, 3)), std::invalid_argument);
}

TEST_CASE("metrics are invariant under a joint pixel permutation") {
  const auto gt = support::random_cube(5, 5, 31, 4);
  const auto rec = support::random_cube(5, 5, 31, 5);
  std::vector<std::size_t> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(1));
  HsiCube pg(5, 5, gt.grid()), pr(5, 5, gt.grid());
  for (std::size_t p = 0; p < 25; ++p) {
    pg.set_spectrum(p, gt.spectrum(perm[p]));
    pr.set_spectrum(p, rec.spectrum(perm[p]));
  }
  CHECK(mrae(pg, pr) == doctest::Approx(mrae(gt, rec)).epsilon(1e-14));
  CHECK(rmse(pg, pr) == doctest::Approx(rmse(gt, rec)).epsilon(1e-14));
}

TEST_CASE("relative error quantile diagnostic") {
  const auto gt = triple(1.0, 2.0, 4.0), rec = triple(1.1, 1.8, 4.0);
  CHECK(relative_error_quantile(gt, rec, 1.0) == doctest::Approx(0.1));
  CHECK(relative_error_quantile(gt, rec, 0.0) == 0.0);
}

TEST_CASE("cluster_spectra") {
  HsiCube two(4, 4, WavelengthGrid::standard());
  for (std::size_t p = 0; p < 16; ++p) {
    std::vector<double> s(31, p % 3 == 0 ? 0.2 : 0.8);
    two.set_spectrum(p, s);
  }
  const auto a = cluster_spectra(two);
  CHECK(a.cluster_count() == 2);
  for (std::size_t p = 0; p < 16; ++p)
    for (std::size_t q = 0; q < 16; ++q) CHECK((a.labels[p] == a.labels[q]) == ((p % 3 == 0) == (q % 3 == 0)));

  MetricConfig one;
  one.cluster_count = 1;
  const auto single = cluster_spectra(support::random_cube(6, 6, 31, 3), one);
  CHECK(single.cluster_count() == 1);
  for (auto l : single.labels) CHECK(l == 0);

  MetricConfig k5;
  k5.cluster_count = 5;
  k5.cluster_seed = 17;
  const auto cube = support::random_cube(8, 8, 31, 8);
  const auto x = cluster_spectra(cube, k5), y = cluster_spectra(cube, k5);
  CHECK(x.labels == y.labels);
  CHECK(x.cluster_count() == 5);
  for (auto l : x.labels) CHECK(l < 5);
  if (x.iterations < k5.cluster_iterations) {
    // Converged: each centroid is the mean of its members.
    for (std::size_t k = 0; k < 5; ++k) {
      std::vector<double> mean(31, 0.0);
      std::size_t count = 0;
      for (std::size_t p = 0; p < 64; ++p)
        if (x.labels[p] == k) {
          const auto s = cube.spectrum(p);
          for (std::size_t b = 0; b < 31; ++b) mean[b] += s[b];
          ++count;
        }
      if (count == 0) continue;
      for (std::size_t b = 0; b < 31; ++b) CHECK(x.centroids[k][b] == doctest::Approx(mean[b] / count).epsilon(1e-12));
    }
  }
}

TEST_CASE("weighted MRAE") {
  const auto gt = support::random_cube(6, 6, 31, 10);
  const auto rec = support::random_cube(6, 6, 31, 11);
  MetricConfig one;
  one.cluster_count = 1;
  CHECK(weighted_mrae(gt, rec, one) == mrae(gt, rec));
  CHECK(weighted_mrae(gt, gt) == 0.0);

  // Three pixels of one material off by 2 %, one pixel of another off by 10 %.
  HsiCube g(2, 2, WavelengthGrid::standard()), r(2, 2, WavelengthGrid::standard());
  for (std::size_t p = 0; p < 4; ++p) {
    const double base = p < 3 ? 1.0 : 2.0;
    const double factor = p < 3 ? 1.02 : 1.10;
    g.set_spectrum(p, std::vector<double>(31, base));
    r.set_spectrum(p, std::vector<double>(31, base * factor));
  }
  CHECK(std::abs(weighted_mrae(g, r) - 0.06) < 1e-9);
  CHECK(std::abs(mrae(g, r) - 0.04) < 1e-9);

  // Equal per-cluster errors: weighted equals plain.
  HsiCube rs = scale_cube(g, 1.05);
  CHECK(weighted_mrae(g, rs) == doctest::Approx(mrae(g, rs)).epsilon(1e-12));
}

TEST_CASE("physical consistency") {
  const auto css = synth::default_css();
  const auto gt = synth::make_scene(8, 8, WavelengthGrid::standard(), 4);
  const auto rgb = camera::project_clean(gt, css);
  CHECK(physical_consistency(gt, css, rgb) == 0.0);
  CHECK(physical_consistency(scale_cube(gt, 2.0), css, rgb) == 1.0);
  CHECK_THROWS_AS(physical_consistency(gt, css, RgbImage(8, 9)), std::invalid_argument);
}

TEST_CASE("SSIM") {
  const std::size_t h = 16, w = 19;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> a(h * w), b(h * w), anti(h * w), c(h * w, 0.3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = u(rng);
    b[i] = std::clamp(a[i] + 0.1 * (u(rng) - 0.5), 0.0, 1.0);
    anti[i] = 1.0 - a[i];
  }
  CHECK(ssim(a, a, h, w) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ssim(c, c, h, w) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ssim(a, b, h, w) - oracle_ssim(a, b, h, w)) < 1e-10);
  const double neg = ssim(a, anti, h, w);
  CHECK(std::abs(neg - oracle_ssim(a, anti, h, w)) < 1e-10);
  CHECK(neg < 0.0);
  CHECK(neg >= -1.0);
  CHECK_THROWS_AS(ssim(std::vector<double>(100), std::vector<double>(100), 10, 10), std::invalid_argument);

  const auto cube = support::random_cube(12, 12, 4, 13);
  double mean = 0;
  const auto other = support::random_cube(12, 12, 4, 14);
  for (std::size_t band = 0; band < 4; ++band)
    mean += ssim(cube.band(band), other.band(band), 12, 12) / 4.0;
  CHECK(ssim(cube, other) == doctest::Approx(mean).epsilon(1e-14));
}

TEST_CASE("back-projection loss") {
  const auto css = support::random_css(31, 20);
  const auto gt = support::random_cube(3, 3, 31, 21, 0.5, 1.0, false);
  const auto rec = support::random_cube(3, 3, 31, 22, 0.5, 1.0, false);
  long double acc = 0;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c)
      for (int ch = 0; ch < 3; ++ch) {
        long double pg = 0, pr = 0;
        for (std::size_t b = 0; b < 31; ++b) {
          pg += static_cast<long double>(css.matrix()(ch, b)) * gt.at(r, c, b);
          pr += static_cast<long double>(css.matrix()(ch, b)) * rec.at(r, c, b);
        }
        acc += std::abs(pg - pr);
      }
  const double oracle = static_cast<double>(acc / 27);
  CHECK(std::abs(loss_backproj(gt, rec, css) - oracle) <= 1e-12 * oracle);
  CHECK(loss_backproj(gt, gt, css) == 0.0);

  // A null-space perturbation is invisible to the camera.
  const Eigen::MatrixXd phi = css.matrix();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi, Eigen::ComputeFullV);
  const Eigen::VectorXd null = svd.matrixV().col(30);
  REQUIRE((phi * null).norm() < 1e-12);
  HsiCube shifted = gt;
  for (std::size_t p = 0; p < 9; ++p) {
    auto s = shifted.spectrum(p);
    for (std::size_t b = 0; b < 31; ++b) s[b] += 0.1 * null(static_cast<Eigen::Index>(b));
    shifted.set_spectrum(p, s);
  }
  CHECK(loss_backproj(gt, shifted, css) < 1e-13);
  CHECK(mrae(gt, shifted) > 1e-3);
}

TEST_CASE("combined loss") {
  // Rows summing to 0.05 turn a uniform 0.02 spectral offset into 0.001 per channel.
  CssMatrix m = CssMatrix::Zero(3, 31);
  for (int b = 0; b < 31; ++b) m(b % 3, b) = 1.0;
  for (int ch = 0; ch < 3; ++ch) m.row(ch) *= 0.05 / m.row(ch).sum();
  const CameraResponse css(WavelengthGrid::standard(), m);
  HsiCube gt(1, 1, WavelengthGrid::standard(), std::vector<double>(31, 1.0));
  HsiCube rec(1, 1, WavelengthGrid::standard(), std::vector<double>(31, 1.02));
  CHECK(loss_rel(gt, rec) == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(loss_backproj(gt, rec, css) == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(std::abs(loss_combined(gt, rec, css) - 0.03) < 1e-12);

  MetricConfig no_tau;
  no_tau.tau = 0.0;
  const auto a = support::random_cube(3, 3, 31, 30), b = support::random_cube(3, 3, 31, 31);
  CHECK(loss_combined(a, b, css, no_tau) == loss_rel(a, b));
  CHECK(loss_combined(a, a, css) == 0.0);
  CHECK(loss_combined(a, b, css) >= 0.0);
}

TEST_CASE("Laplacian and gradient loss") {
  const auto gt = support::random_cube(7, 9, 5, 40);
  HsiCube offset = gt;
  for (std::size_t b = 0; b < 5; ++b)
    for (double& v : offset.band(b)) v += 0.1 * static_cast<double>(b + 1);
  CHECK(loss_gradient(gt, offset) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(loss_gradient(gt, gt) == 0.0);

  HsiCube zero(7, 9, {400, 10, 5}), impulse(7, 9, {400, 10, 5});
  const double height = 0.8;
  impulse.at(3, 4, 2) = height;
  const auto lap = laplacian(impulse);
  CHECK(lap.at(3, 4, 2) == -4 * height);
  CHECK(lap.at(2, 4, 2) == height);
  CHECK(lap.at(3, 5, 2) == height);
  CHECK(lap.at(2, 5, 2) == 0.0);
  CHECK(loss_gradient(zero, impulse) == doctest::Approx(8 * height / (7 * 9 * 5)).epsilon(1e-14));

  // Reflect-101 at the border: an edge impulse is mirrored onto its inner neighbour.
  HsiCube edge(4, 4, {400, 10, 1});
  edge.at(0, 1, 0) = 1.0;
  CHECK(laplacian(edge).at(1, 1, 0) == 1.0);
  CHECK(laplacian(edge).at(0, 1, 0) == -4.0);
}

TEST_CASE("participant composite losses") {
  const auto a = support::random_cube(12, 12, 3, 50), b = support::random_cube(12, 12, 3, 51);
  CHECK(loss_l1_ssim_gradient(a, a) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(loss_l2_ssim(a, a) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(loss_l1_ssim_gradient(a, b) ==
        doctest::Approx(10 * mean_abs_error(a, b) + (1 - ssim(a, b)) + loss_gradient(a, b)).epsilon(1e-14));
  CHECK(loss_l2_ssim(a, b) == doctest::Approx(mean_sq_error(a, b) + 1 - ssim(a, b)).epsilon(1e-14));
  CHECK(mean_sq_error(a, b) == doctest::Approx(rmse(a, b) * rmse(a, b)).epsilon(1e-12));
}

TEST_CASE("metric config validation") {
  MetricConfig c;
  CHECK_NOTHROW(c.validate());
  c.denom_floor = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.cluster_count = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.tau = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
