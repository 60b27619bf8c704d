#include "hsbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hsbench/camera.hpp"
#include "hsbench/rng.hpp"

namespace hsbench::metrics {

void MetricConfig::validate() const {
  if (!(denom_floor > 0.0) || !std::isfinite(denom_floor)) throw std::invalid_argument("denom_floor must be > 0");
  if (cluster_count < 1) throw std::invalid_argument("cluster_count must be >= 1");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be >= 0");
}

namespace {

void require_same_shape(const HsiCube& a, const HsiCube& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("shape mismatch: " + std::to_string(a.height()) + "x" + std::to_string(a.width()) + "x" +
                                std::to_string(a.bands()) + " vs " + std::to_string(b.height()) + "x" +
                                std::to_string(b.width()) + "x" + std::to_string(b.bands()));
}

inline double rel_err(double g, double r, double floor) { return std::abs(g - r) / std::max(g, floor); }

}  // namespace

double mrae(std::span<const double> gt, std::span<const double> rec, double denom_floor) {
  if (gt.size() != rec.size()) throw std::invalid_argument("mrae: length mismatch");
  if (gt.empty()) throw std::invalid_argument("mrae: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) sum += rel_err(gt[i], rec[i], denom_floor);
  return sum / static_cast<double>(gt.size());
}

double rmse(std::span<const double> gt, std::span<const double> rec) {
  if (gt.size() != rec.size()) throw std::invalid_argument("rmse: length mismatch");
  if (gt.empty()) throw std::invalid_argument("rmse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double d = gt[i] - rec[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(gt.size()));
}

double mrae(const HsiCube& gt, const HsiCube& rec, const MetricConfig& cfg) {
  require_same_shape(gt, rec);
  return mrae(gt.data(), rec.data(), cfg.denom_floor);
}

double rmse(const HsiCube& gt, const HsiCube& rec) {
  require_same_shape(gt, rec);
  return rmse(gt.data(), rec.data());
}

double mrae(const RgbImage& gt, const RgbImage& rec, const MetricConfig& cfg) {
  if (gt.height() != rec.height() || gt.width() != rec.width()) throw std::invalid_argument("rgb shape mismatch");
  return mrae(gt.data(), rec.data(), cfg.denom_floor);
}

double relative_error_quantile(const HsiCube& gt, const HsiCube& rec, double q, const MetricConfig& cfg) {
  require_same_shape(gt, rec);
  std::vector<double> errs(gt.size());
  for (std::size_t i = 0; i < errs.size(); ++i) errs[i] = rel_err(gt.data()[i], rec.data()[i], cfg.denom_floor);
  return camera::percentile(std::move(errs), q);
}

// ---------------------------------------------------------------------------
// Clustering

namespace {

using Spectra = std::vector<std::vector<double>>;

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t count_distinct(const Spectra& s) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
  std::size_t distinct = s.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size(); ++i)
    if (s[order[i]] != s[order[i - 1]]) ++distinct;
  return distinct;
}

std::size_t nearest(const std::vector<double>& x, const Spectra& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centroids.size(); ++k) {
    const double d = sq_dist(x, centroids[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

}  // namespace

ClusterAssignment cluster_spectra(const HsiCube& gt, const MetricConfig& cfg) {
  cfg.validate();
  const std::size_t n = gt.pixels();
  if (n == 0) throw std::invalid_argument("cluster_spectra: empty cube");
  Spectra spectra(n);
  for (std::size_t p = 0; p < n; ++p) spectra[p] = gt.spectrum(p);
  const std::size_t k = std::min(cfg.cluster_count, count_distinct(spectra));

  // k-means++ seeding.
  rng::CounterStream stream(cfg.cluster_seed, 0);
  Spectra centroids;
  centroids.reserve(k);
  centroids.push_back(spectra[stream.below(n)]);
  std::vector<double> d2(n);
  for (std::size_t p = 0; p < n; ++p) d2[p] = sq_dist(spectra[p], centroids[0]);
  while (centroids.size() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    const double target = stream.uniform() * total;
    double acc = 0.0;
    std::size_t pick = n;
    std::size_t last_positive = n;
    for (std::size_t p = 0; p < n; ++p) {
      if (d2[p] <= 0.0) continue;
      last_positive = p;
      acc += d2[p];
      if (acc >= target) {
        pick = p;
        break;
      }
    }
    if (pick == n) pick = last_positive;  // rounding at the top of the range
    centroids.push_back(spectra[pick]);
    for (std::size_t p = 0; p < n; ++p) d2[p] = std::min(d2[p], sq_dist(spectra[p], centroids.back()));
  }

  ClusterAssignment out;
  out.labels.assign(n, 0);
  const std::size_t bands = gt.bands();
  for (std::size_t it = 0; it < std::max<std::size_t>(cfg.cluster_iterations, 1); ++it) {
    bool changed = false;
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t label = nearest(spectra[p], centroids);
      if (it == 0 || label != out.labels[p]) changed = true;
      out.labels[p] = label;
    }
    out.iterations = it + 1;
    if (!changed) break;
    Spectra sums(k, std::vector<double>(bands, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t p = 0; p < n; ++p) {
      auto& s = sums[out.labels[p]];
      for (std::size_t b = 0; b < bands; ++b) s[b] += spectra[p][b];
      ++counts[out.labels[p]];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t b = 0; b < bands; ++b) centroids[c][b] = sums[c][b] / static_cast<double>(counts[c]);
  }
  out.centroids = std::move(centroids);
  return out;
}

double weighted_mrae(const HsiCube& gt, const HsiCube& rec, const ClusterAssignment& clusters,
                     const MetricConfig& cfg) {
  require_same_shape(gt, rec);
  if (clusters.labels.size() != gt.pixels()) throw std::invalid_argument("cluster labels do not match pixel count");
  const std::size_t k = clusters.cluster_count();
  std::vector<double> sums(k, 0.0);
  std::vector<std::size_t> counts(k, 0);
  const std::size_t n = gt.pixels();
  for (std::size_t b = 0; b < gt.bands(); ++b) {
    const auto g = gt.band(b);
    const auto r = rec.band(b);
    for (std::size_t p = 0; p < n; ++p) sums[clusters.labels[p]] += rel_err(g[p], r[p], cfg.denom_floor);
  }
  for (std::size_t p = 0; p < n; ++p) ++counts[clusters.labels[p]];
  double total = 0.0;
  std::size_t groups = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    total += sums[c] / static_cast<double>(counts[c] * gt.bands());
    ++groups;
  }
  return total / static_cast<double>(groups);
}

double weighted_mrae(const HsiCube& gt, const HsiCube& rec, const MetricConfig& cfg) {
  require_same_shape(gt, rec);
  return weighted_mrae(gt, rec, cluster_spectra(gt, cfg), cfg);
}

double physical_consistency(const HsiCube& rec, const CameraResponse& css, const RgbImage& original_rgb,
                            const MetricConfig& cfg) {
  if (rec.height() != original_rgb.height() || rec.width() != original_rgb.width())
    throw std::invalid_argument("physical_consistency: rgb dimensions do not match reconstruction");
  return mrae(original_rgb, camera::project_clean(rec, css), cfg);
}

// ---------------------------------------------------------------------------
// SSIM

namespace {

std::vector<double> gaussian_kernel() {
  std::vector<double> k(kSsimWindow);
  const double c = static_cast<double>(kSsimWindow / 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < kSsimWindow; ++i) {
    const double x = static_cast<double>(i) - c;
    k[i] = std::exp(-x * x / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable "valid" filtering: output (h - n + 1) x (w - n + 1).
std::vector<double> filter_valid(std::span<const double> x, std::size_t h, std::size_t w,
                                 const std::vector<double>& k) {
  const std::size_t n = k.size();
  const std::size_t ow = w - n + 1;
  const std::size_t oh = h - n + 1;
  std::vector<double> tmp(h * ow, 0.0);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * x[r * w + c + i];
      tmp[r * ow + c] = s;
    }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t r = 0; r < oh; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * tmp[(r + i) * ow + c];
      out[r * ow + c] = s;
    }
  return out;
}

}  // namespace

double ssim(std::span<const double> a, std::span<const double> b, std::size_t height, std::size_t width) {
  if (a.size() != height * width || b.size() != height * width) throw std::invalid_argument("ssim: shape mismatch");
  if (height < kSsimWindow || width < kSsimWindow)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  double range = *std::max_element(a.begin(), a.end());
  if (!(range > 0.0)) range = 1.0;
  const double c1 = (kSsimK1 * range) * (kSsimK1 * range);
  const double c2 = (kSsimK2 * range) * (kSsimK2 * range);
  const auto k = gaussian_kernel();
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto mu_a = filter_valid(a, height, width, k);
  const auto mu_b = filter_valid(b, height, width, k);
  const auto e_aa = filter_valid(aa, height, width, k);
  const auto e_bb = filter_valid(bb, height, width, k);
  const auto e_ab = filter_valid(ab, height, width, k);
  double sum = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double va = e_aa[i] - mu_a[i] * mu_a[i];
    const double vb = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    sum += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
           ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
  }
  return sum / static_cast<double>(mu_a.size());
}

double ssim(const HsiCube& a, const HsiCube& b) {
  require_same_shape(a, b);
  double sum = 0.0;
  for (std::size_t band = 0; band < a.bands(); ++band) sum += ssim(a.band(band), b.band(band), a.height(), a.width());
  return sum / static_cast<double>(a.bands());
}

// ---------------------------------------------------------------------------
// Losses

double loss_rel(const HsiCube& gt, const HsiCube& rec, const MetricConfig& cfg) { return mrae(gt, rec, cfg); }

double loss_backproj(const HsiCube& gt, const HsiCube& rec, const CameraResponse& css) {
  require_same_shape(gt, rec);
  const RgbImage pg = camera::project_clean(gt, css);
  const RgbImage pr = camera::project_clean(rec, css);
  double sum = 0.0;
  for (std::size_t i = 0; i < pg.data().size(); ++i) sum += std::abs(pg.data()[i] - pr.data()[i]);
  return sum / static_cast<double>(pg.data().size());
}

double loss_combined(const HsiCube& gt, const HsiCube& rec, const CameraResponse& css, const MetricConfig& cfg) {
  cfg.validate();
  return loss_rel(gt, rec, cfg) + cfg.tau * loss_backproj(gt, rec, css);
}

namespace {

inline std::size_t reflect101(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  if (i < 0) return static_cast<std::size_t>(-i);
  if (static_cast<std::size_t>(i) >= n) return 2 * n - 2 - static_cast<std::size_t>(i);
  return static_cast<std::size_t>(i);
}

}  // namespace

HsiCube laplacian(const HsiCube& cube) {
  HsiCube out(cube.height(), cube.width(), cube.grid());
  const auto h = static_cast<std::ptrdiff_t>(cube.height());
  const auto w = static_cast<std::ptrdiff_t>(cube.width());
  for (std::size_t b = 0; b < cube.bands(); ++b)
    for (std::ptrdiff_t r = 0; r < h; ++r)
      for (std::ptrdiff_t c = 0; c < w; ++c) {
        auto v = [&](std::ptrdiff_t rr, std::ptrdiff_t cc) {
          return cube.at(reflect101(rr, cube.height()), reflect101(cc, cube.width()), b);
        };
        out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), b) =
            v(r - 1, c) + v(r + 1, c) + v(r, c - 1) + v(r, c + 1) - 4.0 * v(r, c);
      }
  return out;
}

double loss_gradient(const HsiCube& gt, const HsiCube& rec) {
  require_same_shape(gt, rec);
  return mean_abs_error(laplacian(gt), laplacian(rec));
}

double mean_abs_error(const HsiCube& gt, const HsiCube& rec) {
  require_same_shape(gt, rec);
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) sum += std::abs(gt.data()[i] - rec.data()[i]);
  return sum / static_cast<double>(gt.size());
}

double mean_sq_error(const HsiCube& gt, const HsiCube& rec) {
  require_same_shape(gt, rec);
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double d = gt.data()[i] - rec.data()[i];
    sum += d * d;
  }
  return sum / static_cast<double>(gt.size());
}

double loss_l1_ssim_gradient(const HsiCube& gt, const HsiCube& rec) {
  return 10.0 * mean_abs_error(gt, rec) + (1.0 - ssim(gt, rec)) + loss_gradient(gt, rec);
}

double loss_l2_ssim(const HsiCube& gt, const HsiCube& rec) { return mean_sq_error(gt, rec) + (1.0 - ssim(gt, rec)); }

}  // namespace hsbench::metrics
