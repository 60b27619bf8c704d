// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "hsbench/camera.hpp"
#include "hsbench/core.hpp"
#include "hsbench/io.hpp"
#include "hsbench/metrics.hpp"
#include "hsbench/recon.hpp"
#include "hsbench/rng.hpp"
#include "hsbench/robustness.hpp"
#include "hsbench/synth.hpp"

#ifndef HSBENCH_CLI_PATH
#error "HSBENCH_CLI_PATH must name the hsbench executable"
#endif

namespace fs = std::filesystem;
using namespace hsbench;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

HsiCube random_cube(std::size_t h, std::size_t w, std::size_t b, std::mt19937_64& rng, double lo, double hi,
                    bool as_float = false) {
  std::uniform_real_distribution<double> u(lo, hi);
  HsiCube cube(h, w, {400.0, 10.0, b});
  for (double& v : cube.data()) v = as_float ? static_cast<float>(u(rng)) : u(rng);
  return cube;
}

RgbImage random_rgb(std::size_t h, std::size_t w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RgbImage img(h, w);
  for (double& v : img.data()) v = u(rng);
  return img;
}

CameraResponse random_css(std::size_t bands, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CssMatrix m(3, static_cast<Eigen::Index>(bands));
  for (Eigen::Index r = 0; r < 3; ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = u(rng);
  return CameraResponse({400.0, 10.0, bands}, m);
}

std::vector<HsiCube> scenes(std::size_t count, std::size_t side, std::uint64_t seed) {
  std::vector<HsiCube> out;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(synth::make_scene(side, side, WavelengthGrid::standard(), rng::derive_seed(seed, std::to_string(i))));
  return out;
}

recon::LinearModel clean_linear(const CameraResponse& css) {
  std::vector<recon::TrainingPair> pairs;
  for (const auto& c : scenes(6, 24, 7)) pairs.push_back({camera::project_clean(c, css), c});
  return recon::fit_linear(pairs, 1, 1e-8);
}

// ---------------------------------------------------------------------------

Outcome metric_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  double worst = 0.0;
  const std::size_t cases = 1000;
  for (std::size_t i = 0; i < cases; ++i) {
    const std::size_t h = 1 + rng() % 8, w = 1 + rng() % 8, b = 3 + rng() % 29;
    const auto gt = random_cube(h, w, b, rng, 0.01, 2.0);
    const auto rec = random_cube(h, w, b, rng, 0.0, 2.0);
    const auto css = random_css(b, rng);
    long double sm = 0, ss = 0, sb = 0;
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c) {
        for (std::size_t k = 0; k < b; ++k) {
          const long double d = static_cast<long double>(gt.at(r, c, k)) - rec.at(r, c, k);
          sm += std::abs(d) / gt.at(r, c, k);
          ss += d * d;
        }
        for (Eigen::Index ch = 0; ch < 3; ++ch) {
          long double pg = 0, pr = 0;
          for (std::size_t k = 0; k < b; ++k) {
            pg += css.matrix()(ch, static_cast<Eigen::Index>(k)) * static_cast<long double>(gt.at(r, c, k));
            pr += css.matrix()(ch, static_cast<Eigen::Index>(k)) * static_cast<long double>(rec.at(r, c, k));
          }
          sb += std::abs(pg - pr);
        }
      }
    const double n = static_cast<double>(gt.size());
    const double om = static_cast<double>(sm / n), orr = static_cast<double>(std::sqrt(ss / n)),
                 ob = static_cast<double>(sb / (h * w * 3));
    worst = std::max({worst, std::abs(metrics::mrae(gt, rec) - om) / om, std::abs(metrics::rmse(gt, rec) - orr) / orr,
                      std::abs(metrics::loss_backproj(gt, rec, css) - ob) / ob});
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 10.0,
          std::to_string(cases) + " cubes, max rel err " + fmt("%.2e", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome hand_fixtures() {
  const HsiCube gt(1, 1, {400, 10, 3}, {1.0, 2.0, 4.0});
  const HsiCube rec(1, 1, {400, 10, 3}, {1.1, 1.8, 4.0});
  const double m = metrics::mrae(gt, rec), r = metrics::rmse(gt, rec);
  // Closed forms: (0.1/1 + 0.2/2 + 0)/3 and sqrt((0.01 + 0.04 + 0)/3).
  const bool ok = std::abs(m - 0.2 / 3.0) < 1e-9 && std::abs(r - std::sqrt(0.05 / 3.0)) < 1e-9 &&
                  std::abs(m - 0.0666667) < 1e-6 && std::abs(r - 0.129099) < 1e-6;
  return {ok, "MRAE " + fmt("%.9f", m) + ", RMSE " + fmt("%.9f", r)};
}

Outcome linearity() {
  std::mt19937_64 rng(3);
  std::size_t violations = 0;
  for (int i = 0; i < 100; ++i) {
    const auto cube = random_cube(1 + rng() % 8, 1 + rng() % 8, 31, rng, 0.0, 1.0, true);
    const auto css = random_css(31, rng);
    const auto once = camera::simulate_clean(cube, css);
    const auto twice = camera::simulate_clean(scale_cube(cube, 2.0), css);
    for (std::size_t k = 0; k < once.data().size(); ++k) {
      const double expect = 2.0 * once.data()[k];
      const double ulp = std::nextafter(expect, INFINITY) - expect;
      if (std::abs(twice.data()[k] - expect) > ulp) ++violations;
    }
  }
  return {violations == 0, "100 cubes, " + std::to_string(violations) + " samples beyond 1 ulp"};
}

Outcome pinv_consistency() {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto css = random_css(31, rng);
    const auto rgb = random_rgb(1 + rng() % 8, 1 + rng() % 8, rng);
    worst = std::max(worst, metrics::physical_consistency(recon::pseudoinverse_estimate(css, rgb), css, rgb));
  }
  return {worst < 1e-10, "100 pairs, max physical consistency " + fmt("%.2e", worst)};
}

Outcome shuffle_invariance() {
  const auto css = synth::default_css();
  const auto model = clean_linear(css);
  double worst = 0.0;
  for (const auto& cube : scenes(20, 24, 11)) {
    const auto input = camera::project_clean(cube, css);
    const double base = metrics::mrae(cube, recon::predict_linear(model, input));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      robustness::ShuffleSpec spec;
      spec.seed = seed;
      const auto [moved, used] = robustness::shuffle_patches(input, spec);
      const auto moved_gt = robustness::shuffle_patches(cube, used).first;
      worst = std::max(worst, std::abs(metrics::mrae(moved_gt, recon::predict_linear(model, moved)) - base));
    }
  }
  return {worst < 1e-9, "20 scenes x 10 seeds, max |delta MRAE| " + fmt("%.2e", worst)};
}

Outcome exposure_invariance() {
  const auto css = synth::default_css();
  const auto model = clean_linear(css);
  const recon::Reconstructor linear = recon::make_reconstructor(model);
  const recon::Reconstructor offset = [&](const RgbImage& rgb) {
    auto out = recon::predict_linear(model, rgb);
    for (double& v : out.data()) v += 0.01;
    return out;
  };
  auto spread = [&](const recon::Reconstructor& method) {
    double worst = 0.0;
    for (const auto& cube : scenes(10, 24, 13)) {
      double lo = INFINITY, hi = -INFINITY;
      for (double f : {0.5, 1.0, 2.0}) {
        const auto scaled = scale_cube(cube, f);
        const double m = metrics::mrae(scaled, method(camera::project_clean(scaled, css)));
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      worst = std::max(worst, hi - lo);
    }
    return worst;
  };
  const double a = spread(linear), b = spread(offset);
  return {a < 1e-9 && b > 10.0 * a && b > 1e-6,
          "linear spread " + fmt("%.2e", a) + ", offset spread " + fmt("%.2e", b)};
}

Outcome noise_statistics() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t side = 1000;
  const double n = static_cast<double>(side * side);
  const camera::BayerMosaic flat(side, side, std::vector<double>(side * side, 1.0));
  const auto shot = camera::add_sensor_noise(flat, {1000.0, 0.0, 2020});
  double sum = 0, sq = 0;
  for (double v : shot.data()) sum += v;
  const double mean = sum / n;
  for (double v : shot.data()) sq += (v - mean) * (v - mean);
  const double var = sq / (n - 1);
  const bool shot_ok = std::abs(mean - 1.0) <= 3.0 * std::sqrt(1e-3 / n) && std::abs(var / 1e-3 - 1.0) <= 0.05;

  // Gaussian only: third standardized moment and the sign balance.
  const double sigma = 0.01;
  const auto dark = camera::add_sensor_noise(flat, {0.0, sigma, 2021});
  double m3 = 0;
  std::size_t above = 0;
  for (double v : dark.data()) {
    const double d = v - 1.0;
    m3 += d * d * d;
    above += d > 0;
  }
  const double skew = m3 / n / (sigma * sigma * sigma);
  const double frac = static_cast<double>(above) / n;
  // Standard errors: sqrt(6/n) for skewness, 0.5/sqrt(n) for the fraction.
  const bool sym_ok = std::abs(skew) < 5 * std::sqrt(6.0 / n) && std::abs(frac - 0.5) < 5 * 0.5 / std::sqrt(n);
  const double secs = seconds_since(t0);
  return {shot_ok && sym_ok && secs < 5.0, "mean " + fmt("%.6f", mean) + ", var " + fmt("%.4e", var) + ", skew " +
                                               fmt("%.4f", skew) + ", above " + fmt("%.4f", frac) + ", " +
                                               fmt("%.2f", secs) + " s"};
}

Outcome track_ordering() {
  const auto css = synth::default_css();
  const auto train = scenes(6, 32, 21);
  const auto test = scenes(10, 32, 22);
  robustness::TrackConfig clean;
  robustness::TrackConfig real;
  real.track = robustness::Track::kRealWorld;
  real.real_world.white_level = camera::default_white_level(train, css);

  auto pairs_for = [&](const robustness::TrackConfig& tc, std::size_t offset) {
    std::vector<recon::TrainingPair> pairs;
    for (std::size_t i = 0; i < train.size(); ++i)
      pairs.push_back({robustness::make_track_input(train[i], css, robustness::for_scene(tc, "t" + std::to_string(
                                                                                                 i + offset))),
                       train[i]});
    return pairs;
  };
  auto score = [&](const robustness::TrackConfig& tc, const recon::Reconstructor& method) {
    double sum = 0;
    for (std::size_t i = 0; i < test.size(); ++i)
      sum += metrics::mrae(test[i],
                           method(robustness::make_track_input(test[i], css, robustness::for_scene(tc, "s" + std::to_string(i)))));
    return sum / static_cast<double>(test.size());
  };
  struct Baseline {
    std::string name;
    std::function<recon::Model(const std::vector<recon::TrainingPair>&)> fit;
  };
  const std::vector<Baseline> baselines{
      {"linear1", [](const auto& p) { return recon::Model(recon::fit_linear(p, 1, 1e-8)); }},
      {"linear2", [](const auto& p) { return recon::Model(recon::fit_linear(p, 2, 1e-8)); }},
      {"basis", [](const auto& p) {
         recon::BasisFitOptions o;
         o.k = 8;
         o.feature_order = 2;
         o.lambda = 1e-6;
         return recon::Model(recon::fit_basis(p, o));
       }}};
  bool ok = true;
  std::string detail;
  for (const auto& b : baselines) {
    const double c = score(clean, recon::make_reconstructor(b.fit(pairs_for(clean, 0))));
    const double r = score(real, recon::make_reconstructor(b.fit(pairs_for(real, 0))));
    ok = ok && r > c;
    detail += (detail.empty() ? "" : "; ") + b.name + " clean " + fmt("%.4f", c) + " < real " + fmt("%.4f", r);
  }
  return {ok, "10 test scenes; " + detail};
}

Outcome weighted_mrae() {
  std::mt19937_64 rng(9);
  metrics::MetricConfig one;
  one.cluster_count = 1;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto gt = random_cube(6, 6, 31, rng, 0.05, 1.0);
    const auto rec = random_cube(6, 6, 31, rng, 0.05, 1.0);
    const double m = metrics::mrae(gt, rec);
    worst = std::max(worst, std::abs(metrics::weighted_mrae(gt, rec, one) - m) / m);
  }
  // Three pixels of one material 2 % off, one pixel of another 10 % off.
  HsiCube g(2, 2, WavelengthGrid::standard()), r(2, 2, WavelengthGrid::standard());
  for (std::size_t p = 0; p < 4; ++p) {
    const double base = p < 3 ? 1.0 : 2.0, factor = p < 3 ? 1.02 : 1.10;
    g.set_spectrum(p, std::vector<double>(31, base));
    r.set_spectrum(p, std::vector<double>(31, base * factor));
  }
  const double w = metrics::weighted_mrae(g, r), plain = metrics::mrae(g, r);
  return {worst <= 1e-12 && std::abs(w - 0.06) < 1e-9 && std::abs(plain - 0.04) < 1e-9,
          "k=1 max rel diff " + fmt("%.2e", worst) + ", fixture weighted " + fmt("%.9f", w) + " plain " +
              fmt("%.9f", plain)};
}

Outcome recovery() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto planted = [&](const Eigen::MatrixXd& map) {
    std::vector<recon::TrainingPair> pairs;
    for (int i = 0; i < 4; ++i) {
      auto rgb = random_rgb(8, 8, rng);
      for (double& v : rgb.data()) v = 0.1 + 0.9 * v;
      HsiCube cube(8, 8, WavelengthGrid::standard());
      for (std::size_t p = 0; p < 64; ++p) {
        const Eigen::Vector3d x(rgb.data()[3 * p], rgb.data()[3 * p + 1], rgb.data()[3 * p + 2]);
        const Eigen::VectorXd s = map * x;
        cube.set_spectrum(p, std::span<const double>(s.data(), 31));
      }
      pairs.push_back({rgb, cube});
    }
    return pairs;
  };
  auto worst_mrae = [](const std::vector<recon::TrainingPair>& pairs, const recon::Reconstructor& f) {
    double w = 0;
    for (const auto& p : pairs) w = std::max(w, metrics::mrae(p.target, f(p.input)));
    return w;
  };

  Eigen::MatrixXd lin(31, 3);
  for (Eigen::Index i = 0; i < lin.size(); ++i) lin.data()[i] = u(rng);
  const auto lin_pairs = planted(lin);
  const double lin_err = worst_mrae(lin_pairs, recon::make_reconstructor(recon::fit_linear(lin_pairs, 1, 1e-12)));

  Eigen::MatrixXd basis(3, 31), mix(3, 3);
  for (Eigen::Index i = 0; i < basis.size(); ++i) basis.data()[i] = 0.1 + 0.9 * u(rng);
  for (Eigen::Index i = 0; i < mix.size(); ++i) mix.data()[i] = 0.2 + 0.8 * u(rng);
  const auto basis_pairs = planted(basis.transpose() * mix);
  recon::BasisFitOptions opt;
  opt.k = 3;
  opt.lambda = 1e-12;
  const double basis_err = worst_mrae(basis_pairs, recon::make_reconstructor(recon::fit_basis(basis_pairs, opt)));

  // Trace monotonicity on unstructured data.
  std::vector<recon::TrainingPair> noisy;
  for (int i = 0; i < 3; ++i) noisy.push_back({random_rgb(6, 6, rng), random_cube(6, 6, 31, rng, 0.05, 1.0)});
  recon::BasisFitOptions plain;
  plain.k = 6;
  plain.feature_order = 2;
  plain.lambda = 1e-4;
  plain.iterations = 20;
  const auto trace = recon::fit_basis(noisy, plain).objective_trace;
  bool monotone = trace.size() == 2 * plain.iterations - 1;
  for (std::size_t i = 1; i < trace.size(); ++i) monotone = monotone && trace[i] <= trace[i - 1] * (1 + 1e-12);

  return {lin_err < 1e-6 && basis_err < 1e-4 && monotone,
          "linear " + fmt("%.2e", lin_err) + ", basis " + fmt("%.2e", basis_err) + ", trace " +
              (monotone ? "non-increasing" : "increased") + " over " + std::to_string(trace.size()) + " half-steps"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool run_pipeline(const fs::path& dir, int jobs, std::string& error) {
  const std::string cli = HSBENCH_CLI_PATH;
  fs::create_directories(dir);
  const std::string d = dir.string();
  const std::string j = " --jobs " + std::to_string(jobs);
  std::vector<std::string> cmds{cli + " synth --out " + d + "/data --count 10 --train 6 --out-of-scope 1 "
                                      "--height 24 --width 24 --scene-seed 5"};
  for (const std::string track : {"clean", "real_world"}) {
    const std::string g = " --track " + track + " --seed 17 --shuffle-seed 3" + j;
    const std::string m = d + "/sim_" + track + "/manifest.jsonl";
    cmds.push_back(cli + g + " simulate --manifest " + d + "/data/manifest.jsonl --out " + d + "/sim_" + track);
    cmds.push_back(cli + g + " fit --manifest " + m + " --tag train --out " + d + "/lin_" + track + ".sbmd");
    cmds.push_back(cli + g + " fit --manifest " + m + " --tag train --kind basis --order 2 --k 6 --lambda 1e-6 --out " +
                   d + "/basis_" + track + ".sbmd");
    for (const std::string method : {"lin", "basis"})
      cmds.push_back(cli + g + " reconstruct --manifest " + m + " --tag test --method " + d + "/" + method + "_" +
                     track + ".sbmd --out " + d + "/rec_" + method + "_" + track);
    cmds.push_back(cli + g + " evaluate --manifest " + m + " --tag test --recon lin=" + d + "/rec_lin_" + track +
                   " --recon basis=" + d + "/rec_basis_" + track + " --aux lin=" + d + "/lin_" + track +
                   ".sbmd --out " + d + "/eval_" + track);
    cmds.push_back(cli + " report --leaderboard " + d + "/eval_" + track + "/leaderboard.csv --aux " + d + "/eval_" +
                   track + "/aux.csv --out " + d + "/report_" + track);
  }
  for (const auto& c : cmds) {
    const int rc = std::system((c + " >> " + d + "/log.txt 2>&1").c_str());
    if (rc != 0) {
      error = "command failed (" + std::to_string(rc) + "): " + c;
      return false;
    }
  }
  return true;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("hsbench_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::string error;
  const bool ran = run_pipeline(root / "a", 1, error) && run_pipeline(root / "b", 3, error);
  if (!ran) {
    fs::remove_all(root);
    return {false, error};
  }
  std::size_t compared = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    const auto ext = entry.path().extension();
    if (ext != ".csv" && ext != ".jpg" && ext != ".md" && ext != ".sbmd") continue;
    const auto rel = fs::relative(entry.path(), root / "a");
    ++compared;
    if (slurp(entry.path()) != slurp(root / "b" / rel)) ++differing;
  }
  fs::remove_all(root);
  return {compared > 0 && differing == 0, std::to_string(compared) + " CSV/JPEG/Markdown/model files compared across "
                                              "--jobs 1 and 3, " + std::to_string(differing) + " differ"};
}

Outcome round_trips() {
  std::mt19937_64 rng(12);
  std::size_t cube_bad = 0, model_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto cube = random_cube(1 + rng() % 9, 1 + rng() % 9, 1 + rng() % 31, rng, -10.0, 10.0, true);
    if (!(io::decode_cube(io::encode_cube(cube)) == cube)) ++cube_bad;

    const int order = 1 + static_cast<int>(rng() % 2);
    const auto f = static_cast<Eigen::Index>(recon::feature_count(order));
    const std::size_t bands = 1 + rng() % 31;
    std::normal_distribution<double> g;
    recon::Model model;
    if (rng() % 2 == 0) {
      recon::LinearModel m{order, std::abs(g(rng)), {400.0 + i, 10.0, bands}, Eigen::MatrixXd(bands, f)};
      for (Eigen::Index k = 0; k < m.weights.size(); ++k) m.weights.data()[k] = g(rng);
      model = m;
    } else {
      recon::BasisModel m;
      m.feature_order = order;
      m.ridge_lambda = std::abs(g(rng));
      m.grid = {380.0, 5.0, bands};
      const auto k = static_cast<Eigen::Index>(1 + rng() % bands);
      m.basis.resize(k, static_cast<Eigen::Index>(bands));
      m.weight_map.resize(k, f);
      for (Eigen::Index q = 0; q < m.basis.size(); ++q) m.basis.data()[q] = g(rng);
      for (Eigen::Index q = 0; q < m.weight_map.size(); ++q) m.weight_map.data()[q] = g(rng);
      for (std::size_t t = 0; t < rng() % 8; ++t) m.objective_trace.push_back(g(rng));
      model = m;
    }
    const auto bytes = recon::encode_model(model);
    if (!(recon::decode_model(bytes) == model) || recon::encode_model(recon::decode_model(bytes)) != bytes)
      ++model_bad;
  }
  return {cube_bad == 0 && model_bad == 0, "1000 cubes (" + std::to_string(cube_bad) + " mismatched), 1000 models (" +
                                               std::to_string(model_bad) + " mismatched)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric oracle equivalence", metric_oracle},
      {"MRAE/RMSE hand fixtures", hand_fixtures},
      {"pipeline linearity", linearity},
      {"pseudoinverse consistency", pinv_consistency},
      {"shuffle invariance", shuffle_invariance},
      {"exposure invariance", exposure_invariance},
      {"noise statistics", noise_statistics},
      {"track ordering", track_ordering},
      {"weighted MRAE", weighted_mrae},
      {"recovery on planted data", recovery},
      {"end-to-end determinism", determinism},
      {"format round-trips", round_trips},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s [%02zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
