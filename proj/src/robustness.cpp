#include "hsbench/robustness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hsbench/rng.hpp"

namespace hsbench::robustness {

ShuffleSpec identity_shuffle(std::size_t height, std::size_t width, std::size_t patch) {
  if (patch < 1) throw std::invalid_argument("patch size must be >= 1");
  if (patch > std::min(height, width))
    throw std::invalid_argument("patch size " + std::to_string(patch) + " exceeds image size " +
                                std::to_string(height) + "x" + std::to_string(width));
  ShuffleSpec spec;
  spec.patch = patch;
  spec.patch_rows = height / patch;
  spec.patch_cols = width / patch;
  spec.permutation.resize(spec.patch_rows * spec.patch_cols);
  std::iota(spec.permutation.begin(), spec.permutation.end(), 0);
  return spec;
}

ShuffleSpec make_shuffle(std::size_t height, std::size_t width, std::size_t patch, std::uint64_t seed) {
  ShuffleSpec spec = identity_shuffle(height, width, patch);
  spec.seed = seed;
  rng::CounterStream stream(seed, 0);
  auto& perm = spec.permutation;
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[stream.below(i)]);
  return spec;
}

ShuffleSpec inverse(const ShuffleSpec& spec) {
  ShuffleSpec out = spec;
  for (std::size_t d = 0; d < spec.permutation.size(); ++d) out.permutation[spec.permutation[d]] = d;
  return out;
}

namespace {

ShuffleSpec resolve(ShuffleSpec spec, std::size_t height, std::size_t width) {
  if (spec.permutation.empty()) return make_shuffle(height, width, spec.patch, spec.seed);
  const ShuffleSpec shape = identity_shuffle(height, width, spec.patch);
  if (spec.permutation.size() != shape.permutation.size() || spec.patch_rows != shape.patch_rows ||
      spec.patch_cols != shape.patch_cols)
    throw std::invalid_argument("shuffle spec was built for a different image size");
  std::vector<bool> seen(spec.permutation.size(), false);
  for (std::size_t s : spec.permutation) {
    if (s >= seen.size() || seen[s]) throw std::invalid_argument("shuffle permutation is not a bijection");
    seen[s] = true;
  }
  return spec;
}

// source pixel for every destination pixel
std::vector<std::size_t> pixel_map(const ShuffleSpec& spec, std::size_t height, std::size_t width) {
  std::vector<std::size_t> map(height * width);
  std::iota(map.begin(), map.end(), 0);
  const std::size_t p = spec.patch;
  for (std::size_t d = 0; d < spec.permutation.size(); ++d) {
    const std::size_t s = spec.permutation[d];
    const std::size_t dr = (d / spec.patch_cols) * p, dc = (d % spec.patch_cols) * p;
    const std::size_t sr = (s / spec.patch_cols) * p, sc = (s % spec.patch_cols) * p;
    for (std::size_t y = 0; y < p; ++y)
      for (std::size_t x = 0; x < p; ++x) map[(dr + y) * width + dc + x] = (sr + y) * width + sc + x;
  }
  return map;
}

}  // namespace

std::pair<HsiCube, ShuffleSpec> shuffle_patches(const HsiCube& cube, ShuffleSpec spec) {
  spec = resolve(std::move(spec), cube.height(), cube.width());
  const auto map = pixel_map(spec, cube.height(), cube.width());
  HsiCube out(cube.height(), cube.width(), cube.grid());
  for (std::size_t b = 0; b < cube.bands(); ++b) {
    const auto src = cube.band(b);
    auto dst = out.band(b);
    for (std::size_t i = 0; i < map.size(); ++i) dst[i] = src[map[i]];
  }
  return {std::move(out), std::move(spec)};
}

std::pair<RgbImage, ShuffleSpec> shuffle_patches(const RgbImage& image, ShuffleSpec spec) {
  spec = resolve(std::move(spec), image.height(), image.width());
  const auto map = pixel_map(spec, image.height(), image.width());
  RgbImage out(image.height(), image.width());
  for (std::size_t i = 0; i < map.size(); ++i)
    for (std::size_t ch = 0; ch < 3; ++ch) out.data()[3 * i + ch] = image.data()[3 * map[i] + ch];
  return {std::move(out), std::move(spec)};
}

std::pair<HsiCube, HsiCube> brightness_variants(const HsiCube& cube) {
  return {scale_cube(cube, 0.5), scale_cube(cube, 2.0)};
}

std::string to_string(Track track) { return track == Track::kClean ? "clean" : "real_world"; }

Track parse_track(const std::string& name) {
  if (name == "clean") return Track::kClean;
  if (name == "real_world" || name == "real-world") return Track::kRealWorld;
  throw std::invalid_argument("unknown track '" + name + "' (expected clean or real_world)");
}

RgbImage make_track_input(const HsiCube& cube, const CameraResponse& css, const TrackConfig& track) {
  if (track.track == Track::kClean) return camera::simulate_clean(cube, css);
  return camera::simulate_real_world(cube, css, track.real_world).normalized();
}

RgbImage linear_rgb_of_input(const RgbImage& input, const TrackConfig& track) {
  if (track.track == Track::kClean) return input;
  return scale_rgb(input, track.real_world.white_level);
}

const char* column_key(AuxColumn column) {
  switch (column) {
    case AuxColumn::kBaseline: return "baseline";
    case AuxColumn::kOutOfScope: return "out_of_scope";
    case AuxColumn::kSpatial: return "spatial";
    case AuxColumn::kBrightnessHalf: return "brightness_x0.5";
    case AuxColumn::kBrightnessDouble: return "brightness_x2";
    case AuxColumn::kPhysical: return "physical";
    case AuxColumn::kWeighted: return "weighted";
  }
  return "";
}

const char* column_title(AuxColumn column) {
  switch (column) {
    case AuxColumn::kBaseline: return "MRAE";
    case AuxColumn::kOutOfScope: return "Out-of-Scope";
    case AuxColumn::kSpatial: return "Spatial";
    case AuxColumn::kBrightnessHalf: return "Brightness×0.5";
    case AuxColumn::kBrightnessDouble: return "Brightness×2";
    case AuxColumn::kPhysical: return "Physical";
    case AuxColumn::kWeighted: return "Weighted";
  }
  return "";
}

std::optional<double> AuxReport::column_mean(AuxColumn column) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& row : rows) {
    if (!row.error.empty() || !row[column]) continue;
    sum += *row[column];
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

bool AuxReport::has_errors() const {
  return std::any_of(rows.begin(), rows.end(), [](const AuxRow& r) { return !r.error.empty(); });
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < jobs; ++t)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

TrackConfig for_scene(const TrackConfig& base, const std::string& id) {
  TrackConfig out = base;
  out.real_world.noise.seed = rng::derive_seed(base.real_world.noise.seed, id);
  return out;
}

namespace {

HsiCube checked(const recon::Reconstructor& r, const RgbImage& input, const HsiCube& reference) {
  HsiCube out = r(input);
  if (!out.same_shape(reference))
    throw std::runtime_error("reconstruction is " + std::to_string(out.height()) + "x" + std::to_string(out.width()) +
                             "x" + std::to_string(out.bands()) + ", expected " + std::to_string(reference.height()) +
                             "x" + std::to_string(reference.width()) + "x" + std::to_string(reference.bands()));
  return out;
}

AuxRow evaluate_scene(const SceneInput& scene, const recon::Reconstructor& reconstructor, const CameraResponse& css,
                      const AuxConfig& cfg) {
  AuxRow row;
  row.scene = scene.id;
  try {
    const TrackConfig track = for_scene(cfg.track, scene.id);
    const HsiCube& gt = scene.cube;
    const RgbImage input = make_track_input(gt, css, track);
    const HsiCube rec = checked(reconstructor, input, gt);
    row[AuxColumn::kBaseline] = metrics::mrae(gt, rec, cfg.metric);
    if (scene.out_of_scope) row[AuxColumn::kOutOfScope] = row[AuxColumn::kBaseline];

    ShuffleSpec spec;
    spec.patch = cfg.shuffle_patch;
    spec.seed = rng::derive_seed(cfg.shuffle_seed, scene.id);
    auto [shuffled_input, used] = shuffle_patches(input, spec);
    const HsiCube shuffled_gt = shuffle_patches(gt, used).first;
    row[AuxColumn::kSpatial] = metrics::mrae(shuffled_gt, checked(reconstructor, shuffled_input, gt), cfg.metric);

    const auto [half, twice] = brightness_variants(gt);
    row[AuxColumn::kBrightnessHalf] =
        metrics::mrae(half, checked(reconstructor, make_track_input(half, css, track), gt), cfg.metric);
    row[AuxColumn::kBrightnessDouble] =
        metrics::mrae(twice, checked(reconstructor, make_track_input(twice, css, track), gt), cfg.metric);

    row[AuxColumn::kPhysical] =
        metrics::physical_consistency(rec, css, linear_rgb_of_input(input, track), cfg.metric);
    row[AuxColumn::kWeighted] = metrics::weighted_mrae(gt, rec, cfg.metric);
  } catch (const std::exception& e) {
    row.values = {};
    row.error = e.what();
    if (row.error.empty()) row.error = "unknown error";
  }
  return row;
}

}  // namespace

AuxReport run_aux_suite(const std::vector<SceneInput>& scenes, const recon::Reconstructor& reconstructor,
                        const CameraResponse& css, const AuxConfig& cfg, const std::string& method) {
  cfg.metric.validate();
  AuxReport report;
  report.method = method;
  report.track = cfg.track.track;
  report.rows.resize(scenes.size());
  parallel_for(scenes.size(), cfg.jobs,
               [&](std::size_t i) { report.rows[i] = evaluate_scene(scenes[i], reconstructor, css, cfg); });
  return report;
}

std::vector<SceneInput> load_scenes(const io::Manifest& manifest) {
  std::vector<SceneInput> scenes;
  for (const auto& rec : manifest.records) {
    if (!rec.cube_path) throw std::invalid_argument("scene '" + rec.id + "' has no cube");
    scenes.push_back({rec.id, io::read_cube(manifest.resolve(*rec.cube_path)), rec.has_tag("out_of_scope")});
  }
  return scenes;
}

AuxReport run_aux_suite(const io::Manifest& scenes, const recon::Reconstructor& reconstructor,
                        const CameraResponse& css, const AuxConfig& cfg, const std::string& method) {
  return run_aux_suite(load_scenes(scenes), reconstructor, css, cfg, method);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr AuxColumn kAllColumns[kAuxColumns] = {AuxColumn::kBaseline,       AuxColumn::kOutOfScope,
                                                AuxColumn::kSpatial,        AuxColumn::kBrightnessHalf,
                                                AuxColumn::kBrightnessDouble, AuxColumn::kPhysical,
                                                AuxColumn::kWeighted};

std::string num(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c == '\n' ? ' ' : c);
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string pad(const std::string& s, std::size_t width, bool left) {
  // Column widths count code points so "×" aligns.
  std::size_t cps = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++cps;
  const std::string fill(width > cps ? width - cps : 0, ' ');
  return left ? s + fill : fill + s;
}

}  // namespace

std::string aux_to_csv(const std::vector<AuxReport>& reports, const std::string& config_hash) {
  std::string out = "method,track,scene";
  for (auto c : kAllColumns) out += std::string(",") + column_key(c);
  out += ",error,config_hash\n";
  for (const auto& report : reports)
    for (const auto& row : report.rows) {
      out += csv_escape(report.method) + "," + to_string(report.track) + "," + csv_escape(row.scene);
      for (auto c : kAllColumns) out += "," + (row[c] ? num(*row[c], "%.10g") : std::string());
      out += "," + csv_escape(row.error) + "," + config_hash + "\n";
    }
  return out;
}

std::vector<AuxReport> aux_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("aux csv is empty");
  const auto header = csv_split(line);
  if (header.size() != kAuxColumns + 5 || header[0] != "method" || header[1] != "track" || header[2] != "scene")
    throw std::invalid_argument("aux csv has an unexpected header");
  for (std::size_t i = 0; i < kAuxColumns; ++i)
    if (header[3 + i] != column_key(kAllColumns[i])) throw std::invalid_argument("aux csv column order mismatch");
  std::vector<AuxReport> reports;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = csv_split(line);
    if (cells.size() != header.size()) throw std::invalid_argument("aux csv row has wrong column count");
    const Track track = parse_track(cells[1]);
    auto it = std::find_if(reports.begin(), reports.end(),
                           [&](const AuxReport& r) { return r.method == cells[0] && r.track == track; });
    if (it == reports.end()) {
      reports.push_back({cells[0], track, {}});
      it = reports.end() - 1;
    }
    AuxRow row;
    row.scene = cells[2];
    for (std::size_t i = 0; i < kAuxColumns; ++i)
      if (!cells[3 + i].empty()) row.values[i] = std::stod(cells[3 + i]);
    row.error = cells[3 + kAuxColumns];
    it->rows.push_back(std::move(row));
  }
  return reports;
}

std::string aux_to_text(const std::vector<AuxReport>& reports) {
  std::string out;
  for (Track track : {Track::kClean, Track::kRealWorld}) {
    std::vector<const AuxReport*> block;
    for (const auto& r : reports)
      if (r.track == track) block.push_back(&r);
    if (block.empty()) continue;
    std::size_t name_w = 6;
    for (const auto* r : block) name_w = std::max(name_w, r->method.size());
    out += "Track: " + to_string(track) + "\n";
    out += pad("Method", name_w, true);
    for (std::size_t i = 1; i < kAuxColumns; ++i) out += "  " + pad(column_title(kAllColumns[i]), 14, false);
    out += "\n";
    for (const auto* r : block) {
      out += pad(r->method, name_w, true);
      for (std::size_t i = 1; i < kAuxColumns; ++i) {
        const auto mean = r->column_mean(kAllColumns[i]);
        out += "  " + pad(mean ? num(*mean, "%.5f") : std::string("-"), 14, false);
      }
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

}  // namespace hsbench::robustness
