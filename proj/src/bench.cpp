#include "hsbench/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <openssl/evp.h>

#include "hsbench/synth.hpp"
#include "json.hpp"

namespace hsbench::bench {

using json = nlohmann::json;

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string exact(double v) { return fmt("%.17g", v); }

fs::path relative_to(const fs::path& target, const fs::path& base) {
  const fs::path abs_target = fs::absolute(target).lexically_normal();
  const fs::path rel = abs_target.lexically_relative(fs::absolute(base).lexically_normal());
  return rel.empty() ? abs_target : rel;
}

std::vector<std::string> split_csv(const std::string& line) {
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
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string pad_left(const std::string& s, std::size_t width) {
  std::size_t cps = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++cps;
  return std::string(width > cps ? width - cps : 0, ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s + std::string(width > s.size() ? width - s.size() : 0, ' ');
}

robustness::TrackConfig track_config(const RunConfig& cfg) {
  robustness::TrackConfig tc;
  tc.track = cfg.track;
  tc.real_world.noise = cfg.noise;
  tc.real_world.jpeg_quality = cfg.jpeg_quality;
  tc.real_world.white_level = cfg.white_level.value_or(1.0);
  return tc;
}

}  // namespace

void RunConfig::validate() const {
  noise.validate();
  metric.validate();
  if (jpeg_quality < 1 || jpeg_quality > 100) throw std::invalid_argument("jpeg quality must be in [1, 100]");
  if (white_level && !(*white_level > 0.0 && std::isfinite(*white_level)))
    throw std::invalid_argument("white level must be positive and finite");
  if (shuffle_patch < 1) throw std::invalid_argument("shuffle patch must be >= 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
}

CameraResponse load_css(const RunConfig& cfg) {
  return cfg.css_path.empty() ? synth::default_css() : io::read_css(cfg.css_path);
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string css_hash(const CameraResponse& css) { return sha256_hex(io::format_css(css)); }

std::string canonical_config(const RunConfig& cfg, const CameraResponse& css) {
  std::ostringstream s;
  s << "format=hsbench-config-1\n"
    << "track=" << robustness::to_string(cfg.track) << "\n"
    << "css_sha256=" << css_hash(css) << "\n"
    << "photon_gain=" << exact(cfg.noise.photon_gain) << "\n"
    << "dark_sigma=" << exact(cfg.noise.dark_sigma) << "\n"
    << "noise_seed=" << cfg.noise.seed << "\n"
    << "jpeg_quality=" << cfg.jpeg_quality << "\n"
    << "jpeg_subsampling=4:2:0\n"
    << "white_level=" << (cfg.white_level ? exact(*cfg.white_level) : std::string("auto")) << "\n"
    << "white_level_tag=" << cfg.white_level_tag << "\n"
    << "shuffle_patch=" << cfg.shuffle_patch << "\n"
    << "shuffle_seed=" << cfg.shuffle_seed << "\n"
    << "denom_floor=" << exact(cfg.metric.denom_floor) << "\n"
    << "cluster_count=" << cfg.metric.cluster_count << "\n"
    << "cluster_seed=" << cfg.metric.cluster_seed << "\n"
    << "cluster_iterations=" << cfg.metric.cluster_iterations << "\n"
    << "tau=" << exact(cfg.metric.tau) << "\n"
    << "aggregation=" << (cfg.pooled ? "pooled" : "per_scene") << "\n";
  return s.str();
}

std::string config_hash(const RunConfig& cfg, const CameraResponse& css) {
  return sha256_hex(canonical_config(cfg, css));
}

RgbImage load_track_input(const io::Manifest& manifest, const io::SceneRecord& record, Track track) {
  if (track == Track::kClean) {
    if (!record.rgb_clean_path) throw std::runtime_error("no clean RGB for scene '" + record.id + "'");
    return io::read_rgb(manifest.resolve(*record.rgb_clean_path));
  }
  if (!record.rgb_real_path) throw std::runtime_error("no real-world RGB for scene '" + record.id + "'");
  return io::read_rgb8(manifest.resolve(*record.rgb_real_path)).normalized();
}

// ---------------------------------------------------------------------------

SimulateResult simulate(const RunConfig& cfg, const io::Manifest& scenes, const fs::path& out_dir) {
  cfg.validate();
  const CameraResponse css = load_css(cfg);
  const std::string hash = config_hash(cfg, css);
  const std::size_t n = scenes.records.size();

  std::vector<std::optional<HsiCube>> cubes(n);
  std::vector<std::string> errors(n);
  robustness::parallel_for(n, cfg.jobs, [&](std::size_t i) {
    const auto& rec = scenes.records[i];
    try {
      if (!rec.cube_path) throw std::runtime_error("scene has no cube");
      cubes[i] = io::read_cube(scenes.resolve(*rec.cube_path));
      if (!cubes[i]->grid().matches(css.grid())) throw std::runtime_error("cube grid does not match the CSS grid");
    } catch (const std::exception& e) {
      cubes[i].reset();
      errors[i] = e.what();
    }
  });

  SimulateResult result;
  if (cfg.white_level) {
    result.white_level = *cfg.white_level;
  } else {
    std::vector<HsiCube> reference;
    for (std::size_t i = 0; i < n; ++i)
      if (cubes[i] && scenes.records[i].has_tag(cfg.white_level_tag)) reference.push_back(*cubes[i]);
    if (reference.empty())
      for (const auto& c : cubes)
        if (c) reference.push_back(*c);
    result.white_level = reference.empty() ? 1.0 : camera::default_white_level(reference, css);
  }

  robustness::TrackConfig base = track_config(cfg);
  base.real_world.white_level = result.white_level;
  std::vector<std::uint64_t> seeds(n);
  std::vector<std::string> files(n);
  fs::create_directories(out_dir);
  robustness::parallel_for(n, cfg.jobs, [&](std::size_t i) {
    if (!cubes[i]) return;
    const auto& rec = scenes.records[i];
    try {
      const robustness::TrackConfig tc = robustness::for_scene(base, rec.id);
      seeds[i] = tc.real_world.noise.seed;
      if (cfg.track == Track::kClean) {
        files[i] = rec.id + "_clean.rgb";
        io::write_rgb(camera::simulate_clean(*cubes[i], css), out_dir / files[i]);
      } else {
        files[i] = rec.id + "_real.jpg";
        const Rgb8Image pre = camera::simulate_real_world_prejpeg(*cubes[i], css, tc.real_world);
        io::write_file(out_dir / files[i], io::encode_jpeg(pre, cfg.jpeg_quality, "hsbench config " + hash));
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  result.manifest.root = out_dir;
  json sidecar_scenes = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = scenes.records[i];
    if (!errors[i].empty()) {
      result.failures.push_back({rec.id, errors[i]});
      continue;
    }
    io::SceneRecord out = rec;
    out.cube_path = relative_to(scenes.resolve(*rec.cube_path), out_dir);
    if (rec.rgb_clean_path) out.rgb_clean_path = relative_to(scenes.resolve(*rec.rgb_clean_path), out_dir);
    if (rec.rgb_real_path) out.rgb_real_path = relative_to(scenes.resolve(*rec.rgb_real_path), out_dir);
    (cfg.track == Track::kClean ? out.rgb_clean_path : out.rgb_real_path) = files[i];
    result.manifest.records.push_back(std::move(out));
    sidecar_scenes.push_back({{"id", rec.id}, {"file", files[i]}, {"noise_seed", seeds[i]}});
  }
  io::save_manifest(result.manifest, out_dir / "manifest.jsonl");

  json failures = json::array();
  for (const auto& f : result.failures) failures.push_back({{"id", f.scene}, {"error", f.message}});
  const json sidecar = {
      {"config_hash", hash},
      {"track", robustness::to_string(cfg.track)},
      {"seed", cfg.noise.seed},
      {"photon_gain", cfg.noise.photon_gain},
      {"dark_sigma", cfg.noise.dark_sigma},
      {"jpeg_quality", cfg.jpeg_quality},
      {"jpeg_subsampling", "4:2:0"},
      {"white_level", result.white_level},
      {"white_level_source", cfg.white_level ? "config" : "p99.9 of clean RGB"},
      {"css_sha256", css_hash(css)},
      {"scenes", sidecar_scenes},
      {"failures", failures},
  };
  io::write_text(out_dir / "simulate.json", sidecar.dump(2) + "\n");
  return result;
}

std::optional<double> sidecar_white_level(const fs::path& dir) {
  const fs::path path = dir / "simulate.json";
  if (!fs::exists(path)) return std::nullopt;
  const auto bytes = io::read_file(path);
  const json j = json::parse(bytes.begin(), bytes.end());
  if (!j.contains("white_level")) return std::nullopt;
  return j.at("white_level").get<double>();
}

// ---------------------------------------------------------------------------

ModelKind parse_model_kind(const std::string& name) {
  if (name == "linear") return ModelKind::kLinear;
  if (name == "basis") return ModelKind::kBasis;
  throw std::invalid_argument("unknown model kind '" + name + "' (expected linear or basis)");
}

FitResult fit(const RunConfig& cfg, const io::Manifest& scenes, const FitOptions& options) {
  cfg.validate();
  const CameraResponse css = load_css(cfg);
  const io::Manifest chosen = options.tag.empty() ? scenes : io::filter_by_tag(scenes, options.tag);
  if (chosen.records.empty())
    throw std::invalid_argument(options.tag.empty() ? "no training scenes"
                                                    : "no training scenes tagged '" + options.tag + "'");
  std::vector<recon::TrainingPair> pairs(chosen.records.size());
  robustness::parallel_for(pairs.size(), cfg.jobs, [&](std::size_t i) {
    const auto& rec = chosen.records[i];
    if (!rec.cube_path) throw std::runtime_error("training scene '" + rec.id + "' has no cube");
    pairs[i] = {load_track_input(chosen, rec, cfg.track), io::read_cube(chosen.resolve(*rec.cube_path))};
  });

  FitResult result;
  result.scenes = pairs.size();
  if (options.kind == ModelKind::kLinear) {
    result.model = recon::fit_linear(pairs, options.feature_order, options.lambda);
  } else {
    recon::BasisFitOptions b;
    b.k = options.k;
    b.feature_order = options.feature_order;
    b.lambda = options.lambda;
    b.iterations = options.iterations;
    b.objective = options.objective;
    b.tau = cfg.metric.tau;
    if (options.objective == recon::BasisObjective::kCssPrior) b.css = css;
    result.model = recon::fit_basis(pairs, b);
  }
  const recon::Reconstructor predict = recon::make_reconstructor(result.model);
  double sum = 0.0;
  for (const auto& p : pairs) sum += metrics::mrae(p.target, predict(p.input), cfg.metric);
  result.training_mrae = sum / static_cast<double>(pairs.size());
  return result;
}

std::string fit_sidecar(const RunConfig& cfg, const CameraResponse& css, const FitOptions& options,
                        const FitResult& result) {
  json j = {
      {"config_hash", config_hash(cfg, css)},
      {"kind", options.kind == ModelKind::kLinear ? "linear" : "basis"},
      {"feature_order", options.feature_order},
      {"lambda", options.lambda},
      {"track", robustness::to_string(cfg.track)},
      {"tag", options.tag},
      {"scenes", result.scenes},
      {"training_mrae", result.training_mrae},
  };
  if (const auto* b = std::get_if<recon::BasisModel>(&result.model)) {
    j["k"] = b->k();
    j["iterations"] = options.iterations;
    j["objective"] = options.objective == recon::BasisObjective::kPlain ? "plain" : "css_prior";
    j["objective_trace"] = b->objective_trace;
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

recon::Reconstructor load_method(const RunConfig& cfg, const CameraResponse& css, const std::string& spec) {
  if (spec == "pinv")
    return recon::make_pseudoinverse_reconstructor(css,
                                                   cfg.track == Track::kClean ? 1.0 : cfg.white_level.value_or(1.0));
  return recon::make_reconstructor(recon::load_model(spec));
}

ReconstructResult reconstruct(const RunConfig& cfg, const io::Manifest& scenes, const recon::Reconstructor& method,
                              const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  const std::size_t n = scenes.records.size();
  std::vector<std::string> errors(n);
  robustness::parallel_for(n, cfg.jobs, [&](std::size_t i) {
    const auto& rec = scenes.records[i];
    try {
      const RgbImage input = load_track_input(scenes, rec, cfg.track);
      const HsiCube out = method(input);
      if (out.height() != input.height() || out.width() != input.width())
        throw std::runtime_error("reconstruction size differs from the input");
      io::write_cube(out, out_dir / (rec.id + ".bhsc"));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  ReconstructResult result;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i].empty())
      ++result.written;
    else
      result.failures.push_back({scenes.records[i].id, errors[i]});
  }
  return result;
}

// ---------------------------------------------------------------------------

void Leaderboard::rank() {
  std::stable_sort(rows.begin(), rows.end(), [](const LeaderboardRow& a, const LeaderboardRow& b) {
    return std::tie(a.track, a.mrae, a.rmse, a.method) < std::tie(b.track, b.mrae, b.rmse, b.method);
  });
  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i].rank = (i > 0 && rows[i - 1].track == rows[i].track) ? rows[i - 1].rank + 1 : 1;
}

EvaluateResult evaluate(const RunConfig& cfg, const io::Manifest& scenes, const std::vector<Submission>& submissions) {
  cfg.validate();
  const CameraResponse css = load_css(cfg);
  const std::size_t n = scenes.records.size();

  std::vector<std::optional<HsiCube>> gt(n);
  std::vector<std::string> gt_error(n);
  robustness::parallel_for(n, cfg.jobs, [&](std::size_t i) {
    const auto& rec = scenes.records[i];
    try {
      if (!rec.cube_path) throw std::runtime_error("scene has no ground-truth cube");
      gt[i] = io::read_cube(scenes.resolve(*rec.cube_path));
    } catch (const std::exception& e) {
      gt_error[i] = e.what();
    }
  });

  EvaluateResult result;
  result.board.config_hash = config_hash(cfg, css);
  for (const auto& sub : submissions) {
    struct Score {
      double mrae = 0, rmse = 0, rel_sum = 0, sq_sum = 0;
      std::size_t entries = 0;
      std::string error;
    };
    std::vector<Score> scores(n);
    robustness::parallel_for(n, cfg.jobs, [&](std::size_t i) {
      Score& s = scores[i];
      if (!gt[i]) {
        s.error = gt_error[i];
        return;
      }
      try {
        const HsiCube rec = io::read_cube(sub.recon_dir / (scenes.records[i].id + ".bhsc"));
        if (!rec.same_shape(*gt[i]))
          throw std::runtime_error("reconstruction geometry " + std::to_string(rec.height()) + "x" +
                                   std::to_string(rec.width()) + "x" + std::to_string(rec.bands()) +
                                   " does not match ground truth");
        s.mrae = metrics::mrae(*gt[i], rec, cfg.metric);
        s.rmse = metrics::rmse(*gt[i], rec);
        s.entries = gt[i]->size();
        s.rel_sum = s.mrae * static_cast<double>(s.entries);
        s.sq_sum = s.rmse * s.rmse * static_cast<double>(s.entries);
      } catch (const std::exception& e) {
        s.error = e.what();
      }
    });
    LeaderboardRow row;
    row.method = sub.method;
    row.track = cfg.track;
    double rel = 0, sq = 0;
    std::size_t entries = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Score& s = scores[i];
      if (!s.error.empty()) {
        result.failures.push_back({sub.method + "/" + scenes.records[i].id, s.error});
        continue;
      }
      ++row.scenes;
      row.mrae += s.mrae;
      row.rmse += s.rmse;
      rel += s.rel_sum;
      sq += s.sq_sum;
      entries += s.entries;
    }
    if (row.scenes == 0) continue;
    if (cfg.pooled) {
      row.mrae = rel / static_cast<double>(entries);
      row.rmse = std::sqrt(sq / static_cast<double>(entries));
    } else {
      row.mrae /= static_cast<double>(row.scenes);
      row.rmse /= static_cast<double>(row.scenes);
    }
    result.board.rows.push_back(std::move(row));
  }
  result.board.rank();
  return result;
}

robustness::AuxReport evaluate_aux(const RunConfig& cfg, const io::Manifest& scenes,
                                   const recon::Reconstructor& method, const std::string& name) {
  cfg.validate();
  const CameraResponse css = load_css(cfg);
  const std::size_t n = scenes.records.size();
  std::vector<std::optional<robustness::SceneInput>> loaded(n);
  std::vector<std::string> errors(n);
  robustness::parallel_for(n, cfg.jobs, [&](std::size_t i) {
    const auto& rec = scenes.records[i];
    try {
      if (!rec.cube_path) throw std::runtime_error("scene has no ground-truth cube");
      loaded[i] = robustness::SceneInput{rec.id, io::read_cube(scenes.resolve(*rec.cube_path)),
                                         rec.has_tag("out_of_scope")};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::vector<robustness::SceneInput> inputs;
  for (auto& s : loaded)
    if (s) inputs.push_back(std::move(*s));

  robustness::AuxConfig aux;
  aux.track = track_config(cfg);
  aux.metric = cfg.metric;
  aux.shuffle_patch = cfg.shuffle_patch;
  aux.shuffle_seed = cfg.shuffle_seed;
  aux.jobs = cfg.jobs;
  robustness::AuxReport partial = robustness::run_aux_suite(inputs, method, css, aux, name);

  robustness::AuxReport report{name, cfg.track, {}};
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i].empty()) {
      report.rows.push_back(std::move(partial.rows[next++]));
    } else {
      robustness::AuxRow row;
      row.scene = scenes.records[i].id;
      row.error = errors[i];
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

std::string leaderboard_to_csv(const Leaderboard& board) {
  std::string out = "track,rank,method,mrae,rmse,scenes,config_hash\n";
  for (const auto& r : board.rows)
    out += robustness::to_string(r.track) + "," + std::to_string(r.rank) + "," + csv_field(r.method) + "," +
           fmt("%.10g", r.mrae) + "," + fmt("%.10g", r.rmse) + "," + std::to_string(r.scenes) + "," +
           board.config_hash + "\n";
  return out;
}

Leaderboard leaderboard_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split_csv(line) != std::vector<std::string>{"track", "rank", "method", "mrae",
                                                                              "rmse", "scenes", "config_hash"})
    throw std::invalid_argument("leaderboard csv has an unexpected header");
  Leaderboard board;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 7) throw std::invalid_argument("leaderboard csv row has wrong column count");
    LeaderboardRow row;
    row.track = robustness::parse_track(cells[0]);
    row.rank = std::stoul(cells[1]);
    row.method = cells[2];
    row.mrae = std::stod(cells[3]);
    row.rmse = std::stod(cells[4]);
    row.scenes = std::stoul(cells[5]);
    board.config_hash = cells[6];
    board.rows.push_back(std::move(row));
  }
  return board;
}

namespace {

template <typename Fn>
void for_each_track(const Leaderboard& board, Fn fn) {
  for (Track t : {Track::kClean, Track::kRealWorld}) {
    std::vector<const LeaderboardRow*> rows;
    for (const auto& r : board.rows)
      if (r.track == t) rows.push_back(&r);
    if (!rows.empty()) fn(t, rows);
  }
}

constexpr robustness::AuxColumn kTableColumns[] = {
    robustness::AuxColumn::kOutOfScope,       robustness::AuxColumn::kSpatial,
    robustness::AuxColumn::kBrightnessHalf,   robustness::AuxColumn::kBrightnessDouble,
    robustness::AuxColumn::kPhysical,         robustness::AuxColumn::kWeighted};

}  // namespace

std::string leaderboard_to_text(const Leaderboard& board) {
  std::string out;
  for_each_track(board, [&](Track t, const std::vector<const LeaderboardRow*>& rows) {
    std::size_t w = 6;
    for (const auto* r : rows) w = std::max(w, r->method.size());
    out += "Track: " + robustness::to_string(t) + "\n";
    out += "Rank  " + pad_right("Method", w) + "      MRAE      RMSE\n";
    for (const auto* r : rows)
      out += pad_left(std::to_string(r->rank), 4) + "  " + pad_right(r->method, w) + "  " +
             pad_left(fmt("%.5f", r->mrae), 8) + "  " + pad_left(fmt("%.5f", r->rmse), 8) + "\n";
    out += "\n";
  });
  return out;
}

std::string leaderboard_to_markdown(const Leaderboard& board) {
  std::string out;
  for_each_track(board, [&](Track t, const std::vector<const LeaderboardRow*>& rows) {
    out += "### Track: " + robustness::to_string(t) + "\n\n";
    out += "| Rank | Method | MRAE | RMSE |\n|---:|:---|---:|---:|\n";
    for (const auto* r : rows)
      out += "| " + std::to_string(r->rank) + " | " + r->method + " | " + fmt("%.5f", r->mrae) + " | " +
             fmt("%.5f", r->rmse) + " |\n";
    out += "\n";
  });
  return out;
}

std::string aux_to_markdown(const std::vector<robustness::AuxReport>& reports) {
  std::string out;
  for (Track t : {Track::kClean, Track::kRealWorld}) {
    std::vector<const robustness::AuxReport*> block;
    for (const auto& r : reports)
      if (r.track == t) block.push_back(&r);
    if (block.empty()) continue;
    out += "### Track: " + robustness::to_string(t) + "\n\n| Method |";
    for (auto c : kTableColumns) out += std::string(" ") + robustness::column_title(c) + " |";
    out += "\n|:---|";
    for (std::size_t i = 0; i < std::size(kTableColumns); ++i) out += "---:|";
    out += "\n";
    for (const auto* r : block) {
      out += "| " + r->method + " |";
      for (auto c : kTableColumns) {
        const auto mean = r->column_mean(c);
        out += " " + (mean ? fmt("%.5f", *mean) : std::string("-")) + " |";
      }
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

std::string render_report(const Leaderboard& board, const std::vector<robustness::AuxReport>& aux) {
  std::string out = "# Benchmark report\n\n";
  if (!board.config_hash.empty()) out += "Config hash: `" + board.config_hash + "`\n\n";
  out += "## Leaderboard\n\n";
  out += board.rows.empty() ? std::string("No scored methods.\n\n") : leaderboard_to_markdown(board);
  if (!aux.empty()) out += "## Auxiliary evaluations (mean MRAE)\n\n" + aux_to_markdown(aux);
  return out;
}

}  // namespace hsbench::bench
