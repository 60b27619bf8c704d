#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hsbench/camera.hpp"
#include "hsbench/core.hpp"
#include "hsbench/io.hpp"
#include "hsbench/metrics.hpp"
#include "hsbench/recon.hpp"
#include "hsbench/robustness.hpp"

namespace hsbench::bench {

namespace fs = std::filesystem;
using robustness::Track;

struct RunConfig {
  Track track = Track::kClean;
  /// Empty selects the built-in sensitivity curves.
  fs::path css_path;
  camera::NoiseParams noise;
  int jpeg_quality = io::kDefaultJpegQuality;
  /// Unset: 99.9th percentile of the clean RGB of the `white_level_tag` scenes
  /// (all scenes when none carry the tag).
  std::optional<double> white_level;
  std::string white_level_tag = "train";
  std::size_t shuffle_patch = 4;
  std::uint64_t shuffle_seed = 0;
  metrics::MetricConfig metric;
  /// Pool every entry of every scene instead of averaging per-scene MRAE.
  bool pooled = false;
  std::size_t jobs = 1;

  void validate() const;
};

CameraResponse load_css(const RunConfig& cfg);

std::string sha256_hex(std::string_view data);
std::string css_hash(const CameraResponse& css);
/// Stable `key=value` lines covering every setting that affects results.
/// Paths and the worker count are excluded; the CSS enters by content hash.
std::string canonical_config(const RunConfig& cfg, const CameraResponse& css);
std::string config_hash(const RunConfig& cfg, const CameraResponse& css);

struct SceneFailure {
  std::string scene;
  std::string message;
};

/// Track input of a manifest record: the lossless clean RGB, or the decoded
/// real-world image divided by 255.
RgbImage load_track_input(const io::Manifest& manifest, const io::SceneRecord& record, Track track);

// simulate -----------------------------------------------------------------

struct SimulateResult {
  io::Manifest manifest;  // successful scenes, with RGB paths filled in
  double white_level = 1.0;
  std::vector<SceneFailure> failures;
};

/// Writes `<id>_clean.rgb` (BHSC) or `<id>_real.jpg` per scene for the
/// configured track, `manifest.jsonl` and the `simulate.json` sidecar.
/// The per-scene noise seed is derived from the base seed and the scene id.
SimulateResult simulate(const RunConfig& cfg, const io::Manifest& scenes, const fs::path& out_dir);

/// White level recorded by simulate next to a manifest, if any.
std::optional<double> sidecar_white_level(const fs::path& dir);

// fit ----------------------------------------------------------------------

enum class ModelKind { kLinear, kBasis };
ModelKind parse_model_kind(const std::string& name);

struct FitOptions {
  ModelKind kind = ModelKind::kLinear;
  int feature_order = 1;
  double lambda = 1e-8;
  std::size_t k = 10;
  std::size_t iterations = 10;
  recon::BasisObjective objective = recon::BasisObjective::kPlain;
  /// Empty: every scene.
  std::string tag;
};

struct FitResult {
  recon::Model model;
  double training_mrae = 0.0;
  std::size_t scenes = 0;
};

FitResult fit(const RunConfig& cfg, const io::Manifest& scenes, const FitOptions& options);
/// JSON sidecar for a saved model.
std::string fit_sidecar(const RunConfig& cfg, const CameraResponse& css, const FitOptions& options,
                        const FitResult& result);

// reconstruct --------------------------------------------------------------

/// "pinv" for the CSS pseudoinverse, otherwise an SBMD model path.
recon::Reconstructor load_method(const RunConfig& cfg, const CameraResponse& css, const std::string& spec);

struct ReconstructResult {
  std::size_t written = 0;
  std::vector<SceneFailure> failures;
};

/// Writes `<id>.bhsc` per scene.
ReconstructResult reconstruct(const RunConfig& cfg, const io::Manifest& scenes, const recon::Reconstructor& method,
                              const fs::path& out_dir);

// evaluate / report --------------------------------------------------------

struct LeaderboardRow {
  std::string method;
  Track track = Track::kClean;
  double mrae = 0.0;
  double rmse = 0.0;
  std::size_t scenes = 0;
  std::size_t rank = 0;
};

struct Leaderboard {
  std::vector<LeaderboardRow> rows;
  std::string config_hash;

  /// Orders each track by MRAE, then RMSE, then name, and assigns ranks
  /// 1..n per track. Tracks keep clean before real_world.
  void rank();
};

struct Submission {
  std::string method;
  fs::path recon_dir;
};

struct EvaluateResult {
  Leaderboard board;
  std::vector<SceneFailure> failures;  // scene field is "method/scene"
};

/// Scores every submission against the manifest cubes. Scenes with a
/// missing or mis-shaped reconstruction are reported and left out of the
/// means.
EvaluateResult evaluate(const RunConfig& cfg, const io::Manifest& scenes, const std::vector<Submission>& submissions);

/// Auxiliary suite for one method on the configured track.
robustness::AuxReport evaluate_aux(const RunConfig& cfg, const io::Manifest& scenes,
                                   const recon::Reconstructor& method, const std::string& name);

std::string leaderboard_to_csv(const Leaderboard& board);
Leaderboard leaderboard_from_csv(const std::string& text);
std::string leaderboard_to_text(const Leaderboard& board);
std::string leaderboard_to_markdown(const Leaderboard& board);
/// Per-method column means in the auxiliary table order.
std::string aux_to_markdown(const std::vector<robustness::AuxReport>& reports);

/// Markdown report: leaderboard per track, then the auxiliary tables if any.
std::string render_report(const Leaderboard& board, const std::vector<robustness::AuxReport>& aux);

}  // namespace hsbench::bench
