#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hsbench/camera.hpp"
#include "hsbench/core.hpp"
#include "hsbench/io.hpp"
#include "hsbench/metrics.hpp"
#include "hsbench/recon.hpp"

namespace hsbench::robustness {

/// Relocation of square patches. `permutation[dst] = src` over the row-major
/// patch indices of the largest patch grid anchored at the top-left corner.
struct ShuffleSpec {
  std::size_t patch = 4;
  std::uint64_t seed = 0;
  std::vector<std::size_t> permutation;

  std::size_t patch_rows = 0;
  std::size_t patch_cols = 0;
};

/// Seeded Fisher-Yates permutation of the patch grid of an image.
ShuffleSpec make_shuffle(std::size_t height, std::size_t width, std::size_t patch, std::uint64_t seed);
ShuffleSpec identity_shuffle(std::size_t height, std::size_t width, std::size_t patch);
ShuffleSpec inverse(const ShuffleSpec& spec);

/// Moves patch permutation[d] to slot d. The strip beyond the patch grid is
/// untouched. An empty spec.permutation is derived from (patch, seed).
std::pair<HsiCube, ShuffleSpec> shuffle_patches(const HsiCube& cube, ShuffleSpec spec);
std::pair<RgbImage, ShuffleSpec> shuffle_patches(const RgbImage& image, ShuffleSpec spec);

/// (x0.5, x2) copies of the cube.
std::pair<HsiCube, HsiCube> brightness_variants(const HsiCube& cube);

enum class Track { kClean, kRealWorld };
std::string to_string(Track track);
Track parse_track(const std::string& name);

/// Everything needed to turn a cube into a reconstructor input.
struct TrackConfig {
  Track track = Track::kClean;
  camera::RealWorldParams real_world{};
};

/// Copy of `base` whose noise seed is derived from the scene id, so a scene's
/// noise realization does not depend on its position in a manifest.
TrackConfig for_scene(const TrackConfig& base, const std::string& id);

/// Reconstructor input for a scene: the linear clean RGB, or the decoded
/// real-world image normalized to [0, 1].
RgbImage make_track_input(const HsiCube& cube, const CameraResponse& css, const TrackConfig& track);

/// Linear-RGB view of a track input (undoes the [0, 1] normalization of the
/// real-world track using its white level).
RgbImage linear_rgb_of_input(const RgbImage& input, const TrackConfig& track);

struct SceneInput {
  std::string id;
  HsiCube cube;
  bool out_of_scope = false;
};

enum class AuxColumn { kBaseline, kOutOfScope, kSpatial, kBrightnessHalf, kBrightnessDouble, kPhysical, kWeighted };
inline constexpr std::size_t kAuxColumns = 7;
const char* column_key(AuxColumn column);    // CSV header name
const char* column_title(AuxColumn column);  // table heading

struct AuxRow {
  std::string scene;
  std::array<std::optional<double>, kAuxColumns> values{};
  std::string error;  // nonempty when the scene failed

  std::optional<double>& operator[](AuxColumn c) { return values[static_cast<std::size_t>(c)]; }
  const std::optional<double>& operator[](AuxColumn c) const { return values[static_cast<std::size_t>(c)]; }
};

struct AuxReport {
  std::string method;
  Track track = Track::kClean;
  std::vector<AuxRow> rows;

  /// Mean of the populated cells of a column over successful scenes.
  std::optional<double> column_mean(AuxColumn column) const;
  bool has_errors() const;
};

struct AuxConfig {
  TrackConfig track;
  metrics::MetricConfig metric;
  std::size_t shuffle_patch = 4;
  std::uint64_t shuffle_seed = 0;
  std::size_t jobs = 1;
};

/// Runs every auxiliary evaluation for every scene. A scene whose
/// reconstruction fails or has the wrong geometry gets `error` set and the
/// suite moves on.
AuxReport run_aux_suite(const std::vector<SceneInput>& scenes, const recon::Reconstructor& reconstructor,
                        const CameraResponse& css, const AuxConfig& cfg, const std::string& method = "method");

/// Loads every cube of the manifest (out-of-scope = tagged "out_of_scope").
std::vector<SceneInput> load_scenes(const io::Manifest& manifest);

AuxReport run_aux_suite(const io::Manifest& scenes, const recon::Reconstructor& reconstructor,
                        const CameraResponse& css, const AuxConfig& cfg, const std::string& method = "method");

/// Columns: method, track, scene, the seven value columns, error, config_hash.
std::string aux_to_csv(const std::vector<AuxReport>& reports, const std::string& config_hash = {});
std::vector<AuxReport> aux_from_csv(const std::string& text);
/// Aligned text table of per-method column means, one block per track.
std::string aux_to_text(const std::vector<AuxReport>& reports);

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads. Each index is
/// processed exactly once; callers write results into slot i.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace hsbench::robustness
