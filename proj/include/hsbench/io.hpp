#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsbench/core.hpp"

namespace hsbench::io {

/// A malformed or truncated file. `field()` names the offending field.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Unsupported codec or corrupt compressed stream.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const Bytes& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

// BHSC cube container, all fields little-endian:
//   "BHSC" | u16 version (1) | u32 height | u32 width | u16 bands
//   | f32 wavelength[bands] | f32 samples[height*width*bands] (band-sequential)
// Samples are stored as f32; any cube whose samples are f32-representable
// (every cube read from disk) round-trips exactly.
inline constexpr std::uint16_t kBhscVersion = 1;

Bytes encode_cube(const HsiCube& cube);
HsiCube decode_cube(const Bytes& bytes);
void write_cube(const HsiCube& cube, const std::filesystem::path& path);
HsiCube read_cube(const std::filesystem::path& path);

/// Linear float RGB stored losslessly as a 3-band BHSC with nominal
/// wavelengths 0, 1, 2 (channel indices).
void write_rgb(const RgbImage& image, const std::filesystem::path& path);
RgbImage read_rgb(const std::filesystem::path& path);
RgbImage cube_to_rgb(const HsiCube& cube);

/// CSS table: header `wavelength,r,g,b`, one row per band, full-precision decimals.
std::string format_css(const CameraResponse& css);
CameraResponse parse_css(const std::string& text);
CameraResponse read_css(const std::filesystem::path& path);
void write_css(const CameraResponse& css, const std::filesystem::path& path);

Bytes encode_png(const Rgb8Image& image);
/// Baseline JPEG with 4:2:0 chroma subsampling and the integer DCT. `comment`
/// is stored in a COM marker when nonempty.
Bytes encode_jpeg(const Rgb8Image& image, int quality, const std::string& comment = {});
/// Sniffs PNG/JPEG from the leading bytes.
Rgb8Image decode_image(const Bytes& bytes);

Rgb8Image read_rgb8(const std::filesystem::path& path);
void write_png(const Rgb8Image& image, const std::filesystem::path& path);
void write_jpeg(const Rgb8Image& image, const std::filesystem::path& path, int quality,
                const std::string& comment = {});

inline constexpr int kDefaultJpegQuality = 95;

struct SceneRecord {
  std::string id;
  std::optional<std::filesystem::path> cube_path;
  std::optional<std::filesystem::path> rgb_clean_path;
  std::optional<std::filesystem::path> rgb_real_path;
  std::set<std::string> tags;

  bool has_tag(const std::string& tag) const { return tags.count(tag) != 0; }
};

/// Scene list; record paths are stored relative to `root` as written in the file.
struct Manifest {
  std::filesystem::path root;
  std::vector<SceneRecord> records;

  std::filesystem::path resolve(const std::filesystem::path& p) const { return p.is_absolute() ? p : root / p; }
};

class ManifestError : public std::runtime_error {
 public:
  ManifestError(const std::vector<std::string>& problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class PathCheck { kRequireExisting, kNone };

/// One JSON object per line: {"id", "cube", "rgb_clean", "rgb_real", "tags"}.
/// Blank lines and lines starting with '#' are skipped. Every problem
/// (duplicate id, dangling path, missing paths) is collected before throwing.
Manifest parse_manifest(const std::string& text, const std::filesystem::path& root,
                        PathCheck check = PathCheck::kRequireExisting);
Manifest load_manifest(const std::filesystem::path& path, PathCheck check = PathCheck::kRequireExisting);
std::string format_manifest(const Manifest& manifest);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

Manifest filter_by_tag(const Manifest& manifest, const std::string& tag);

}  // namespace hsbench::io
