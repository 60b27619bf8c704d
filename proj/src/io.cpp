#include "hsbench/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <jpeglib.h>
#include <png.h>

#include "json.hpp"

namespace hsbench::io {

namespace fs = std::filesystem;

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const Bytes& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, Bytes(text.begin(), text.end()));
}

// ---------------------------------------------------------------------------
// BHSC

namespace {

class Writer {
 public:
  void bytes(const char* s, std::size_t n) { out_.insert(out_.end(), s, s + n); }
  template <typename T>
  void le(T v) {
    using U = std::make_unsigned_t<T>;
    const U u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  void f32(double v) { le(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  Bytes take() { return std::move(out_); }
  void reserve(std::size_t n) { out_.reserve(n); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(const Bytes& b) : b_(b) {}
  std::size_t remaining() const { return b_.size() - pos_; }
  template <typename T>
  T le(const char* field) {
    if (remaining() < sizeof(T)) throw FormatError(field, "truncated file");
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<std::make_unsigned_t<T>>(b_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  float f32(const char* field) { return std::bit_cast<float>(le<std::uint32_t>(field)); }
  void expect(const char* magic, std::size_t n, const char* field) {
    if (remaining() < n || std::memcmp(b_.data() + pos_, magic, n) != 0) throw FormatError(field, "bad magic");
    pos_ += n;
  }

 private:
  const Bytes& b_;
  std::size_t pos_ = 0;
};

}  // namespace

Bytes encode_cube(const HsiCube& cube) {
  if (cube.height() > std::numeric_limits<std::uint32_t>::max() ||
      cube.width() > std::numeric_limits<std::uint32_t>::max() ||
      cube.bands() > std::numeric_limits<std::uint16_t>::max())
    throw FormatError("dimensions", "cube too large for BHSC");
  Writer w;
  w.reserve(16 + 4 * (cube.bands() + cube.size()));
  w.bytes("BHSC", 4);
  w.le<std::uint16_t>(kBhscVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(cube.height()));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(cube.width()));
  w.le<std::uint16_t>(static_cast<std::uint16_t>(cube.bands()));
  for (std::size_t b = 0; b < cube.bands(); ++b) w.f32(cube.grid().wavelength(b));
  for (double v : cube.data()) w.f32(v);
  return w.take();
}

HsiCube decode_cube(const Bytes& bytes) {
  Reader r(bytes);
  r.expect("BHSC", 4, "magic");
  const auto version = r.le<std::uint16_t>("version");
  if (version != kBhscVersion) throw FormatError("version", "unsupported BHSC version " + std::to_string(version));
  const std::uint64_t height = r.le<std::uint32_t>("height");
  const std::uint64_t width = r.le<std::uint32_t>("width");
  const std::uint64_t bands = r.le<std::uint16_t>("bands");
  if (bands == 0) throw FormatError("bands", "zero bands");
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max() / 8;
  if (height != 0 && width > kMax / height) throw FormatError("dimensions", "pixel count overflow");
  if (height * width > kMax / bands) throw FormatError("dimensions", "sample count overflow");
  const std::uint64_t count = height * width * bands;
  if (r.remaining() < 4 * bands) throw FormatError("wavelengths", "truncated file");
  std::vector<double> wl(bands);
  for (auto& v : wl) v = r.f32("wavelengths");
  if (r.remaining() / 4 < count) throw FormatError("samples", "truncated file: header declares " +
                                                                    std::to_string(count) + " samples");
  if (r.remaining() != 4 * count) throw FormatError("samples", "trailing bytes after sample payload");
  WavelengthGrid grid{wl[0], bands > 1 ? wl[1] - wl[0] : 1.0, static_cast<std::size_t>(bands)};
  for (std::size_t b = 1; b < bands; ++b)
    if (!(wl[b] > wl[b - 1])) throw FormatError("wavelengths", "wavelengths not strictly increasing");
  if (bands > 1) grid.step_nm = (wl[bands - 1] - wl[0]) / static_cast<double>(bands - 1);
  std::vector<double> data(count);
  for (auto& v : data) v = r.f32("samples");
  return HsiCube(height, width, grid, std::move(data));
}

void write_cube(const HsiCube& cube, const fs::path& path) { write_file(path, encode_cube(cube)); }
HsiCube read_cube(const fs::path& path) { return decode_cube(read_file(path)); }

RgbImage cube_to_rgb(const HsiCube& cube) {
  if (cube.bands() != 3) throw FormatError("bands", "rgb container must have exactly 3 bands");
  RgbImage out(cube.height(), cube.width());
  for (std::size_t r = 0; r < cube.height(); ++r)
    for (std::size_t c = 0; c < cube.width(); ++c)
      for (std::size_t ch = 0; ch < 3; ++ch) out.at(r, c, ch) = cube.at(r, c, ch);
  return out;
}

void write_rgb(const RgbImage& image, const fs::path& path) {
  HsiCube cube(image.height(), image.width(), WavelengthGrid{0.0, 1.0, 3});
  for (std::size_t r = 0; r < image.height(); ++r)
    for (std::size_t c = 0; c < image.width(); ++c)
      for (std::size_t ch = 0; ch < 3; ++ch) cube.at(r, c, ch) = image.at(r, c, ch);
  write_cube(cube, path);
}

RgbImage read_rgb(const fs::path& path) { return cube_to_rgb(read_cube(path)); }

// ---------------------------------------------------------------------------
// CSS CSV

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& field) {
  double v = 0.0;
  const char* begin = s.data();
  if (!s.empty() && s[0] == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw FormatError(field, "not a number: '" + s + "'");
  return v;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::string format_css(const CameraResponse& css) {
  std::string out = "wavelength,r,g,b\n";
  for (std::size_t b = 0; b < css.grid().bands; ++b) {
    out += shortest(css.grid().wavelength(b));
    for (int ch = 0; ch < 3; ++ch) out += "," + shortest(css.matrix()(ch, static_cast<Eigen::Index>(b)));
    out += "\n";
  }
  return out;
}

CameraResponse parse_css(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool header = false;
  std::vector<double> wl;
  std::vector<std::array<double, 3>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cols = split(line, ',');
    if (!header) {
      std::vector<std::string> lower;
      for (auto c : cols) {
        std::transform(c.begin(), c.end(), c.begin(), [](unsigned char ch) { return std::tolower(ch); });
        lower.push_back(c);
      }
      if (lower != std::vector<std::string>{"wavelength", "r", "g", "b"})
        throw FormatError("header", "expected 'wavelength,r,g,b'");
      header = true;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no);
    if (cols.size() != 4)
      throw FormatError("columns", where + " has " + std::to_string(cols.size()) + " columns, expected 4");
    wl.push_back(parse_double(cols[0], "wavelength"));
    rows.push_back({parse_double(cols[1], "r"), parse_double(cols[2], "g"), parse_double(cols[3], "b")});
  }
  if (!header) throw FormatError("header", "empty CSS file");
  if (rows.empty()) throw FormatError("rows", "no bands");
  for (std::size_t i = 1; i < wl.size(); ++i)
    if (!(wl[i] > wl[i - 1])) throw FormatError("wavelength", "wavelengths are not strictly increasing");
  WavelengthGrid grid{wl[0], wl.size() > 1 ? (wl.back() - wl[0]) / static_cast<double>(wl.size() - 1) : 1.0,
                      wl.size()};
  for (std::size_t i = 0; i < wl.size(); ++i)
    if (std::abs(grid.wavelength(i) - wl[i]) > 1e-4)
      throw FormatError("wavelength", "wavelengths are not uniformly spaced");
  CssMatrix m(3, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t b = 0; b < rows.size(); ++b)
    for (int ch = 0; ch < 3; ++ch) m(ch, static_cast<Eigen::Index>(b)) = rows[b][ch];
  if (css_rank(m) < 3) throw FormatError("rank", "camera response has rank < 3");
  try {
    return CameraResponse(grid, std::move(m));
  } catch (const std::invalid_argument& e) {
    throw FormatError("weights", e.what());
  }
}

CameraResponse read_css(const fs::path& path) {
  const Bytes b = read_file(path);
  return parse_css(std::string(b.begin(), b.end()));
}

void write_css(const CameraResponse& css, const fs::path& path) { write_text(path, format_css(css)); }

// ---------------------------------------------------------------------------
// PNG

Bytes encode_png(const Rgb8Image& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.data().data(), 0, nullptr))
    throw DecodeError(std::string("png encode failed: ") + png.message);
  Bytes out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.data().data(), 0, nullptr))
    throw DecodeError(std::string("png encode failed: ") + png.message);
  out.resize(size);
  return out;
}

namespace {

Rgb8Image decode_png(const Bytes& bytes) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
    throw DecodeError(std::string("png decode failed: ") + png.message);
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, data.data(), 0, nullptr)) {
    png_image_free(&png);
    throw DecodeError(std::string("png decode failed: ") + png.message);
  }
  return Rgb8Image(png.height, png.width, std::move(data));
}

// libjpeg reports fatal errors through error_exit, which must not return.
struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr info) {
  auto* err = reinterpret_cast<JpegError*>(info->err);
  (*info->err->format_message)(info, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silent(j_common_ptr, int) {}

Rgb8Image decode_jpeg(const Bytes& bytes) {
  jpeg_decompress_struct cinfo{};
  JpegError err{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  err.mgr.emit_message = jpeg_silent;
  std::vector<std::uint8_t> data;
  std::size_t h = 0, w = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError(std::string("jpeg decode failed: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_decompress(&cinfo);
  h = cinfo.output_height;
  w = cinfo.output_width;
  data.resize(h * w * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = data.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return Rgb8Image(h, w, std::move(data));
}

}  // namespace

Bytes encode_jpeg(const Rgb8Image& image, int quality, const std::string& comment) {
  if (quality < 1 || quality > 100) throw std::invalid_argument("jpeg quality must be in [1, 100]");
  if (image.width() == 0 || image.height() == 0) throw std::invalid_argument("cannot encode an empty image");
  jpeg_compress_struct cinfo{};
  JpegError err{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  err.mgr.emit_message = jpeg_silent;
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    throw DecodeError(std::string("jpeg encode failed: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(image.width());
  cinfo.image_height = static_cast<JDIMENSION>(image.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  cinfo.dct_method = JDCT_ISLOW;
  cinfo.optimize_coding = FALSE;
  // 4:2:0
  cinfo.comp_info[0].h_samp_factor = 2;
  cinfo.comp_info[0].v_samp_factor = 2;
  cinfo.comp_info[1].h_samp_factor = cinfo.comp_info[1].v_samp_factor = 1;
  cinfo.comp_info[2].h_samp_factor = cinfo.comp_info[2].v_samp_factor = 1;
  jpeg_start_compress(&cinfo, TRUE);
  if (!comment.empty())
    jpeg_write_marker(&cinfo, JPEG_COM, reinterpret_cast<const JOCTET*>(comment.data()),
                      static_cast<unsigned int>(comment.size()));
  const std::size_t stride = image.width() * 3;
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPLE*>(image.data().data() + static_cast<std::size_t>(cinfo.next_scanline) * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  Bytes out(buffer, buffer + size);
  std::free(buffer);
  return out;
}

Rgb8Image decode_image(const Bytes& bytes) {
  static constexpr std::uint8_t kPng[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPng, 8) == 0) return decode_png(bytes);
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) return decode_jpeg(bytes);
  throw DecodeError("unsupported image codec");
}

Rgb8Image read_rgb8(const fs::path& path) { return decode_image(read_file(path)); }
void write_png(const Rgb8Image& image, const fs::path& path) { write_file(path, encode_png(image)); }
void write_jpeg(const Rgb8Image& image, const fs::path& path, int quality, const std::string& comment) {
  write_file(path, encode_jpeg(image, quality, comment));
}

// ---------------------------------------------------------------------------
// Manifests

namespace {

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

}  // namespace

ManifestError::ManifestError(const std::vector<std::string>& problems)
    : std::runtime_error("manifest invalid: " + join(problems, "; ")), problems_(problems) {}

Manifest parse_manifest(const std::string& text, const fs::path& root, PathCheck check) {
  using nlohmann::json;
  Manifest m{root, {}};
  std::vector<std::string> problems;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string where = "line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(t);
    } catch (const json::parse_error& e) {
      problems.push_back(where + ": " + e.what());
      continue;
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
      problems.push_back(where + ": missing or empty id");
      continue;
    }
    SceneRecord rec;
    rec.id = j["id"].get<std::string>();
    auto opt_path = [&](const char* key) -> std::optional<fs::path> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      if (!j[key].is_string()) {
        problems.push_back(where + ": field '" + key + "' must be a string");
        return std::nullopt;
      }
      return fs::path(j[key].get<std::string>());
    };
    rec.cube_path = opt_path("cube");
    rec.rgb_clean_path = opt_path("rgb_clean");
    rec.rgb_real_path = opt_path("rgb_real");
    if (j.contains("tags")) {
      if (!j["tags"].is_array()) {
        problems.push_back(where + ": tags must be an array");
      } else {
        for (const auto& tag : j["tags"]) {
          if (tag.is_string()) rec.tags.insert(tag.get<std::string>());
          else problems.push_back(where + ": tags must be strings");
        }
      }
    }
    if (++seen[rec.id] == 2) problems.push_back("duplicate id '" + rec.id + "'");
    if (!rec.cube_path && !rec.rgb_clean_path && !rec.rgb_real_path)
      problems.push_back("scene '" + rec.id + "' references no files");
    if (check == PathCheck::kRequireExisting) {
      for (const auto* p : {&rec.cube_path, &rec.rgb_clean_path, &rec.rgb_real_path})
        if (*p && !fs::exists(m.resolve(**p)))
          problems.push_back("scene '" + rec.id + "': dangling path '" + (*p)->string() + "'");
    }
    m.records.push_back(std::move(rec));
  }
  if (!problems.empty()) throw ManifestError(problems);
  return m;
}

Manifest load_manifest(const fs::path& path, PathCheck check) {
  const Bytes b = read_file(path);
  return parse_manifest(std::string(b.begin(), b.end()), path.parent_path(), check);
}

std::string format_manifest(const Manifest& manifest) {
  std::string out;
  for (const auto& rec : manifest.records) {
    nlohmann::ordered_json j;
    j["id"] = rec.id;
    if (rec.cube_path) j["cube"] = rec.cube_path->generic_string();
    if (rec.rgb_clean_path) j["rgb_clean"] = rec.rgb_clean_path->generic_string();
    if (rec.rgb_real_path) j["rgb_real"] = rec.rgb_real_path->generic_string();
    j["tags"] = std::vector<std::string>(rec.tags.begin(), rec.tags.end());
    out += j.dump() + "\n";
  }
  return out;
}

void save_manifest(const Manifest& manifest, const fs::path& path) { write_text(path, format_manifest(manifest)); }

Manifest filter_by_tag(const Manifest& manifest, const std::string& tag) {
  Manifest out{manifest.root, {}};
  for (const auto& rec : manifest.records)
    if (rec.has_tag(tag)) out.records.push_back(rec);
  return out;
}

}  // namespace hsbench::io
