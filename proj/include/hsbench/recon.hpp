#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "hsbench/core.hpp"
#include "hsbench/io.hpp"

namespace hsbench::recon {

/// Maps an input RGB image to a spectral cube of the same height and width.
using Reconstructor = std::function<HsiCube(const RgbImage&)>;

/// A normal-equation or Sylvester solve hit a singular system.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Order 1: (r, g, b). Order 2 adds r^2, g^2, b^2, rg, rb, gb.
std::size_t feature_count(int order);
/// N x features matrix, one row per pixel in row-major pixel order.
Eigen::MatrixXd rgb_features(const RgbImage& rgb, int order);
/// N x bands matrix of per-pixel spectra.
Eigen::MatrixXd spectra_matrix(const HsiCube& cube);
HsiCube cube_from_spectra(const Eigen::MatrixXd& spectra, std::size_t height, std::size_t width,
                          const WavelengthGrid& grid);

struct TrainingPair {
  RgbImage input;
  HsiCube target;
};

/// Minimum-norm spectrum reproducing each pixel's RGB exactly under `css`.
/// Negative samples are kept.
HsiCube pseudoinverse_estimate(const CameraResponse& css, const RgbImage& rgb);
Eigen::MatrixXd css_pseudoinverse(const CameraResponse& css);

/// Replaces negative samples with zero.
HsiCube clamp_nonnegative(const HsiCube& cube);

struct LinearModel {
  int feature_order = 1;
  double ridge_lambda = 0.0;
  WavelengthGrid grid{};
  Eigen::MatrixXd weights;  // bands x features

  friend bool operator==(const LinearModel& a, const LinearModel& b);
};

/// Ridge regression over every training pixel:
///   min_W sum ||W f(rgb) - s||^2 + lambda ||W||_F^2
/// solved through the normal equations with an LDLT factorization.
LinearModel fit_linear(std::span<const TrainingPair> pairs, int order, double lambda);
HsiCube predict_linear(const LinearModel& model, const RgbImage& rgb);

enum class BasisObjective { kPlain, kCssPrior };

struct BasisFitOptions {
  std::size_t k = 10;
  int feature_order = 1;
  double lambda = 1e-8;
  std::size_t iterations = 10;
  BasisObjective objective = BasisObjective::kPlain;
  /// Required for kCssPrior.
  std::optional<CameraResponse> css;
  double tau = 10.0;
};

struct BasisModel {
  int feature_order = 1;
  double ridge_lambda = 0.0;
  WavelengthGrid grid{};
  Eigen::MatrixXd basis;       // k x bands
  Eigen::MatrixXd weight_map;  // k x features
  /// Objective after every half-step (weight fit, then basis refit, ...).
  std::vector<double> objective_trace;

  std::size_t k() const { return static_cast<std::size_t>(basis.rows()); }

  friend bool operator==(const BasisModel& a, const BasisModel& b);
};

/// Alternating minimization of
///   J(B, M) = sum_n (B^T M f_n - s_n)^T Q (B^T M f_n - s_n) + lambda (||M||^2 + ||B||^2)
/// with Q = I (plain) or Q = I + tau css^T css (squared back-projection prior).
/// The basis starts at the top-k principal directions of the (uncentered)
/// training spectra. Iteration i fits M for the current basis and, except
/// on the last iteration, refits the basis for that M. Each half-step is the
/// exact minimizer of J in its block, so the trace is non-increasing.
BasisModel fit_basis(std::span<const TrainingPair> pairs, const BasisFitOptions& options);
HsiCube predict_basis(const BasisModel& model, const RgbImage& rgb);

/// Data term of J with Q = I for a given prediction function.
double squared_residual(std::span<const TrainingPair> pairs, const Reconstructor& predict);

/// Solves P X R + lambda X = C for symmetric positive semidefinite P and R
/// by diagonalizing both sides.
Eigen::MatrixXd solve_sylvester_spd(const Eigen::MatrixXd& p, const Eigen::MatrixXd& r, const Eigen::MatrixXd& c,
                                    double lambda);

// SBMD model file, little-endian:
//   "SBMD" | u16 version (1) | u8 kind (1 linear, 2 basis) | u8 feature_order
//   | f64 ridge_lambda | f64 grid_start | f64 grid_step | u32 bands
//   | linear: u32 rows, u32 cols, f64 weights[rows*cols] (row-major)
//   | basis:  u32 k, u32 bands, f64 basis[k*bands], u32 k, u32 features,
//             f64 weight_map[k*features], u32 trace_len, f64 trace[trace_len]
using Model = std::variant<LinearModel, BasisModel>;

inline constexpr std::uint16_t kSbmdVersion = 1;

io::Bytes encode_model(const Model& model);
Model decode_model(const io::Bytes& bytes);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

Reconstructor make_reconstructor(const Model& model);
Reconstructor make_pseudoinverse_reconstructor(const CameraResponse& css, double input_scale = 1.0);

}  // namespace hsbench::recon
