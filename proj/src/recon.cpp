#include "hsbench/recon.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace hsbench::recon {

std::size_t feature_count(int order) {
  if (order == 1) return 3;
  if (order == 2) return 9;
  throw std::invalid_argument("feature order must be 1 or 2");
}

Eigen::MatrixXd rgb_features(const RgbImage& rgb, int order) {
  const auto p = static_cast<Eigen::Index>(feature_count(order));
  const auto n = static_cast<Eigen::Index>(rgb.pixels());
  Eigen::MatrixXd f(n, p);
  const auto d = rgb.data();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = d[3 * i], g = d[3 * i + 1], b = d[3 * i + 2];
    f(i, 0) = r;
    f(i, 1) = g;
    f(i, 2) = b;
    if (order == 2) {
      f(i, 3) = r * r;
      f(i, 4) = g * g;
      f(i, 5) = b * b;
      f(i, 6) = r * g;
      f(i, 7) = r * b;
      f(i, 8) = g * b;
    }
  }
  return f;
}

Eigen::MatrixXd spectra_matrix(const HsiCube& cube) {
  const auto n = static_cast<Eigen::Index>(cube.pixels());
  Eigen::MatrixXd s(n, static_cast<Eigen::Index>(cube.bands()));
  for (std::size_t b = 0; b < cube.bands(); ++b) {
    const auto band = cube.band(b);
    for (Eigen::Index i = 0; i < n; ++i) s(i, static_cast<Eigen::Index>(b)) = band[static_cast<std::size_t>(i)];
  }
  return s;
}

HsiCube cube_from_spectra(const Eigen::MatrixXd& spectra, std::size_t height, std::size_t width,
                          const WavelengthGrid& grid) {
  if (static_cast<std::size_t>(spectra.rows()) != height * width ||
      static_cast<std::size_t>(spectra.cols()) != grid.bands)
    throw std::invalid_argument("spectra matrix does not match cube geometry");
  HsiCube out(height, width, grid);
  for (std::size_t b = 0; b < grid.bands; ++b) {
    auto band = out.band(b);
    for (std::size_t i = 0; i < band.size(); ++i)
      band[i] = spectra(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b));
  }
  return out;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd css_pseudoinverse(const CameraResponse& css) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(css.matrix(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() < 3 || !(sv(2) > 1e-10 * sv(0))) throw std::invalid_argument("camera response is rank deficient");
  return svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

HsiCube pseudoinverse_estimate(const CameraResponse& css, const RgbImage& rgb) {
  const Eigen::MatrixXd pinv = css_pseudoinverse(css);  // bands x 3
  const Eigen::MatrixXd f = rgb_features(rgb, 1);        // N x 3
  return cube_from_spectra(f * pinv.transpose(), rgb.height(), rgb.width(), css.grid());
}

HsiCube clamp_nonnegative(const HsiCube& cube) {
  std::vector<double> out(cube.data().begin(), cube.data().end());
  for (double& v : out) v = std::max(v, 0.0);
  return HsiCube(cube.height(), cube.width(), cube.grid(), std::move(out));
}

// ---------------------------------------------------------------------------

namespace {

struct PreparedPair {
  Eigen::MatrixXd features;  // N x p
  Eigen::MatrixXd spectra;   // N x B
};

std::vector<PreparedPair> prepare(std::span<const TrainingPair> pairs, int order, WavelengthGrid& grid) {
  if (pairs.empty()) throw std::invalid_argument("training set is empty");
  grid = pairs.front().target.grid();
  std::vector<PreparedPair> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    if (pair.input.height() != pair.target.height() || pair.input.width() != pair.target.width())
      throw std::invalid_argument("training pair input and target differ in size");
    if (!pair.target.grid().matches(grid)) throw std::invalid_argument("training targets use different grids");
    out.push_back({rgb_features(pair.input, order), spectra_matrix(pair.target)});
  }
  return out;
}

}  // namespace

bool operator==(const LinearModel& a, const LinearModel& b) {
  return a.feature_order == b.feature_order && a.ridge_lambda == b.ridge_lambda && a.grid.bands == b.grid.bands &&
         a.grid.start_nm == b.grid.start_nm && a.grid.step_nm == b.grid.step_nm && a.weights == b.weights;
}

bool operator==(const BasisModel& a, const BasisModel& b) {
  return a.feature_order == b.feature_order && a.ridge_lambda == b.ridge_lambda && a.grid.bands == b.grid.bands &&
         a.grid.start_nm == b.grid.start_nm && a.grid.step_nm == b.grid.step_nm && a.basis == b.basis &&
         a.weight_map == b.weight_map && a.objective_trace == b.objective_trace;
}

LinearModel fit_linear(std::span<const TrainingPair> pairs, int order, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("ridge lambda must be >= 0");
  LinearModel model;
  model.feature_order = order;
  model.ridge_lambda = lambda;
  const auto data = prepare(pairs, order, model.grid);
  const auto p = static_cast<Eigen::Index>(feature_count(order));
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(p, static_cast<Eigen::Index>(model.grid.bands));
  for (const auto& d : data) {
    gram.noalias() += d.features.transpose() * d.features;
    cross.noalias() += d.features.transpose() * d.spectra;
  }
  gram.diagonal().array() += lambda;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  // Negated compare: rcond is NaN for an exactly zero pivot.
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(ldlt.vectorD().minCoeff() > 0.0) ||
      !(ldlt.rcond() >= 1e-13))
    throw SolverError("normal matrix is singular (rcond " + std::to_string(ldlt.rcond()) +
                      "); use a ridge lambda > 0");
  model.weights = ldlt.solve(cross).transpose();
  return model;
}

HsiCube predict_linear(const LinearModel& model, const RgbImage& rgb) {
  const Eigen::MatrixXd f = rgb_features(rgb, model.feature_order);
  if (f.cols() != model.weights.cols()) throw std::invalid_argument("model feature count mismatch");
  return cube_from_spectra(f * model.weights.transpose(), rgb.height(), rgb.width(), model.grid);
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd solve_sylvester_spd(const Eigen::MatrixXd& p, const Eigen::MatrixXd& r, const Eigen::MatrixXd& c,
                                    double lambda) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(p), er(r);
  const Eigen::VectorXd dp = ep.eigenvalues().cwiseMax(0.0);
  const Eigen::VectorXd dr = er.eigenvalues().cwiseMax(0.0);
  const double scale = std::max(dp.maxCoeff() * dr.maxCoeff(), lambda);
  const double tol = 1e-13 * scale;
  Eigen::MatrixXd ct = ep.eigenvectors().transpose() * c * er.eigenvectors();
  for (Eigen::Index i = 0; i < ct.rows(); ++i)
    for (Eigen::Index j = 0; j < ct.cols(); ++j) {
      const double coupled = dp(i) * dr(j);
      if (coupled <= tol) {
        // Direction not seen by the data term: the minimizer of lambda x^2
        // with a (numerically) zero right-hand side is 0.
        if (lambda <= tol) throw SolverError("singular system; use a ridge lambda > 0");
        ct(i, j) = 0.0;
      } else {
        ct(i, j) /= coupled + lambda;
      }
    }
  return ep.eigenvectors() * ct * er.eigenvectors().transpose();
}

namespace {

double basis_objective(const std::vector<PreparedPair>& data, const Eigen::MatrixXd& basis,
                       const Eigen::MatrixXd& weight_map, const Eigen::MatrixXd& metric, double lambda) {
  const Eigen::MatrixXd projection = weight_map.transpose() * basis;  // p x B
  double total = 0.0;
  for (const auto& d : data) {
    const Eigen::MatrixXd resid = d.features * projection - d.spectra;
    total += (resid * metric).cwiseProduct(resid).sum();
  }
  return total + lambda * (weight_map.squaredNorm() + basis.squaredNorm());
}

}  // namespace

BasisModel fit_basis(std::span<const TrainingPair> pairs, const BasisFitOptions& options) {
  if (options.iterations < 1) throw std::invalid_argument("fit_basis needs at least one iteration");
  if (!(options.lambda >= 0.0) || !std::isfinite(options.lambda)) throw std::invalid_argument("ridge lambda must be >= 0");
  if (options.k < 1) throw std::invalid_argument("basis count must be >= 1");
  BasisModel model;
  model.feature_order = options.feature_order;
  model.ridge_lambda = options.lambda;
  const auto data = prepare(pairs, options.feature_order, model.grid);
  const auto bands = static_cast<Eigen::Index>(model.grid.bands);
  const auto k = static_cast<Eigen::Index>(options.k);
  if (options.k > model.grid.bands)
    throw std::invalid_argument("basis count " + std::to_string(options.k) + " exceeds band count " +
                                std::to_string(model.grid.bands));
  const auto p = static_cast<Eigen::Index>(feature_count(options.feature_order));

  Eigen::MatrixXd metric = Eigen::MatrixXd::Identity(bands, bands);
  if (options.objective == BasisObjective::kCssPrior) {
    if (!options.css) throw std::invalid_argument("css prior objective needs a camera response");
    if (!options.css->grid().matches(model.grid)) throw std::invalid_argument("css grid does not match training data");
    if (!(options.tau >= 0.0)) throw std::invalid_argument("tau must be >= 0");
    metric.noalias() += options.tau * options.css->matrix().transpose() * options.css->matrix();
  }

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);          // sum f f^T
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(bands, p);     // sum s f^T
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(bands, bands);  // sum s s^T
  for (const auto& d : data) {
    gram.noalias() += d.features.transpose() * d.features;
    cross.noalias() += d.spectra.transpose() * d.features;
    second.noalias() += d.spectra.transpose() * d.spectra;
  }

  // Top-k eigenvectors of the second-moment matrix, largest first, each
  // signed so its largest-magnitude entry is positive.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pca(second);
  model.basis.resize(k, bands);
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::VectorXd v = pca.eigenvectors().col(bands - 1 - i);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    model.basis.row(i) = v.transpose();
  }

  const double lambda = options.lambda;
  for (std::size_t it = 0; it < options.iterations; ++it) {
    // Weight map for fixed basis: (B Q B^T) M (F^T F) + lambda M = B Q (S^T F).
    model.weight_map = solve_sylvester_spd(model.basis * metric * model.basis.transpose(), gram,
                                           model.basis * metric * cross, lambda);
    model.objective_trace.push_back(basis_objective(data, model.basis, model.weight_map, metric, lambda));
    if (it + 1 == options.iterations) break;
    // Basis for fixed weight map, solved for X = B^T:
    //   Q X (M F^T F M^T) + lambda X = Q (S^T F) M^T.
    const Eigen::MatrixXd weight_gram = model.weight_map * gram * model.weight_map.transpose();
    const Eigen::MatrixXd x =
        solve_sylvester_spd(metric, weight_gram, metric * cross * model.weight_map.transpose(), lambda);
    model.basis = x.transpose();
    model.objective_trace.push_back(basis_objective(data, model.basis, model.weight_map, metric, lambda));
  }
  return model;
}

HsiCube predict_basis(const BasisModel& model, const RgbImage& rgb) {
  const Eigen::MatrixXd f = rgb_features(rgb, model.feature_order);
  if (f.cols() != model.weight_map.cols()) throw std::invalid_argument("model feature count mismatch");
  const Eigen::MatrixXd weights = f * model.weight_map.transpose();  // N x k
  return cube_from_spectra(weights * model.basis, rgb.height(), rgb.width(), model.grid);
}

double squared_residual(std::span<const TrainingPair> pairs, const Reconstructor& predict) {
  double total = 0.0;
  for (const auto& pair : pairs) {
    const HsiCube out = predict(pair.input);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = out.data()[i] - pair.target.data()[i];
      total += d * d;
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// SBMD

namespace {

class Out {
 public:
  template <typename T>
  void le(T v) {
    using U = std::make_unsigned_t<T>;
    const U u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void matrix(const Eigen::MatrixXd& m) {
    le<std::uint32_t>(static_cast<std::uint32_t>(m.rows()));
    le<std::uint32_t>(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }
  io::Bytes bytes;
};

class In {
 public:
  explicit In(const io::Bytes& b) : b_(b) {}
  template <typename T>
  T le(const char* field) {
    if (b_.size() - pos_ < sizeof(T)) throw io::FormatError(field, "truncated file");
    std::uint64_t u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  double f64(const char* field) { return std::bit_cast<double>(le<std::uint64_t>(field)); }
  Eigen::MatrixXd matrix(const char* field) {
    const std::uint64_t rows = le<std::uint32_t>(field);
    const std::uint64_t cols = le<std::uint32_t>(field);
    if (rows * cols > (b_.size() - pos_) / 8) throw io::FormatError(field, "truncated file");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = f64(field);
    return m;
  }
  void expect_magic() {
    if (b_.size() < 4 || std::memcmp(b_.data(), "SBMD", 4) != 0) throw io::FormatError("magic", "bad magic");
    pos_ = 4;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  const io::Bytes& b_;
  std::size_t pos_ = 0;
};

void write_header(Out& out, std::uint8_t kind, int order, double lambda, const WavelengthGrid& grid) {
  for (char ch : std::string("SBMD")) out.bytes.push_back(static_cast<std::uint8_t>(ch));
  out.le<std::uint16_t>(kSbmdVersion);
  out.le<std::uint8_t>(kind);
  out.le<std::uint8_t>(static_cast<std::uint8_t>(order));
  out.f64(lambda);
  out.f64(grid.start_nm);
  out.f64(grid.step_nm);
  out.le<std::uint32_t>(static_cast<std::uint32_t>(grid.bands));
}

}  // namespace

io::Bytes encode_model(const Model& model) {
  Out out;
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    write_header(out, 1, lin->feature_order, lin->ridge_lambda, lin->grid);
    out.matrix(lin->weights);
  } else {
    const auto& basis = std::get<BasisModel>(model);
    write_header(out, 2, basis.feature_order, basis.ridge_lambda, basis.grid);
    out.matrix(basis.basis);
    out.matrix(basis.weight_map);
    out.le<std::uint32_t>(static_cast<std::uint32_t>(basis.objective_trace.size()));
    for (double v : basis.objective_trace) out.f64(v);
  }
  return std::move(out.bytes);
}

Model decode_model(const io::Bytes& bytes) {
  In in(bytes);
  in.expect_magic();
  const auto version = in.le<std::uint16_t>("version");
  if (version != kSbmdVersion) throw io::FormatError("version", "unsupported SBMD version " + std::to_string(version));
  const auto kind = in.le<std::uint8_t>("kind");
  const int order = in.le<std::uint8_t>("feature_order");
  if (order != 1 && order != 2) throw io::FormatError("feature_order", "must be 1 or 2");
  const double lambda = in.f64("ridge_lambda");
  WavelengthGrid grid;
  grid.start_nm = in.f64("grid_start");
  grid.step_nm = in.f64("grid_step");
  grid.bands = in.le<std::uint32_t>("bands");
  const auto features = static_cast<Eigen::Index>(feature_count(order));
  const auto bands = static_cast<Eigen::Index>(grid.bands);
  Model result;
  if (kind == 1) {
    LinearModel m{order, lambda, grid, in.matrix("weights")};
    if (m.weights.rows() != bands || m.weights.cols() != features)
      throw io::FormatError("weights", "dimensions do not match header");
    result = std::move(m);
  } else if (kind == 2) {
    BasisModel m;
    m.feature_order = order;
    m.ridge_lambda = lambda;
    m.grid = grid;
    m.basis = in.matrix("basis");
    m.weight_map = in.matrix("weight_map");
    if (m.basis.cols() != bands) throw io::FormatError("basis", "column count does not match bands");
    if (m.weight_map.rows() != m.basis.rows() || m.weight_map.cols() != features)
      throw io::FormatError("weight_map", "dimensions do not match basis/features");
    const std::uint32_t n = in.le<std::uint32_t>("trace");
    for (std::uint32_t i = 0; i < n; ++i) m.objective_trace.push_back(in.f64("trace"));
    result = std::move(m);
  } else {
    throw io::FormatError("kind", "unknown model kind " + std::to_string(kind));
  }
  if (!in.done()) throw io::FormatError("payload", "trailing bytes");
  return result;
}

void save_model(const Model& model, const std::filesystem::path& path) { io::write_file(path, encode_model(model)); }
Model load_model(const std::filesystem::path& path) { return decode_model(io::read_file(path)); }

Reconstructor make_reconstructor(const Model& model) {
  if (const auto* lin = std::get_if<LinearModel>(&model))
    return [m = *lin](const RgbImage& rgb) { return predict_linear(m, rgb); };
  return [m = std::get<BasisModel>(model)](const RgbImage& rgb) { return predict_basis(m, rgb); };
}

Reconstructor make_pseudoinverse_reconstructor(const CameraResponse& css, double input_scale) {
  return [css, input_scale](const RgbImage& rgb) {
    return pseudoinverse_estimate(css, input_scale == 1.0 ? rgb : scale_rgb(rgb, input_scale));
  };
}

}  // namespace hsbench::recon
