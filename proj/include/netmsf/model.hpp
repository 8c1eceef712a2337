#pragma once

// Plant-level matrices of a network of identical LTI nodes
//
//   x_i' = D x_i + R u_i + sum_j b_ji H x_j,   u_i = K x_i + sum_j a_ji L x_j
//
// and the derived closed-loop local matrices F = D + R K and G = R L.

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "netmsf/errors.hpp"
#include "netmsf/io.hpp"

namespace netmsf {

class PlantModel {
 public:
  const Eigen::MatrixXd& D() const { return d_; }
  const Eigen::MatrixXd& R() const { return r_; }
  const Eigen::MatrixXd& H() const { return h_; }
  const Eigen::MatrixXd& K() const { return k_; }
  const Eigen::MatrixXd& L() const { return l_; }
  const Eigen::MatrixXd& F() const { return f_; }
  const Eigen::MatrixXd& G() const { return g_; }

  /// State dimension n.
  Eigen::Index states() const { return d_.rows(); }
  /// Input dimension m.
  Eigen::Index inputs() const { return r_.cols(); }

  /// Same plant with a different inter-node gain L (F is unchanged).
  PlantModel with_inter_node_gain(const Eigen::MatrixXd& L) const;

  friend PlantModel build_plant_model(Eigen::MatrixXd D, Eigen::MatrixXd R, Eigen::MatrixXd H,
                                      Eigen::MatrixXd K, Eigen::MatrixXd L);

 private:
  PlantModel() = default;

  Eigen::MatrixXd d_, r_, h_, k_, l_, f_, g_;
};

namespace detail {

inline void require_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols,
                          const char* name, const char* against) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionMismatch(std::string(name) + " is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + " but " + against + " requires " +
                            std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace detail

/// Validates dimensions and derives F = D + RK, G = RL.
inline PlantModel build_plant_model(Eigen::MatrixXd D, Eigen::MatrixXd R, Eigen::MatrixXd H,
                                    Eigen::MatrixXd K, Eigen::MatrixXd L) {
  const Eigen::Index n = D.rows();
  if (n == 0 || D.cols() != n) {
    throw DimensionMismatch("D must be square and non-empty, got " + std::to_string(D.rows()) +
                            "x" + std::to_string(D.cols()));
  }
  if (R.rows() != n || R.cols() == 0) {
    throw DimensionMismatch("R has " + std::to_string(R.rows()) + " rows but D is " +
                            std::to_string(n) + "x" + std::to_string(n) + " (D vs R)");
  }
  const Eigen::Index m = R.cols();
  detail::require_shape(H, n, n, "H", "D");
  detail::require_shape(K, m, n, "K", "R and D");
  detail::require_shape(L, m, n, "L", "R and D");

  PlantModel model;
  model.f_ = D + R * K;
  model.g_ = R * L;
  model.d_ = std::move(D);
  model.r_ = std::move(R);
  model.h_ = std::move(H);
  model.k_ = std::move(K);
  model.l_ = std::move(L);
  return model;
}

inline PlantModel PlantModel::with_inter_node_gain(const Eigen::MatrixXd& L) const {
  return build_plant_model(d_, r_, h_, k_, L);
}

/// ||R L - H|| in the induced 2-norm. Zero when the matching condition holds.
inline double matching_defect(const PlantModel& model) {
  const Eigen::MatrixXd diff = model.G() - model.H();
  if (diff.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff);
  return svd.singularValues()(0);
}

/// Least-squares solution of R L = target (minimal Frobenius residual) and
/// the residual it leaves.
struct GainFit {
  Eigen::MatrixXd gain;
  double residual = 0.0;
};

inline GainFit fit_inter_node_gain(const PlantModel& model, const Eigen::MatrixXd& target) {
  detail::require_shape(target, model.states(), model.states(), "target", "D");
  GainFit fit;
  fit.gain = model.R().completeOrthogonalDecomposition().solve(target);
  fit.residual = (model.R() * fit.gain - target).norm();
  return fit;
}

/// Parses the `key = value` model file. Keys D, R, H, K, L are all required;
/// lines starting with '#' and blank lines are skipped.
inline PlantModel parse_plant_model(std::string_view text) {
  static const char* const kKeys[] = {"D", "R", "H", "K", "L"};
  std::map<std::string, Eigen::MatrixXd> found;
  int line_no = 0;
  for (const auto& raw : io::split(text, '\n')) {
    ++line_no;
    const std::string line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = io::trim(line.substr(0, eq));
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (found.count(key)) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    found.emplace(key, io::parse_matrix_literal(line.substr(eq + 1), key));
  }
  for (const char* key : kKeys) {
    if (!found.count(key)) throw ParseError(std::string("missing key '") + key + "'");
  }
  return build_plant_model(found["D"], found["R"], found["H"], found["K"], found["L"]);
}

inline PlantModel load_plant_model(const std::filesystem::path& path) {
  return parse_plant_model(io::read_file(path));
}

inline std::string format_matrix_literal(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) out += "; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ' ';
      out += io::format_double(m(i, j));
    }
  }
  return out;
}

inline std::string format_plant_model(const PlantModel& model) {
  return "D = " + format_matrix_literal(model.D()) + "\nR = " + format_matrix_literal(model.R()) +
         "\nH = " + format_matrix_literal(model.H()) + "\nK = " + format_matrix_literal(model.K()) +
         "\nL = " + format_matrix_literal(model.L()) + "\n";
}

}  // namespace netmsf
