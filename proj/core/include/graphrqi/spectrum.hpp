#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace graphrqi {

/// Eigenpairs of a Laplacian at one time-step. Column j of `vectors` pairs
/// with `values[j]`; values ascend; columns are unit-norm and sign-normalized
/// (largest-magnitude entry positive).
struct Spectrum {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
  Eigen::VectorXd residuals;
  /// RQI iterations per eigenpair; empty for the dense oracle.
  std::vector<int> iterations;

  Eigen::Index n() const noexcept { return vectors.rows(); }
  Eigen::Index k() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.size() == 0; }
};

/// Flips `v` so its entry of largest magnitude is positive (first such entry
/// on ties).
void normalize_sign(Eigen::Ref<Eigen::VectorXd> v);

/// ||L u - lambda u||_2 per column.
Eigen::VectorXd residuals(const Eigen::MatrixXd& lap, const Eigen::MatrixXd& vectors,
                          const Eigen::VectorXd& values);

/// Line 1 `n k`, line 2 the k eigenvalues, then n rows of k entries, 17
/// significant digits.
std::string format_spectrum(const Spectrum& spec);
void write_spectrum(const Spectrum& spec, const std::filesystem::path& path);
Spectrum parse_spectrum(std::string_view text);

}  // namespace graphrqi
