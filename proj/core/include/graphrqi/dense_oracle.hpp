#pragma once

#include <Eigen/Core>

#include "graphrqi/spectrum.hpp"

namespace graphrqi {

/// All eigenpairs of a symmetric matrix by cyclic Jacobi rotations.
/// Throws ArgumentError if `lap` is not symmetric within 1e-12 (scaled by
/// max(1, max|entry|)).
Spectrum dense_oracle(const Eigen::MatrixXd& lap);

}  // namespace graphrqi
