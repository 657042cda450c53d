#include "graphrqi/errors.hpp"

#include <utility>

namespace graphrqi {

ParseError::ParseError(const std::string& what, std::size_t line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

SingularUpdateError::SingularUpdateError(const std::string& what, std::size_t chain_index,
                                         double denominator)
    : Error(what), chain_index_(chain_index), denominator_(denominator) {}

NonConvergenceError::NonConvergenceError(const std::string& what, double best_lambda,
                                         Eigen::VectorXd best_vector, int iterations)
    : Error(what),
      best_lambda_(best_lambda),
      best_vector_(std::move(best_vector)),
      iterations_(iterations) {}

IoError::IoError(const std::string& what, std::string path)
    : Error(what + ": " + path), path_(std::move(path)) {}

}  // namespace graphrqi
