#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace graphrqi {

// Base of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed input text. `line()` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateError : public Error {
 public:
  using Error::Error;
};

// An operation was asked to move a DynamicLaplacian into an invalid state.
class StateError : public Error {
 public:
  using Error::Error;
};

// Raised when a Sherman-Morrison denominator vanishes.
class SingularUpdateError : public Error {
 public:
  SingularUpdateError(const std::string& what, std::size_t chain_index, double denominator);
  std::size_t chain_index() const noexcept { return chain_index_; }
  double denominator() const noexcept { return denominator_; }

 private:
  std::size_t chain_index_;
  double denominator_;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double best_lambda, Eigen::VectorXd best_vector,
                      int iterations);
  double best_lambda() const noexcept { return best_lambda_; }
  const Eigen::VectorXd& best_vector() const noexcept { return best_vector_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double best_lambda_;
  Eigen::VectorXd best_vector_;
  int iterations_;
};

class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace graphrqi
