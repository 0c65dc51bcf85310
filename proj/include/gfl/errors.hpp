#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace gfl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A node has zero degree where a normalized operator needs D^{-1/2}.
class IsolatedNode : public Error {
 public:
  explicit IsolatedNode(std::size_t node)
      : Error("node " + std::to_string(node) + " has zero degree"), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

class ZeroRow : public Error {
 public:
  explicit ZeroRow(std::size_t row)
      : Error("row " + std::to_string(row) + " has zero norm"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap. Carries the last iterate so
/// callers may still use it.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, int iterations, double residual,
                Eigen::VectorXd last = {})
      : Error(what + " did not converge in " + std::to_string(iterations) +
              " iterations (residual " + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual),
        last_(std::move(last)) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }
  const Eigen::VectorXd& last_iterate() const noexcept { return last_; }

 private:
  int iterations_;
  double residual_;
  Eigen::VectorXd last_;
};

class EmptyClient : public Error {
 public:
  explicit EmptyClient(std::size_t client)
      : Error("client " + std::to_string(client) + " received no samples"),
        client_(client) {}
  std::size_t client() const noexcept { return client_; }

 private:
  std::size_t client_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gfl
