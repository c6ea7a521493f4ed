#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace eigmod {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. The only matrix type in the library;
/// everything is desk-scale dense.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Symmetric dense matrix; construction symmetrizes and checks finiteness.
struct SymmetricDense {
  std::size_t n = 0;
  Matrix entries;

  static SymmetricDense from(const Matrix& m);
};

/// A = Q diag(lambda) Q^T with orthonormal columns of q and ascending lambda.
struct SpectralDecomposition {
  Matrix q;
  Vec lambda;

  std::size_t size() const { return lambda.size(); }
};

/// Signed low-rank perturbation sum_r signs[r] * k_r k_r^T.
struct LowRankUpdate {
  Matrix kmat;                // n x k
  std::vector<int> signs;     // k entries in {+1, -1}

  std::size_t rank() const { return kmat.cols(); }
  std::size_t dim() const { return kmat.rows(); }
};

struct UpdateResult {
  SpectralDecomposition decomposition;
  double residual_fro = 0.0;
  double ortho_err = 0.0;
  double wall_time = 0.0;   // seconds
};

/// Thrown by the numerical pipeline; carries the stage that failed.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string stage, const std::string& msg)
      : std::runtime_error("[" + stage + "] " + msg), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Validates the decomposition invariants for inputs entering the pipeline:
/// orthonormality to max_ortho_err and nondecreasing eigenvalues.
void validate_decomposition(const SpectralDecomposition& d, double max_ortho_err = 1e-10);

void validate_update(const SpectralDecomposition& d, const LowRankUpdate& u);

}  // namespace eigmod
