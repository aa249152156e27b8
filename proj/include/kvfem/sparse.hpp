#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace kvfem {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed-row matrix with sorted, unique column indices per row.
///
/// Entries that sum to zero are kept, so operators assembled from the same
/// connectivity share one sparsity pattern and can be combined entry-wise.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols);

  /// Duplicate (row, col) entries are summed. Throws std::out_of_range for
  /// indices outside the shape.
  static SparseMatrix from_triplets(int rows, int cols, std::span<const Triplet> triplets);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const int> row_offsets() const { return row_offsets_; }
  std::span<const int> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }
  /// Mutable access to the values; the pattern stays fixed.
  std::span<double> values() { return values_; }

  /// Storage position of (row, col), or -1 if it is not in the pattern.
  std::ptrdiff_t find(int row, int col) const;
  double coeff(int row, int col) const;

  std::vector<double> multiply(std::span<const double> x) const;
  void multiply_add(std::span<const double> x, std::span<double> y, double alpha = 1.0) const;
  /// x^T A y
  double bilinear(std::span<const double> x, std::span<const double> y) const;

  SparseMatrix transpose() const;
  bool same_pattern(const SparseMatrix& other) const;
  double frobenius_norm() const;
  double max_abs() const;
  std::vector<std::vector<double>> to_dense() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fill-reducing ordering and symbolic analysis, reusable for every matrix
/// with the same sparsity pattern.
class SymbolicLu {
 public:
  explicit SymbolicLu(const SparseMatrix& pattern);
  ~SymbolicLu();
  SymbolicLu(const SymbolicLu&) = delete;
  SymbolicLu& operator=(const SymbolicLu&) = delete;

  int size() const { return n_; }
  bool matches(const SparseMatrix& a) const;

 private:
  friend class LuFactorization;
  int n_ = 0;
  std::vector<int> row_offsets_;
  std::vector<int> col_indices_;
  void* handle_ = nullptr;
};

/// Sparse LU with threshold partial pivoting. Holds its own copy of the
/// matrix it factored.
class LuFactorization {
 public:
  /// Relative pivot size below which the matrix is reported singular.
  static constexpr double kSingularPivotTolerance = 1e-14;

  /// Factors a square matrix, reusing `symbolic` when provided. Throws
  /// SingularMatrixError when a pivot is below kSingularPivotTolerance times
  /// the largest absolute entry, std::invalid_argument for non-square input.
  explicit LuFactorization(const SparseMatrix& a, std::shared_ptr<const SymbolicLu> symbolic = nullptr);
  ~LuFactorization();
  LuFactorization(LuFactorization&& other) noexcept;
  LuFactorization& operator=(LuFactorization&& other) noexcept;
  LuFactorization(const LuFactorization&) = delete;
  LuFactorization& operator=(const LuFactorization&) = delete;

  int size() const { return n_; }

  /// Throws std::invalid_argument on a dimension mismatch.
  std::vector<double> solve(std::span<const double> b) const;

 private:
  int n_ = 0;
  std::shared_ptr<const SymbolicLu> symbolic_;
  std::vector<int> row_offsets_;
  std::vector<int> col_indices_;
  std::vector<double> values_;
  void* numeric_ = nullptr;
};

/// Result of iterative refinement against a (possibly different) matrix.
struct RefinedSolve {
  std::vector<double> x;
  double backward_error = 0.0;  // |b - A x|_inf / (|A|_inf |x|_inf + |b|_inf)
  int sweeps = 0;               // correction solves after the first
  bool converged = false;
};

/// Solves A x = b using `factors` of a nearby matrix plus iterative
/// refinement with residuals of A. Stops once the normwise backward error is
/// at most `tolerance`, after `max_sweeps` corrections, or when a sweep does
/// not reduce the error tenfold.
RefinedSolve solve_refined(const LuFactorization& factors, const SparseMatrix& a, std::span<const double> b,
                           double tolerance, int max_sweeps);

/// Infinity norm (max absolute row sum).
double norm_inf(const SparseMatrix& a);

inline LuFactorization lu_factor(const SparseMatrix& a) { return LuFactorization(a); }
inline std::vector<double> solve(const LuFactorization& f, std::span<const double> b) { return f.solve(b); }

double norm2(std::span<const double> x);
double norm_inf(std::span<const double> x);

}  // namespace kvfem
