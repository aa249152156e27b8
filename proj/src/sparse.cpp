#include "kvfem/sparse.hpp"

#include <umfpack.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kvfem {

SparseMatrix::SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix shape");
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::span<const Triplet> triplets) {
  SparseMatrix m(rows, cols);
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw std::out_of_range("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                              ") outside a " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
    }
  }

  // Counting sort by row keeps the original order within a row, so the
  // summation order of duplicates is the input order.
  std::vector<int> count(rows + 1, 0);
  for (const auto& t : triplets) ++count[t.row + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<std::size_t> order(triplets.size());
  {
    std::vector<int> next(count.begin(), count.end() - 1);
    for (std::size_t i = 0; i < triplets.size(); ++i) order[next[triplets[i].row]++] = i;
  }

  m.col_indices_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::vector<std::size_t> row_items;
  for (int r = 0; r < rows; ++r) {
    row_items.assign(order.begin() + count[r], order.begin() + count[r + 1]);
    std::stable_sort(row_items.begin(), row_items.end(),
                     [&](std::size_t a, std::size_t b) { return triplets[a].col < triplets[b].col; });
    for (std::size_t idx : row_items) {
      const auto& t = triplets[idx];
      if (static_cast<int>(m.col_indices_.size()) > m.row_offsets_[r] && m.col_indices_.back() == t.col) {
        m.values_.back() += t.value;
      } else {
        m.col_indices_.push_back(t.col);
        m.values_.push_back(t.value);
      }
    }
    m.row_offsets_[r + 1] = static_cast<int>(m.col_indices_.size());
  }
  return m;
}

std::ptrdiff_t SparseMatrix::find(int row, int col) const {
  if (row < 0 || row >= rows_) return -1;
  const auto first = col_indices_.begin() + row_offsets_[row];
  const auto last = col_indices_.begin() + row_offsets_[row + 1];
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return -1;
  return it - col_indices_.begin();
}

double SparseMatrix::coeff(int row, int col) const {
  const auto pos = find(row, col);
  return pos < 0 ? 0.0 : values_[pos];
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows_, 0.0);
  multiply_add(x, y);
  return y;
}

void SparseMatrix::multiply_add(std::span<const double> x, std::span<double> y, double alpha) const {
  if (static_cast<int>(x.size()) != cols_ || static_cast<int>(y.size()) != rows_) {
    throw std::invalid_argument("matrix-vector dimension mismatch");
  }
  for (int r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (int p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) sum += values_[p] * x[col_indices_[p]];
    y[r] += alpha * sum;
  }
}

double SparseMatrix::bilinear(std::span<const double> x, std::span<const double> y) const {
  if (static_cast<int>(x.size()) != rows_ || static_cast<int>(y.size()) != cols_) {
    throw std::invalid_argument("bilinear form dimension mismatch");
  }
  double total = 0.0;
  for (int r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (int p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) sum += values_[p] * y[col_indices_[p]];
    total += x[r] * sum;
  }
  return total;
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t(cols_, rows_);
  for (int c : col_indices_) ++t.row_offsets_[c + 1];
  std::partial_sum(t.row_offsets_.begin(), t.row_offsets_.end(), t.row_offsets_.begin());
  t.col_indices_.resize(nnz());
  t.values_.resize(nnz());
  std::vector<int> next(t.row_offsets_.begin(), t.row_offsets_.end() - 1);
  for (int r = 0; r < rows_; ++r) {
    for (int p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
      const int dst = next[col_indices_[p]]++;
      t.col_indices_[dst] = r;
      t.values_[dst] = values_[p];
    }
  }
  return t;
}

bool SparseMatrix::same_pattern(const SparseMatrix& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ && row_offsets_ == other.row_offsets_ &&
         col_indices_ == other.col_indices_;
}

double SparseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
  std::vector<std::vector<double>> d(rows_, std::vector<double>(cols_, 0.0));
  for (int r = 0; r < rows_; ++r) {
    for (int p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) d[r][col_indices_[p]] += values_[p];
  }
  return d;
}

namespace {

// UMFPACK reads compressed-column arrays. Handing it our compressed-row
// arrays describes A^T, so factorizations are of A^T and solves use the
// transposed system.
struct UmfpackControl {
  UmfpackControl() {
    umfpack_di_defaults(control);
    control[UMFPACK_SCALE] = UMFPACK_SCALE_NONE;
    // Refinement is done by solve_refined against the caller's matrix.
    control[UMFPACK_IRSTEP] = 0;
  }
  double control[UMFPACK_CONTROL];
};

const double* umf_control() {
  static const UmfpackControl c;
  return c.control;
}

void check_square(const SparseMatrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("LU factorization needs a square matrix, got " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()));
  }
}

}  // namespace

SymbolicLu::SymbolicLu(const SparseMatrix& a)
    : n_(a.rows()),
      row_offsets_(a.row_offsets().begin(), a.row_offsets().end()),
      col_indices_(a.col_indices().begin(), a.col_indices().end()) {
  check_square(a);
  double info[UMFPACK_INFO];
  const int status = umfpack_di_symbolic(n_, n_, row_offsets_.data(), col_indices_.data(), a.values().data(),
                                         &handle_, umf_control(), info);
  if (status != UMFPACK_OK) {
    throw std::runtime_error("sparse symbolic analysis failed (UMFPACK status " + std::to_string(status) + ")");
  }
}

SymbolicLu::~SymbolicLu() {
  if (handle_ != nullptr) umfpack_di_free_symbolic(&handle_);
}

bool SymbolicLu::matches(const SparseMatrix& a) const {
  return a.rows() == n_ && a.cols() == n_ && std::equal(row_offsets_.begin(), row_offsets_.end(),
                                                        a.row_offsets().begin(), a.row_offsets().end()) &&
         std::equal(col_indices_.begin(), col_indices_.end(), a.col_indices().begin(), a.col_indices().end());
}

LuFactorization::LuFactorization(const SparseMatrix& a, std::shared_ptr<const SymbolicLu> symbolic)
    : n_(a.rows()),
      symbolic_(std::move(symbolic)),
      row_offsets_(a.row_offsets().begin(), a.row_offsets().end()),
      col_indices_(a.col_indices().begin(), a.col_indices().end()),
      values_(a.values().begin(), a.values().end()) {
  check_square(a);
  if (n_ == 0) return;
  if (symbolic_ && !symbolic_->matches(a)) {
    throw std::invalid_argument("symbolic analysis was computed for a different sparsity pattern");
  }
  if (!symbolic_) symbolic_ = std::make_shared<const SymbolicLu>(a);

  double info[UMFPACK_INFO];
  const int status = umfpack_di_numeric(row_offsets_.data(), col_indices_.data(), values_.data(),
                                        symbolic_->handle_, &numeric_, umf_control(), info);
  if (status == UMFPACK_WARNING_singular_matrix) {
    umfpack_di_free_numeric(&numeric_);
    throw SingularMatrixError("matrix is singular: zero pivot encountered");
  }
  if (status != UMFPACK_OK) {
    if (numeric_ != nullptr) umfpack_di_free_numeric(&numeric_);
    throw std::runtime_error("sparse LU factorization failed (UMFPACK status " + std::to_string(status) + ")");
  }

  std::vector<double> udiag(n_);
  int do_recip = 0;
  umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, udiag.data(),
                         &do_recip, nullptr, numeric_);
  const double threshold = kSingularPivotTolerance * a.max_abs();
  for (int i = 0; i < n_; ++i) {
    if (!(std::abs(udiag[i]) > threshold)) {
      umfpack_di_free_numeric(&numeric_);
      throw SingularMatrixError("matrix is numerically singular: pivot " + std::to_string(i) + " has magnitude " +
                                std::to_string(std::abs(udiag[i])));
    }
  }
}

LuFactorization::~LuFactorization() {
  if (numeric_ != nullptr) umfpack_di_free_numeric(&numeric_);
}

LuFactorization::LuFactorization(LuFactorization&& other) noexcept
    : n_(other.n_),
      symbolic_(std::move(other.symbolic_)),
      row_offsets_(std::move(other.row_offsets_)),
      col_indices_(std::move(other.col_indices_)),
      values_(std::move(other.values_)),
      numeric_(other.numeric_) {
  other.numeric_ = nullptr;
  other.n_ = 0;
}

LuFactorization& LuFactorization::operator=(LuFactorization&& other) noexcept {
  if (this != &other) {
    if (numeric_ != nullptr) umfpack_di_free_numeric(&numeric_);
    n_ = other.n_;
    symbolic_ = std::move(other.symbolic_);
    row_offsets_ = std::move(other.row_offsets_);
    col_indices_ = std::move(other.col_indices_);
    values_ = std::move(other.values_);
    numeric_ = other.numeric_;
    other.numeric_ = nullptr;
    other.n_ = 0;
  }
  return *this;
}

std::vector<double> LuFactorization::solve(std::span<const double> b) const {
  if (static_cast<int>(b.size()) != n_) {
    throw std::invalid_argument("right-hand side has length " + std::to_string(b.size()) + ", expected " +
                                std::to_string(n_));
  }
  std::vector<double> x(n_, 0.0);
  if (n_ == 0) return x;
  double info[UMFPACK_INFO];
  const int status = umfpack_di_solve(UMFPACK_At, row_offsets_.data(), col_indices_.data(), values_.data(),
                                      x.data(), b.data(), numeric_, umf_control(), info);
  if (status != UMFPACK_OK) {
    throw std::runtime_error("sparse triangular solve failed (UMFPACK status " + std::to_string(status) + ")");
  }
  return x;
}

double norm_inf(const SparseMatrix& a) {
  const auto off = a.row_offsets();
  const auto vals = a.values();
  double m = 0.0;
  for (int r = 0; r < a.rows(); ++r) {
    double sum = 0.0;
    for (int p = off[r]; p < off[r + 1]; ++p) sum += std::abs(vals[p]);
    m = std::max(m, sum);
  }
  return m;
}

RefinedSolve solve_refined(const LuFactorization& factors, const SparseMatrix& a, std::span<const double> b,
                           double tolerance, int max_sweeps) {
  if (a.rows() != factors.size() || a.cols() != factors.size()) {
    throw std::invalid_argument("refinement matrix does not match the factorization");
  }
  RefinedSolve out;
  out.x = factors.solve(b);
  const double a_norm = norm_inf(a);
  const double b_norm = norm_inf(b);
  std::vector<double> r(b.size());
  const auto backward_error = [&] {
    std::copy(b.begin(), b.end(), r.begin());
    a.multiply_add(out.x, r, -1.0);
    const double denom = a_norm * norm_inf(out.x) + b_norm;
    return denom > 0.0 ? norm_inf(r) / denom : 0.0;
  };
  out.backward_error = backward_error();
  while (std::isfinite(out.backward_error) && out.backward_error > tolerance && out.sweeps < max_sweeps) {
    const std::vector<double> dx = factors.solve(r);
    for (std::size_t i = 0; i < dx.size(); ++i) out.x[i] += dx[i];
    ++out.sweeps;
    const double previous = out.backward_error;
    out.backward_error = backward_error();
    if (!(out.backward_error < 0.1 * previous)) break;
  }
  out.converged = std::isfinite(out.backward_error) && out.backward_error <= tolerance;
  return out;
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace kvfem
