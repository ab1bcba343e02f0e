#ifndef DISPML_LINALG_HPP
#define DISPML_LINALG_HPP

#include <cstddef>
#include <vector>

#include "dispml/types.hpp"

namespace dispml {

/// Small dense row-major real matrix. The block systems here are at most a
/// dozen rows, so no external linear algebra package is pulled in.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<double>& data() const { return data_; }

  DenseMatrix transpose() const;
  /// (A + A^T)/2
  DenseMatrix symmetric_part() const;
  bool is_symmetric(double tol = 1e-12) const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

/// All eigenvalues of a symmetric matrix by the cyclic Jacobi rotation
/// method, swept until every off-diagonal entry is below `tol` relative to
/// the matrix scale. Ascending order.
std::vector<double> jacobi_eigenvalues(const DenseMatrix& sym, double tol = 1e-12);

/// Smallest eigenvalue of a symmetric matrix (convenience wrapper).
double jacobi_min_eigenvalue(const DenseMatrix& sym, double tol = 1e-12);

/// Solve the dense complex system A x = b in place by Gaussian elimination
/// with partial pivoting. Throws SingularElimination when the best pivot
/// magnitude drops below `tol` times the largest initial entry.
std::vector<cplx> solve_complex(std::vector<cplx> a, std::size_t n,
                                std::vector<cplx> b, double tol = 1e-12);

}  // namespace dispml

#endif
