#include <vector>

#include "salisa/kernels.hpp"

namespace salisa::kernels {

namespace {

// Row k of A (upper triangle mirrored afterwards) and both entries of b(k, :).
void accumulate_row(const RowMatrixXd& Bt, std::span<const double> weights, const Eigen::MatrixX2d& r, Eigen::Index k,
                    std::vector<double>& scratch, Eigen::MatrixXd& A, Eigen::MatrixX2d& b) {
  const Eigen::Index cells = Bt.cols();
  const double* bk = Bt.row(k).data();
  for (Eigen::Index c = 0; c < cells; ++c) scratch[static_cast<std::size_t>(c)] = weights[c] * bk[c];
  double bx = 0.0;
  double by = 0.0;
  for (Eigen::Index c = 0; c < cells; ++c) {
    bx += scratch[c] * r(c, 0);
    by += scratch[c] * r(c, 1);
  }
  b(k, 0) = bx;
  b(k, 1) = by;
  for (Eigen::Index j = k; j < Bt.rows(); ++j) {
    const double* bj = Bt.row(j).data();
    double acc = 0.0;
    for (Eigen::Index c = 0; c < cells; ++c) acc += scratch[c] * bj[c];
    A(k, j) = acc;
  }
}

void mirror(Eigen::MatrixXd& A) {
  for (Eigen::Index k = 0; k < A.rows(); ++k) {
    for (Eigen::Index j = k + 1; j < A.cols(); ++j) A(j, k) = A(k, j);
  }
}

}  // namespace

void normal_equations_serial(const RowMatrixXd& Bt, std::span<const double> weights, const Eigen::MatrixX2d& r,
                             Eigen::MatrixXd& A, Eigen::MatrixX2d& b) {
  const Eigen::Index n = Bt.rows();
  A.resize(n, n);
  b.resize(n, 2);
  std::vector<double> scratch(static_cast<std::size_t>(Bt.cols()));
  for (Eigen::Index k = 0; k < n; ++k) accumulate_row(Bt, weights, r, k, scratch, A, b);
  mirror(A);
}

void normal_equations_omp(const RowMatrixXd& Bt, std::span<const double> weights, const Eigen::MatrixX2d& r,
                          Eigen::MatrixXd& A, Eigen::MatrixX2d& b) {
  const Eigen::Index n = Bt.rows();
  A.resize(n, n);
  b.resize(n, 2);
#pragma omp parallel
  {
    std::vector<double> scratch(static_cast<std::size_t>(Bt.cols()));
#pragma omp for schedule(dynamic, 8)
    for (Eigen::Index k = 0; k < n; ++k) accumulate_row(Bt, weights, r, k, scratch, A, b);
  }
  mirror(A);
}

}  // namespace salisa::kernels
