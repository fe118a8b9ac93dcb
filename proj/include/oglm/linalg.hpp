#ifndef OGLM_LINALG_HPP
#define OGLM_LINALG_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "oglm/errors.hpp"

namespace oglm {

// Solve A x = b for symmetric positive definite A via Cholesky.
inline Eigen::VectorXd chol_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    if (A.rows() != A.cols()) throw ShapeError("chol_solve: A not square");
    if (A.rows() != b.size()) throw ShapeError("chol_solve: b length != A order");
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefiniteError("chol_solve: matrix not positive definite");
    return llt.solve(b);
}

}  // namespace oglm

#endif  // OGLM_LINALG_HPP
