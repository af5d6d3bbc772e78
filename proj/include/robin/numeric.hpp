#pragma once

#include <functional>

#include "robin/types.hpp"

namespace robin {

/// Matrix product with an explicit shape check naming both operands.
Matrix matmul(const Matrix& a, const Matrix& b);

/// Row-wise softmax with max-subtraction for stability.
Matrix softmax_rows(const Matrix& m);

Matrix sigmoid(const Matrix& m);
Matrix relu(const Matrix& m);

inline scalar sigmoid(scalar x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Max relative error between an analytic gradient and central finite
/// differences of f around x. Relative error uses denominator
/// max(|analytic|, |numeric|, 1e-8).
scalar grad_check(const std::function<scalar(const Matrix&)>& f,
                  const Matrix& x, const Matrix& analytic_grad, scalar eps);

/// Flat-vector variant used for whole-model parameter checks.
scalar grad_check_vec(const std::function<scalar(const Vector&)>& f,
                      const Vector& x, const Vector& analytic_grad, scalar eps);

}  // namespace robin
