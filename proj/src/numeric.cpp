#include "robin/numeric.hpp"

#include <cmath>
#include <sstream>

namespace robin {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        std::ostringstream os;
        os << "matmul: shape mismatch (" << a.rows() << "x" << a.cols()
           << ") * (" << b.rows() << "x" << b.cols() << ")";
        throw ShapeError(os.str());
    }
    return a * b;
}

Matrix softmax_rows(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (index_t i = 0; i < m.rows(); ++i) {
        const scalar mx = m.row(i).maxCoeff();
        out.row(i) = (m.row(i).array() - mx).exp();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

Matrix sigmoid(const Matrix& m) {
    return m.unaryExpr([](scalar x) { return sigmoid(x); });
}

Matrix relu(const Matrix& m) {
    return m.cwiseMax(scalar(0));
}

scalar grad_check(const std::function<scalar(const Matrix&)>& f,
                  const Matrix& x, const Matrix& analytic_grad, scalar eps) {
    if (eps <= 0) throw std::invalid_argument("grad_check: eps must be > 0");
    if (x.rows() != analytic_grad.rows() || x.cols() != analytic_grad.cols())
        throw ShapeError("grad_check: gradient shape does not match x");
    scalar max_rel = 0.0;
    Matrix probe = x;
    for (index_t i = 0; i < x.rows(); ++i) {
        for (index_t j = 0; j < x.cols(); ++j) {
            const scalar orig = probe(i, j);
            probe(i, j) = orig + eps;
            const scalar fp = f(probe);
            probe(i, j) = orig - eps;
            const scalar fm = f(probe);
            probe(i, j) = orig;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw NumericError("grad_check: non-finite f at probe point");
            const scalar num = (fp - fm) / (2.0 * eps);
            const scalar ana = analytic_grad(i, j);
            const scalar denom =
                std::max({std::abs(num), std::abs(ana), scalar(1e-8)});
            max_rel = std::max(max_rel, std::abs(num - ana) / denom);
        }
    }
    return max_rel;
}

scalar grad_check_vec(const std::function<scalar(const Vector&)>& f,
                      const Vector& x, const Vector& analytic_grad, scalar eps) {
    if (eps <= 0) throw std::invalid_argument("grad_check: eps must be > 0");
    if (x.size() != analytic_grad.size())
        throw ShapeError("grad_check: gradient size does not match x");
    scalar max_rel = 0.0;
    Vector probe = x;
    for (index_t i = 0; i < x.size(); ++i) {
        const scalar orig = probe(i);
        probe(i) = orig + eps;
        const scalar fp = f(probe);
        probe(i) = orig - eps;
        const scalar fm = f(probe);
        probe(i) = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NumericError("grad_check: non-finite f at probe point");
        const scalar num = (fp - fm) / (2.0 * eps);
        const scalar ana = analytic_grad(i);
        const scalar denom = std::max({std::abs(num), std::abs(ana), scalar(1e-8)});
        max_rel = std::max(max_rel, std::abs(num - ana) / denom);
    }
    return max_rel;
}

}  // namespace robin
