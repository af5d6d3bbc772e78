#include <doctest.h>

#include "helpers.hpp"
#include "robin/numeric.hpp"

using namespace robin;
using test_helpers::random_matrix;

TEST_CASE("matmul identity and hand cases") {
    Matrix a(2, 2);
    a << 1, 2, 3, 4;
    const Matrix out = matmul(Matrix::Identity(2, 2), a);
    CHECK(out.isApprox(a));

    Matrix r(1, 2), c(2, 1);
    r << 1, 2;
    c << 3, 4;
    CHECK(matmul(r, c)(0, 0) == doctest::Approx(11).epsilon(1e-15));
}

TEST_CASE("matmul matches triple-loop oracle on random shapes") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const index_t m = 1 + static_cast<index_t>(rng.uniform_int(16));
        const index_t k = 1 + static_cast<index_t>(rng.uniform_int(16));
        const index_t n = 1 + static_cast<index_t>(rng.uniform_int(16));
        const Matrix a = random_matrix(m, k, 100 + trial);
        const Matrix b = random_matrix(k, n, 200 + trial);
        const Matrix got = matmul(a, b);
        for (index_t i = 0; i < m; ++i)
            for (index_t j = 0; j < n; ++j) {
                scalar acc = 0;
                for (index_t t = 0; t < k; ++t) acc += a(i, t) * b(t, j);
                CHECK(std::abs(got(i, j) - acc) < 1e-12);
            }
    }
}

TEST_CASE("matmul shape error names both shapes") {
    const Matrix a = Matrix::Zero(2, 3);
    const Matrix b = Matrix::Zero(4, 5);
    try {
        matmul(a, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2x3") != std::string::npos);
        CHECK(msg.find("4x5") != std::string::npos);
    }
}

TEST_CASE("softmax_rows base cases") {
    Matrix z(1, 2);
    z << 0, 0;
    const Matrix s = softmax_rows(z);
    CHECK(s(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s(0, 1) == doctest::Approx(0.5).epsilon(1e-12));

    Matrix big(1, 2);
    big << 1000, 0;
    const Matrix sb = softmax_rows(big);
    CHECK(std::isfinite(sb(0, 0)));
    CHECK(sb(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sb(0, 1) < 1e-300);
}

TEST_CASE("softmax_rows matches naive oracle in extended precision") {
    const Matrix m = random_matrix(3, 3, 42);
    const Matrix s = softmax_rows(m);
    for (index_t i = 0; i < 3; ++i) {
        long double denom = 0;
        for (index_t j = 0; j < 3; ++j) denom += std::exp((long double)m(i, j));
        for (index_t j = 0; j < 3; ++j) {
            const long double want = std::exp((long double)m(i, j)) / denom;
            CHECK(std::abs(s(i, j) - (scalar)want) < 1e-12);
        }
    }
}

TEST_CASE("softmax_rows rows sum to one for random inputs") {
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix m = 50.0 * random_matrix(4, 6, 900 + trial);
        const Matrix s = softmax_rows(m);
        for (index_t i = 0; i < s.rows(); ++i) {
            CHECK(std::abs(s.row(i).sum() - 1.0) < 1e-9);
            CHECK(s.row(i).minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("sigmoid and relu elementwise") {
    Matrix z = Matrix::Zero(1, 1);
    CHECK(sigmoid(z)(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    Matrix m(1, 2);
    m << -3, 3;
    const Matrix r = relu(m);
    CHECK(r(0, 0) == 0.0);
    CHECK(r(0, 1) == 3.0);

    const Matrix x = random_matrix(5, 5, 11);
    const Matrix sum = sigmoid(x) + sigmoid(Matrix(-x));
    CHECK((sum.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("grad_check on linear and quadratic maps") {
    const Matrix x = random_matrix(3, 4, 5);

    auto f_sum = [](const Matrix& m) { return m.sum(); };
    CHECK(grad_check(f_sum, x, Matrix::Ones(3, 4), 1e-4) < 1e-9);

    auto f_sq = [](const Matrix& m) { return m.array().square().sum(); };
    CHECK(grad_check(f_sq, x, Matrix(2.0 * x), 1e-4) < 1e-6);
}

TEST_CASE("grad_check rejects non-finite probes") {
    const Matrix x = Matrix::Zero(1, 1);
    auto f = [](const Matrix& m) { return std::log(m(0, 0)); };  // NaN at -eps
    CHECK_THROWS_AS(grad_check(f, x, Matrix::Zero(1, 1), 1e-4), NumericError);
}
