#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sgf/error.hpp"
#include "sgf/tensor.hpp"
#include "test_util.hpp"

using namespace sgf;
using namespace sgf::test;

TEST_CASE("construction and shape checks") {
    const DenseMatrix m(2, 3, 1.5);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m(1, 2) == 1.5);
    CHECK_THROWS_AS(DenseMatrix(2, 2, std::vector<double>{1, 2, 3}), InvalidInput);
    CHECK(DenseMatrix::identity(3)(1, 1) == 1.0);
    CHECK(DenseMatrix::identity(3)(0, 1) == 0.0);
    CHECK(shape_string(m) == "2x3");
}

TEST_CASE("elementwise operators") {
    DenseMatrix a(2, 2, {1, 2, 3, 4});
    const DenseMatrix b(2, 2, {4, 3, 2, 1});
    a += b;
    CHECK(a == DenseMatrix(2, 2, 5.0));
    a -= b;
    CHECK(a == DenseMatrix(2, 2, {1, 2, 3, 4}));
    a *= 2.0;
    CHECK(a == DenseMatrix(2, 2, {2, 4, 6, 8}));
    a.axpy(-1.0, b);
    CHECK(a == DenseMatrix(2, 2, {-2, 1, 4, 7}));
    CHECK_THROWS_AS(a += DenseMatrix(1, 2), InvalidInput);
}

TEST_CASE("products against Eigen") {
    Rng rng(1);
    const DenseMatrix a = random_matrix(7, 5, rng);
    const DenseMatrix b = random_matrix(5, 4, rng);
    const DenseMatrix c = random_matrix(7, 4, rng);
    CHECK((to_eigen(matmul(a, b)) - to_eigen(a) * to_eigen(b)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((to_eigen(matmul_tn(a, c)) - to_eigen(a).transpose() * to_eigen(c)).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK((to_eigen(matmul_nt(c, b)) - to_eigen(c) * to_eigen(b).transpose()).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK(transpose(transpose(a)) == a);
    CHECK(inner(a, a) == doctest::Approx(to_eigen(a).squaredNorm()));
    CHECK_THROWS_AS(matmul(a, a), InvalidInput);
}

TEST_CASE("finiteness and differences") {
    DenseMatrix a(2, 2, 1.0);
    CHECK(a.all_finite());
    a(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(a.all_finite());
    a(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(a.all_finite());
    CHECK(max_abs_diff(DenseMatrix(1, 2, {1, 2}), DenseMatrix(1, 2, {1.5, 1})) == 1.0);
}
