#include <doctest.h>

#include <cmath>

#include "bmp/errors.hpp"
#include "bmp/linalg.hpp"

using namespace bmp;
using linalg::Matrix;
using linalg::Vector;

namespace {

Matrix two_state_generator() {
    Matrix a(2, 2);
    a(0, 0) = 0.0;
    a(0, 1) = 1.0;
    a(1, 0) = 1.0;
    a(1, 1) = 1.0;
    return a;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) m = std::max(m, std::abs(a(r, c) - b(r, c)));
    return m;
}

}  // namespace

TEST_CASE("matrix operators and norms") {
    Matrix a(2, 3);
    a(0, 0) = 1;  a(0, 1) = -2; a(0, 2) = 3;
    a(1, 0) = -4; a(1, 1) = 5;  a(1, 2) = -6;
    CHECK(linalg::norminf(a) == doctest::Approx(15.0));  // row 1
    CHECK(linalg::norm1(a) == doctest::Approx(9.0));     // column 2

    const auto at = linalg::transpose(a);
    CHECK(at.rows() == 3);
    CHECK(at(2, 1) == -6);

    const auto s = 2.0 * a;
    CHECK(s(1, 2) == -12.0);

    const Vector x{1.0, 0.5, -1.0};
    const auto y = linalg::matvec(a, x);
    CHECK(y[0] == doctest::Approx(1 - 1 - 3));
    CHECK(y[1] == doctest::Approx(-4 + 2.5 + 6));
}

TEST_CASE("LU solves a known system and round-trips") {
    Matrix a(3, 3);
    a(0, 0) = 2;  a(0, 1) = 1;  a(0, 2) = 1;
    a(1, 0) = 4;  a(1, 1) = -6; a(1, 2) = 0;
    a(2, 0) = -2; a(2, 1) = 7;  a(2, 2) = 2;
    const linalg::LuFactor lu(a);
    REQUIRE_FALSE(lu.singular());
    const Vector b{5.0, -2.0, 9.0};
    const auto x = lu.solve(b);
    const auto bx = linalg::matvec(a, x);
    for (int i = 0; i < 3; ++i) CHECK(bx[static_cast<std::size_t>(i)] == doctest::Approx(b[static_cast<std::size_t>(i)]).epsilon(1e-12));

    // Matrix right-hand side: A * A^{-1} = I.
    const auto inv = lu.solve(Matrix::identity(3));
    CHECK(max_abs_diff(a * inv, Matrix::identity(3)) < 1e-12);
}

TEST_CASE("LU flags singular input") {
    Matrix a(2, 2);
    a(0, 0) = 1; a(0, 1) = 2;
    a(1, 0) = 2; a(1, 1) = 4;
    const linalg::LuFactor lu(a);
    CHECK(lu.singular());
}

TEST_CASE("expm of a diagonal matrix exponentiates the diagonal") {
    Matrix a(3, 3);
    a(0, 0) = 0.5; a(1, 1) = -1.0; a(2, 2) = 2.0;
    const auto e = linalg::expm(a);
    CHECK(e(0, 0) == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
    CHECK(e(1, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(e(2, 2) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
    CHECK(e(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("expm of a nilpotent matrix is exact") {
    Matrix a(2, 2);
    a(0, 1) = 3.25;
    const auto e = linalg::expm(a);
    CHECK(e(0, 0) == doctest::Approx(1.0));
    CHECK(e(0, 1) == doctest::Approx(3.25));
    CHECK(e(1, 0) == doctest::Approx(0.0));
    CHECK(e(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("expm agrees with the series route at modest norm") {
    auto a = two_state_generator();
    for (const double scale : {0.1, 0.7, 1.9}) {
        const auto p = linalg::expm(scale * a);
        const auto s = linalg::expm_series(scale * a);
        CHECK(max_abs_diff(p, s) < 1e-12 * linalg::norminf(p));
    }
}

TEST_CASE("expm satisfies the semigroup identity") {
    const auto a = two_state_generator();
    const auto e1 = linalg::expm(1.3 * a);
    const auto e2 = linalg::expm(2.1 * a);
    const auto e3 = linalg::expm(3.4 * a);
    CHECK(max_abs_diff(e1 * e2, e3) < 1e-11 * linalg::norminf(e3));
}

TEST_CASE("expm squaring path stays consistent at large norm") {
    const auto a = two_state_generator();
    const auto half = linalg::expm(25.0 * a);
    const auto full = linalg::expm(50.0 * a);
    CHECK(max_abs_diff(half * half, full) < 1e-10 * linalg::norminf(full));
}
