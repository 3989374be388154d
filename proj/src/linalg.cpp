#include "bmp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "bmp/errors.hpp"
#include "bmp/kernels.hpp"

namespace bmp::linalg {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    Matrix r = a;
    kernels::axpy(1.0, b.data(), r.data(), r.rows() * r.cols());
    return r;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    Matrix r = a;
    kernels::axpy(-1.0, b.data(), r.data(), r.rows() * r.cols());
    return r;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    Matrix r(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        double* out = r.row(i);
        const double* arow = a.row(i);
        for (std::size_t j = 0; j < k; ++j) {
            kernels::axpy(arow[j], b.row(j), out, m);
        }
    }
    return r;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix r = a;
    kernels::scale(s, r.data(), r.rows() * r.cols());
    return r;
}

Vector matvec(const Matrix& a, const Vector& x) {
    Vector y(a.rows());
    kernels::matvec(a.data(), a.rows(), a.cols(), x.data(), y.data());
    return y;
}

Matrix transpose(const Matrix& a) {
    Matrix r(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
    return r;
}

double norm1(const Matrix& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += std::fabs(a(i, j));
        best = std::max(best, s);
    }
    return best;
}

double norminf(const Matrix& a) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        best = std::max(best, kernels::asum(a.row(i), a.cols()));
    }
    return best;
}

double norminf(const Vector& v) {
    double best = 0.0;
    for (double x : v) best = std::max(best, std::fabs(x));
    return best;
}

// ============================================================================
// LU with partial pivoting
// ============================================================================

LuFactor::LuFactor(Matrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
    const std::size_t n = lu_.rows();
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::fabs(lu_(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::fabs(lu_(r, col));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) {
            singular_ = true;
            continue;
        }
        if (piv != col) {
            std::swap(perm_[piv], perm_[col]);
            for (std::size_t j = 0; j < n; ++j) std::swap(lu_(piv, j), lu_(col, j));
        }
        const double inv_piv = 1.0 / lu_(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double mult = lu_(r, col) * inv_piv;
            lu_(r, col) = mult;
            if (mult != 0.0) {
                kernels::axpy(-mult, lu_.row(col) + col + 1, lu_.row(r) + col + 1, n - col - 1);
            }
        }
    }
}

Vector LuFactor::solve(const Vector& b) const {
    if (singular_) fail(errkind::kInvariant, "LU solve on a singular matrix");
    const std::size_t n = lu_.rows();
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = b[perm_[i]] - kernels::dot(lu_.row(i), y.data(), i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        const double tail = kernels::dot(lu_.row(ii) + ii + 1, y.data() + ii + 1, n - ii - 1);
        y[ii] = (y[ii] - tail) / lu_(ii, ii);
    }
    return y;
}

Matrix LuFactor::solve(const Matrix& b) const {
    const std::size_t n = b.rows(), m = b.cols();
    Matrix r(n, m);
    Vector col(n);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = b(i, j);
        Vector x = solve(col);
        for (std::size_t i = 0; i < n; ++i) r(i, j) = x[i];
    }
    return r;
}

// ============================================================================
// Matrix exponential
// ============================================================================

namespace {

// Coefficients of the degree-13 Pade approximant to exp.
constexpr double kPade13[] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

// Largest ||A||_1 for which the degree-13 approximant is accurate unscaled.
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

Matrix expm(const Matrix& a) {
    const std::size_t n = a.rows();
    const double nrm = norm1(a);
    int squarings = 0;
    if (nrm > kTheta13) {
        squarings = static_cast<int>(std::ceil(std::log2(nrm / kTheta13)));
    }
    if (squarings > 1022) fail(errkind::kOverflow, "expm: matrix norm too large to scale");
    const Matrix s = std::ldexp(1.0, -squarings) * a;

    const Matrix s2 = s * s;
    const Matrix s4 = s2 * s2;
    const Matrix s6 = s4 * s2;
    const Matrix ident = Matrix::identity(n);

    // U = s * (s6*(b13 s6 + b11 s4 + b9 s2) + b7 s6 + b5 s4 + b3 s2 + b1 I)
    Matrix u_inner = kPade13[13] * s6 + kPade13[11] * s4 + kPade13[9] * s2;
    Matrix u = s * (s6 * u_inner + kPade13[7] * s6 + kPade13[5] * s4 + kPade13[3] * s2 +
                    kPade13[1] * ident);
    // V = s6*(b12 s6 + b10 s4 + b8 s2) + b6 s6 + b4 s4 + b2 s2 + b0 I
    Matrix v_inner = kPade13[12] * s6 + kPade13[10] * s4 + kPade13[8] * s2;
    Matrix v = s6 * v_inner + kPade13[6] * s6 + kPade13[4] * s4 + kPade13[2] * s2 +
               kPade13[0] * ident;

    LuFactor denom(v - u);
    if (denom.singular()) fail(errkind::kInvariant, "expm: singular Pade denominator");
    Matrix r = denom.solve(v + u);
    for (int i = 0; i < squarings; ++i) r = r * r;
    return r;
}

Matrix expm_series(const Matrix& a) {
    const std::size_t n = a.rows();
    Matrix acc = Matrix::identity(n);
    Matrix term = Matrix::identity(n);
    for (int k = 1; k <= 200; ++k) {
        term = (1.0 / k) * (term * a);
        acc = acc + term;
        if (norm1(term) <= 1e-18 * std::max(1.0, norm1(acc))) break;
    }
    return acc;
}

}  // namespace bmp::linalg
