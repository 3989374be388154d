#pragma once

#include <cstddef>
#include <vector>

namespace bmp::linalg {

using Vector = std::vector<double>;

/// Dense row-major matrix. Sized for the state-space cap (n <= 64), so all
/// operations favor exactness and simplicity over blocking.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    [[nodiscard]] double* data() { return a_.data(); }
    [[nodiscard]] const double* data() const { return a_.data(); }
    [[nodiscard]] const double* row(std::size_t r) const { return a_.data() + r * cols_; }
    [[nodiscard]] double* row(std::size_t r) { return a_.data() + r * cols_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

Vector matvec(const Matrix& a, const Vector& x);
Matrix transpose(const Matrix& a);

/// Max absolute column sum.
double norm1(const Matrix& a);
/// Max absolute row sum.
double norminf(const Matrix& a);
double norminf(const Vector& v);

/// LU factorization with partial pivoting, kept for repeated solves against
/// the same matrix (resolvent applications, Pade denominators).
class LuFactor {
public:
    explicit LuFactor(Matrix a);

    /// Solve A x = b.
    [[nodiscard]] Vector solve(const Vector& b) const;
    /// Solve A X = B column by column.
    [[nodiscard]] Matrix solve(const Matrix& b) const;
    [[nodiscard]] bool singular() const { return singular_; }

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
    bool singular_ = false;
};

/// Matrix exponential by scaling and squaring with the degree-13 Pade
/// approximant. Entries of exp(A) up to ~1e308 are representable; callers
/// guard the spectral scale before asking for larger horizons.
Matrix expm(const Matrix& a);

/// Truncated Taylor series for exp(A), summed to machine convergence.
/// Accurate only for modest ||A||; kept as the independent cross-check.
Matrix expm_series(const Matrix& a);

}  // namespace bmp::linalg
