#pragma once

#include <cstddef>

// ============================================================================
// Dense arithmetic kernels.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant compiled in its own translation unit. The dispatcher picks
// a backend once per process from CPU capabilities; BMP_SIMD=scalar|avx2|auto
// overrides the choice. Backends are equivalence-tested against each other;
// they are not required to agree bitwise (vector accumulators reassociate),
// but a fixed backend is deterministic for fixed input.
// ============================================================================

namespace bmp::kernels {

enum class Backend { kScalar, kAvx2 };

/// Backend selected for this process (resolves on first call).
Backend active_backend();
const char* backend_name();

// Dispatched entry points.
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
double sum(const double* a, std::size_t n);
double asum(const double* a, std::size_t n);
/// Sum of squared deviations from mu.
double sumsq_dev(const double* a, std::size_t n, double mu);
/// y = A x with A row-major (rows x cols), y of length rows.
void matvec(const double* A, std::size_t rows, std::size_t cols, const double* x, double* y);

// Reference implementations, callable directly (tests compare against these).
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
double sum(const double* a, std::size_t n);
double asum(const double* a, std::size_t n);
double sumsq_dev(const double* a, std::size_t n, double mu);
void matvec(const double* A, std::size_t rows, std::size_t cols, const double* x, double* y);
}  // namespace scalar

#if defined(__x86_64__)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
double sum(const double* a, std::size_t n);
double asum(const double* a, std::size_t n);
double sumsq_dev(const double* a, std::size_t n, double mu);
void matvec(const double* A, std::size_t rows, std::size_t cols, const double* x, double* y);
}  // namespace avx2
#endif

}  // namespace bmp::kernels
