#include "bmp/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace bmp::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double asum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i]);
    return acc;
}

double sumsq_dev(const double* a, std::size_t n, double mu) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - mu;
        acc += d * d;
    }
    return acc;
}

void matvec(const double* A, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot(A + r * cols, x, cols);
}

}  // namespace scalar

namespace {

Backend resolve_backend() {
    const char* env = std::getenv("BMP_SIMD");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return Backend::kScalar;
#if defined(__x86_64__)
        if (std::strcmp(env, "avx2") == 0) return Backend::kAvx2;
#endif
        // "auto" or anything unrecognized falls through to detection.
    }
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Backend::kAvx2;
#endif
    return Backend::kScalar;
}

}  // namespace

Backend active_backend() {
    static const Backend backend = resolve_backend();
    return backend;
}

const char* backend_name() {
    return active_backend() == Backend::kAvx2 ? "avx2" : "scalar";
}

#if defined(__x86_64__)
#define BMP_DISPATCH(fn, ...) \
    (active_backend() == Backend::kAvx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define BMP_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(const double* a, const double* b, std::size_t n) { return BMP_DISPATCH(dot, a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { BMP_DISPATCH(axpy, alpha, x, y, n); }
void scale(double alpha, double* x, std::size_t n) { BMP_DISPATCH(scale, alpha, x, n); }
double sum(const double* a, std::size_t n) { return BMP_DISPATCH(sum, a, n); }
double asum(const double* a, std::size_t n) { return BMP_DISPATCH(asum, a, n); }
double sumsq_dev(const double* a, std::size_t n, double mu) { return BMP_DISPATCH(sumsq_dev, a, n, mu); }
void matvec(const double* A, std::size_t rows, std::size_t cols, const double* x, double* y) {
    BMP_DISPATCH(matvec, A, rows, cols, x, y);
}

#undef BMP_DISPATCH

}  // namespace bmp::kernels
