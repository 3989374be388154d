#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "bmp/kernels.hpp"

using namespace bmp;

namespace {

// Deterministic, irregular fill so reassociation differences would show.
std::vector<double> fill(std::size_t n, double phase) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::sin(0.7 * static_cast<double>(i) + phase) * (1.0 + 0.01 * static_cast<double>(i % 13));
    return v;
}

constexpr std::size_t kSizes[] = {0, 1, 3, 4, 7, 8, 17, 64, 1000};

}  // namespace

TEST_CASE("dispatched kernels agree with the scalar reference") {
    for (const auto n : kSizes) {
        auto a = fill(n, 0.2);
        auto b = fill(n, 1.9);

        CHECK(kernels::dot(a.data(), b.data(), n) ==
              doctest::Approx(kernels::scalar::dot(a.data(), b.data(), n)).epsilon(1e-12));
        CHECK(kernels::sum(a.data(), n) ==
              doctest::Approx(kernels::scalar::sum(a.data(), n)).epsilon(1e-12));
        CHECK(kernels::asum(a.data(), n) ==
              doctest::Approx(kernels::scalar::asum(a.data(), n)).epsilon(1e-12));
        CHECK(kernels::sumsq_dev(a.data(), n, 0.25) ==
              doctest::Approx(kernels::scalar::sumsq_dev(a.data(), n, 0.25)).epsilon(1e-12));

        auto y1 = fill(n, 0.4);
        auto y2 = y1;
        kernels::axpy(1.25, a.data(), y1.data(), n);
        kernels::scalar::axpy(1.25, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));

        kernels::scale(-0.75, y1.data(), n);
        kernels::scalar::scale(-0.75, y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));
    }
}

TEST_CASE("matvec matches a plain loop") {
    const std::size_t rows = 5, cols = 7;
    auto a = fill(rows * cols, 0.1);
    auto x = fill(cols, 2.3);
    std::vector<double> y(rows), ref(rows);
    kernels::matvec(a.data(), rows, cols, x.data(), y.data());
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += a[r * cols + c] * x[c];
        ref[r] = acc;
    }
    for (std::size_t r = 0; r < rows; ++r) CHECK(y[r] == doctest::Approx(ref[r]).epsilon(1e-13));
}

#if defined(__x86_64__)
TEST_CASE("avx2 backend agrees with scalar when the cpu has it") {
    if (!(__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))) return;
    for (const auto n : kSizes) {
        auto a = fill(n, 0.6);
        auto b = fill(n, 2.8);
        CHECK(kernels::avx2::dot(a.data(), b.data(), n) ==
              doctest::Approx(kernels::scalar::dot(a.data(), b.data(), n)).epsilon(1e-12));
        CHECK(kernels::avx2::sum(a.data(), n) ==
              doctest::Approx(kernels::scalar::sum(a.data(), n)).epsilon(1e-12));
        CHECK(kernels::avx2::asum(a.data(), n) ==
              doctest::Approx(kernels::scalar::asum(a.data(), n)).epsilon(1e-12));
        CHECK(kernels::avx2::sumsq_dev(a.data(), n, -0.4) ==
              doctest::Approx(kernels::scalar::sumsq_dev(a.data(), n, -0.4)).epsilon(1e-12));
    }
    const std::size_t rows = 6, cols = 9;
    auto a = fill(rows * cols, 1.0);
    auto x = fill(cols, 0.9);
    std::vector<double> y1(rows), y2(rows);
    kernels::avx2::matvec(a.data(), rows, cols, x.data(), y1.data());
    kernels::scalar::matvec(a.data(), rows, cols, x.data(), y2.data());
    for (std::size_t r = 0; r < rows; ++r) CHECK(y1[r] == doctest::Approx(y2[r]).epsilon(1e-12));
}
#endif

TEST_CASE("backend reporting is consistent") {
    const auto be = kernels::active_backend();
    const char* name = kernels::backend_name();
    REQUIRE(name != nullptr);
    if (be == kernels::Backend::kScalar) CHECK(std::string(name) == "scalar");
    if (be == kernels::Backend::kAvx2) CHECK(std::string(name) == "avx2");
}

TEST_CASE("fixed backend is deterministic") {
    auto a = fill(257, 0.3);
    auto b = fill(257, 4.1);
    const double d1 = kernels::dot(a.data(), b.data(), a.size());
    const double d2 = kernels::dot(a.data(), b.data(), a.size());
    CHECK(d1 == d2);
}
