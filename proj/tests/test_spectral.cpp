#include <doctest.h>

#include <cmath>
#include <string>

#include "bmp/errors.hpp"
#include "bmp/model.hpp"
#include "bmp/spectral.hpp"

using namespace bmp;
using linalg::Matrix;

namespace {

const std::string kModels = BMP_MODELS_DIR;
const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

spectral::SpectralData two_state_data() {
    const auto m = model::load_model(kModels + "/two_state.json");
    return spectral::compute_eigendata(model::mean_generator(m));
}

}  // namespace

TEST_CASE("two-state eigendata matches the closed form") {
    const auto sd = two_state_data();
    CHECK(sd.lambda == doctest::Approx(kGolden).epsilon(1e-12));
    REQUIRE(sd.spectral_gap.has_value());
    CHECK(*sd.spectral_gap == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
    CHECK(sd.supercritical);

    // phi ~ (1, golden) scaled so that phi_tilde . phi = 1 with phi_tilde a
    // probability vector: phi_tilde = (1, golden)/(1 + golden).
    CHECK(sd.phi_tilde[0] == doctest::Approx(1.0 / (1.0 + kGolden)).epsilon(1e-12));
    CHECK(sd.phi_tilde[1] == doctest::Approx(kGolden / (1.0 + kGolden)).epsilon(1e-12));
    const double c = (1.0 + kGolden) / (2.0 + kGolden);
    CHECK(sd.phi[0] == doctest::Approx(c).epsilon(1e-12));
    CHECK(sd.phi[1] == doctest::Approx(c * kGolden).epsilon(1e-12));

    CHECK(sd.phi_tilde[0] + sd.phi_tilde[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sd.phi_tilde[0] * sd.phi[0] + sd.phi_tilde[1] * sd.phi[1] ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sd.right_residual < 1e-12);
    CHECK(sd.left_residual < 1e-12);
}

TEST_CASE("single-state eigendata is trivial and has no gap") {
    const auto m = model::load_model(kModels + "/yule.json");
    const auto sd = spectral::compute_eigendata(model::mean_generator(m));
    CHECK(sd.lambda == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sd.phi[0] == doctest::Approx(1.0));
    CHECK(sd.phi_tilde[0] == doctest::Approx(1.0));
    CHECK_FALSE(sd.spectral_gap.has_value());
    CHECK(sd.supercritical);
}

TEST_CASE("killed motion is subcritical but still has eigendata") {
    const auto m = model::load_model(kModels + "/motion_killed.json");
    const auto sd = spectral::compute_eigendata(model::mean_generator(m));
    CHECK(sd.lambda == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK_FALSE(sd.supercritical);
    REQUIRE(sd.spectral_gap.has_value());
    CHECK(*sd.spectral_gap == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("reducible support is rejected") {
    Matrix a(2, 2);
    a(0, 0) = 0.0; a(0, 1) = 1.0;
    a(1, 0) = 0.0; a(1, 1) = 0.5;  // no path back from the second state
    try {
        (void)spectral::compute_eigendata(a);
        FAIL("expected reducible error");
    } catch (const Error& e) {
        CHECK(std::string(e.kind()) == errkind::kReducible);
    }
}

TEST_CASE("near-degenerate leading pair is rejected") {
    Matrix a(2, 2);
    a(0, 0) = 1.0; a(0, 1) = 1e-9;
    a(1, 0) = 1e-9; a(1, 1) = 1.0;  // eigenvalues 1 +- 1e-9
    try {
        (void)spectral::compute_eigendata(a);
        FAIL("expected non-simple-leading error");
    } catch (const Error& e) {
        CHECK(std::string(e.kind()) == errkind::kNonSimpleLeading);
    }
}

TEST_CASE("h1 gap matches the rank-one deficit and decays at the gap rate") {
    const auto m = model::load_model(kModels + "/two_state.json");
    const auto a = model::mean_generator(m);
    const auto sd = two_state_data();

    // Independently computed with full-precision quadrature-free algebra.
    CHECK(spectral::h1_gap(a, sd, 3.0) ==
          doctest::Approx(0.0019753847145078107).epsilon(1e-10));

    const double ratio = spectral::h1_gap(a, sd, 6.0) / spectral::h1_gap(a, sd, 3.0);
    CHECK(ratio == doctest::Approx(std::exp(-3.0 * std::sqrt(5.0))).epsilon(1e-6));

    CHECK(spectral::h1_gap(a, sd, 0.0) > 0.1);  // far from product form at t = 0
}

TEST_CASE("semigroup application matches the matrix exponential") {
    const auto m = model::load_model(kModels + "/two_state.json");
    const auto a = model::mean_generator(m);
    const linalg::Vector f{1.0, 0.5};
    const auto e = linalg::expm(1.7 * a);
    const auto direct = linalg::matvec(e, f);
    const auto via = spectral::semigroup_apply(a, 1.7, f);
    CHECK(via[0] == doctest::Approx(direct[0]).epsilon(1e-13));
    CHECK(via[1] == doctest::Approx(direct[1]).epsilon(1e-13));
}

TEST_CASE("semigroup guards its domain") {
    const auto m = model::load_model(kModels + "/yule.json");
    const auto a = model::mean_generator(m);
    const linalg::Vector f{1.0};
    try {
        (void)spectral::semigroup_apply(a, -0.5, f);
        FAIL("expected invariant error");
    } catch (const Error& e) {
        CHECK(std::string(e.kind()) == errkind::kInvariant);
    }
    try {
        (void)spectral::semigroup_apply(a, 800.0, f);  // lambda t > 700
        FAIL("expected overflow error");
    } catch (const Error& e) {
        CHECK(std::string(e.kind()) == errkind::kOverflow);
    }
}
