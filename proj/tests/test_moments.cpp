#include <doctest.h>

#include <cmath>
#include <string>

#include "bmp/errors.hpp"
#include "bmp/model.hpp"
#include "bmp/moments.hpp"
#include "bmp/spectral.hpp"

using namespace bmp;
using linalg::Vector;

namespace {

const std::string kModels = BMP_MODELS_DIR;

struct Fixture {
    model::BmpModel m;
    spectral::SpectralData sd;
};

Fixture load(const std::string& name) {
    Fixture fx;
    fx.m = model::load_model(kModels + "/" + name);
    fx.sd = spectral::compute_eigendata(model::mean_generator(fx.m));
    return fx;
}

double factorial_d(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

std::string error_kind(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return "";
}

}  // namespace

TEST_CASE("resolvent application inverts (q I - A)") {
    const auto fx = load("two_state.json");
    const auto a = model::mean_generator(fx.m);
    const Vector g{0.3, -1.1};
    const double q = 2.0 * fx.sd.lambda;
    const auto x = moments::resolvent_apply(a, q, g);
    // Apply (q I - A) back.
    for (std::size_t r = 0; r < 2; ++r) {
        double acc = q * x[r];
        for (std::size_t c = 0; c < 2; ++c) acc -= a(r, c) * x[c];
        CHECK(acc == doctest::Approx(g[r]).epsilon(1e-12));
    }
    // q at or below the spectral bound is outside the resolvent set.
    CHECK(error_kind([&] { (void)moments::resolvent_apply(a, fx.sd.lambda, g); }) ==
          errkind::kNotInResolventSet);
    CHECK(error_kind([&] { (void)moments::resolvent_apply(a, fx.sd.lambda - 0.3, g); }) ==
          errkind::kNotInResolventSet);
}

TEST_CASE("yule limit moments are exactly the exponential moments") {
    const auto fx = load("yule.json");
    const auto table = moments::compute_Lk(fx.m, fx.sd, 20);
    REQUIRE(table.order_max == 20);
    for (int k = 1; k <= 20; ++k) {
        CHECK(std::abs(table.L[static_cast<std::size_t>(k)][0] - 1.0) < 1e-10);
        CHECK(table.s[static_cast<std::size_t>(k)][0] ==
              doctest::Approx(factorial_d(k)).epsilon(1e-10));
    }
}

TEST_CASE("two-state limit moments match the independent recursion run") {
    const auto fx = load("two_state.json");
    const auto table = moments::compute_Lk(fx.m, fx.sd, 20);
    // Frozen from a from-scratch evaluation of the same recursion (different
    // language and linear solver), cross-checked against quadrature below.
    CHECK(table.L[2][0] == doctest::Approx(0.8670348672044936).epsilon(1e-10));
    CHECK(table.L[2][1] == doctest::Approx(1.2868561389090296).epsilon(1e-10));
    CHECK(table.L[3][0] == doctest::Approx(0.8237701053659937).epsilon(1e-10));
    CHECK(table.L[3][1] == doctest::Approx(1.6958107553252808).epsilon(1e-10));
    CHECK(table.L[20][0] == doctest::Approx(14.123018618156838).epsilon(1e-9));
    CHECK(table.L[20][1] == doctest::Approx(239.934510287015797).epsilon(1e-9));
    CHECK(table.s[20][1] == doctest::Approx(6.8345136175170925e+20).epsilon(1e-9));
    // s_1 = phi always.
    CHECK(table.s[1][0] == doctest::Approx(fx.sd.phi[0]).epsilon(1e-14));
}

TEST_CASE("limit moments refuse subcritical input and absurd orders") {
    const auto fx = load("motion_killed.json");
    CHECK(error_kind([&] { (void)moments::compute_Lk(fx.m, fx.sd, 3); }) ==
          errkind::kNotSupercritical);

    const auto yule = load("yule.json");
    CHECK(error_kind([&] { (void)moments::compute_Lk(yule.m, yule.sd, 21); }) ==
          errkind::kCapExceeded);
}

TEST_CASE("branch source vanishes when no litter can fund two positive parts") {
    // Degenerate offspring (empty or singleton litters): every composition
    // with >= 2 positive parts is unreachable, so B_k = 0 identically.
    const auto m = model::load_model(kModels + "/degenerate.json");
    spectral::SpectralData sd;  // synthetic supercritical frame
    sd.lambda = 1.0;
    sd.phi = {1.0, 1.0};
    sd.phi_tilde = {0.5, 0.5};
    sd.supercritical = true;
    moments::MomentTable table;
    table.order_max = 4;
    table.L.assign(5, Vector{});
    table.s.assign(5, Vector{});
    table.L[1] = {1.0, 1.0};
    const auto b2 = moments::branch_moment_source(m, sd, table, 2);
    CHECK(b2[0] == 0.0);
    CHECK(b2[1] == 0.0);
}

TEST_CASE("first finite-time moment reduces to the semigroup") {
    const auto fx = load("two_state.json");
    const auto a = model::mean_generator(fx.m);
    const Vector f{1.0, 0.5};
    const auto via = moments::finite_time_moment(fx.m, fx.sd, f, 1, 1.0);
    const auto direct = spectral::semigroup_apply(a, 1.0, f);
    CHECK(via[0] == doctest::Approx(direct[0]).epsilon(1e-9));
    CHECK(via[1] == doctest::Approx(direct[1]).epsilon(1e-9));
}

TEST_CASE("yule second moment matches the closed form") {
    const auto fx = load("yule.json");
    const Vector one{1.0};
    const double t = 1.25;
    const auto m2 = moments::finite_time_moment(fx.m, fx.sd, one, 2, t);
    CHECK(m2[0] == doctest::Approx(2.0 * std::exp(2.0 * t) - std::exp(t)).epsilon(1e-7));
}

TEST_CASE("two-state scaled moments match the quadrature oracle") {
    // Frozen from adaptive quadrature of the convolution identity (1e-13
    // tolerance), entirely outside this code base.
    const auto fx = load("two_state.json");
    const Vector f{1.0, 0.5};

    const auto curve2 = moments::scaled_moment_curve(fx.m, fx.sd, f, 2, 2.0, 2);
    REQUIRE(curve2.size() == 3);
    CHECK(curve2[0][0] == doctest::Approx(1.0));        // f(a)^2 at t = 0
    CHECK(curve2[0][1] == doctest::Approx(0.25));
    CHECK(curve2[1][0] == doctest::Approx(0.5506031477805605).epsilon(2e-7));
    CHECK(curve2[1][1] == doctest::Approx(1.1229806728085832).epsilon(2e-7));
    CHECK(curve2[2][0] == doctest::Approx(0.5703493453059368).epsilon(2e-7));
    CHECK(curve2[2][1] == doctest::Approx(1.3666355870350133).epsilon(2e-7));

    const auto curve3 = moments::scaled_moment_curve(fx.m, fx.sd, f, 3, 1.0, 1);
    CHECK(curve3[1][0] == doctest::Approx(0.8518468912488399).epsilon(5e-7));
    CHECK(curve3[1][1] == doctest::Approx(2.4628865950783450).epsilon(5e-7));
}

TEST_CASE("yule delta curve is e^{-t} on the nose") {
    const auto fx = load("yule.json");
    const auto table = moments::compute_Lk(fx.m, fx.sd, 2);
    const Vector one{1.0};
    const auto delta = moments::delta_curve(fx.m, fx.sd, table, one, 2, 10.0, 50);
    REQUIRE(delta.size() == 51);
    for (std::size_t j = 0; j < delta.size(); ++j) {
        const double t = 10.0 * static_cast<double>(j) / 50.0;
        CHECK(std::abs(delta[j] - std::exp(-t)) < 1e-6);
    }
}

TEST_CASE("two-state delta curve collapses by t = 8") {
    const auto fx = load("two_state.json");
    const auto table = moments::compute_Lk(fx.m, fx.sd, 2);
    const Vector f{1.0, 0.5};
    const auto delta = moments::delta_curve(fx.m, fx.sd, table, f, 2, 8.0, 16);
    CHECK(delta[0] == doctest::Approx(1.1887489019317512).epsilon(1e-9));
    CHECK(delta[16] == doctest::Approx(5.05845652787329e-06).epsilon(0.02));
    CHECK(delta[16] < 1e-2 * delta[0]);
    double sup = 0.0;
    for (const double d : delta) sup = std::max(sup, d);
    CHECK(sup == doctest::Approx(delta[0]));  // monotone envelope here
}

TEST_CASE("grid options are validated") {
    const auto fx = load("yule.json");
    const Vector one{1.0};
    moments::GridOptions coarse;
    coarse.step = 0.5;  // t / 4: far above the t / 50 ceiling
    CHECK(error_kind([&] {
              (void)moments::finite_time_moment(fx.m, fx.sd, one, 2, 2.0, coarse);
          }) == errkind::kGridTooCoarse);

    moments::GridOptions hopeless;
    hopeless.richardson_tol = 1e-16;
    hopeless.max_halvings = 1;
    CHECK(error_kind([&] {
              (void)moments::finite_time_moment(fx.m, fx.sd, one, 2, 2.0, hopeless);
          }) == errkind::kInvariant);

    CHECK(error_kind([&] { (void)moments::finite_time_moment(fx.m, fx.sd, one, 6, 1.0); }) ==
          errkind::kCapExceeded);
    CHECK(error_kind([&] { (void)moments::finite_time_moment(fx.m, fx.sd, one, 1, 800.0); }) ==
          errkind::kOverflow);
}

TEST_CASE("carleman report on the exponential moment row diverges") {
    const auto fx = load("yule.json");
    const auto table = moments::compute_Lk(fx.m, fx.sd, 20);
    Vector row(21, 0.0);
    for (int k = 1; k <= 20; ++k) row[static_cast<std::size_t>(k)] = table.s[static_cast<std::size_t>(k)][0];
    const auto rep = moments::carleman_report(row);
    CHECK(rep.verdict == moments::Verdict::kDivergentTrend);
    for (int k = 2; k <= 20; ++k) {
        CHECK(rep.terms[static_cast<std::size_t>(k)] ==
              doctest::Approx(std::pow(factorial_d(k), -1.0 / (2.0 * k))).epsilon(1e-12));
        CHECK(rep.partial_sums[static_cast<std::size_t>(k)] >
              rep.partial_sums[static_cast<std::size_t>(k - 1)]);
    }
}

TEST_CASE("carleman report stays inconclusive when the constant keeps growing") {
    // s_k = (2k)! grows too fast for the (k!)^2-scale bound; the fitted
    // constant rises through the whole row.
    Vector row(13, 0.0);
    for (int k = 1; k <= 12; ++k) row[static_cast<std::size_t>(k)] = factorial_d(2 * k);
    const auto rep = moments::carleman_report(row);
    CHECK(rep.verdict == moments::Verdict::kInconclusive);
}

TEST_CASE("carleman report rejects nonpositive moments") {
    CHECK(error_kind([] {
              (void)moments::carleman_report(Vector{0.0, 1.0, -2.0});
          }) == errkind::kNonpositiveMoment);
}

TEST_CASE("moment bound constants") {
    const auto two = load("two_state.json");
    const auto t2 = moments::compute_Lk(two.m, two.sd, 20);
    const auto b2 = moments::check_moment_bound(two.sd, t2);
    // The order-1 constant dominates: c_1 = sup_x phi(x) L_1(x) / 1! is the
    // sup norm of phi. Above order 1 the largest constant sits at k = 2
    // (both values frozen from an independent evaluation).
    CHECK(b2.c_star == doctest::Approx(1.1708203932499368).epsilon(1e-12));
    CHECK(b2.c_by_order[1] == doctest::Approx(1.1708203932499368).epsilon(1e-12));
    CHECK(b2.c_by_order[2] == doctest::Approx(0.9099064853011929).epsilon(1e-9));

    const auto yule = load("yule.json");
    const auto ty = moments::compute_Lk(yule.m, yule.sd, 20);
    const auto by = moments::check_moment_bound(yule.sd, ty);
    CHECK(by.c_star == doctest::Approx(1.0));  // k = 1 gives exactly 1, later orders fall below
    for (int k = 2; k <= 20; ++k) CHECK(by.c_by_order[static_cast<std::size_t>(k)] < 1.0);
}

TEST_CASE("inequality chain audit passes on both fixtures") {
    for (const char* name : {"two_state.json", "yule.json"}) {
        const auto fx = load(name);
        const auto table = moments::compute_Lk(fx.m, fx.sd, 12);
        const auto chain = moments::moment_bound_chain(fx.m, fx.sd, table);
        CHECK(chain.pass);
        CHECK(chain.c1_dominates);
        CHECK(chain.c1 > 0.0);
        REQUIRE(chain.rows.size() == 11);
        for (const auto& row : chain.rows) {
            CHECK(row.step_resolvent_ok);
            CHECK(row.step_induction_ok);
            CHECK(row.sup_phi_L > 0.0);
        }
    }
}
