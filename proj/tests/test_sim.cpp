#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "bmp/errors.hpp"
#include "bmp/model.hpp"
#include "bmp/sim.hpp"
#include "bmp/spectral.hpp"
#include "bmp/stats.hpp"

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

}  // namespace

TEST_CASE("a trajectory is a pure function of its stream") {
    const auto fx = load("two_state.json");
    rng::RngStream r1(5, 9), r2(5, 9);
    const auto a = sim::simulate(fx.m, 0, 3.0, r1);
    const auto b = sim::simulate(fx.m, 0, 3.0, r2);
    CHECK(a.counts == b.counts);
    CHECK(a.occupation == b.occupation);
    CHECK(a.time == b.time);
    CHECK(a.total() > 0);
}

TEST_CASE("zero horizon returns the initial configuration") {
    const auto fx = load("two_state.json");
    rng::RngStream r(1, 0);
    const auto ps = sim::simulate(fx.m, 1, 0.0, r);
    CHECK(ps.counts == std::vector<std::int64_t>{0, 1});
    CHECK(ps.occupation[0] == 0.0);
    CHECK(ps.occupation[1] == 0.0);
}

TEST_CASE("occupation of a conserved walker is exactly the horizon") {
    const auto fx = load("pure_motion.json");
    for (int rep = 0; rep < 32; ++rep) {
        rng::RngStream r(777, static_cast<std::uint64_t>(rep));
        const auto ps = sim::simulate(fx.m, 0, 2.5, r);
        CHECK(ps.total() == 1);
        CHECK(ps.occupation[0] + ps.occupation[1] == doctest::Approx(2.5).epsilon(1e-12));
    }
}

TEST_CASE("estimator results do not depend on the worker count") {
    const auto fx = load("two_state.json");
    const Vector f{1.0, 0.5};
    sim::SimOptions one;
    one.workers = 1;
    sim::SimOptions four;
    four.workers = 4;
    const auto r1 = sim::mc_moment(fx.m, fx.sd, f, 1, 0, 2.0, 200, 31, one);
    const auto r4 = sim::mc_moment(fx.m, fx.sd, f, 1, 0, 2.0, 200, 31, four);
    CHECK(r1.value == r4.value);      // bitwise: same streams, same reduction order
    CHECK(r1.stderr_ == r4.stderr_);

    setenv("BMP_WORKERS", "3", 1);
    sim::SimOptions env;  // workers = 0 defers to the environment
    const auto re = sim::mc_moment(fx.m, fx.sd, f, 1, 0, 2.0, 200, 31, env);
    unsetenv("BMP_WORKERS");
    CHECK(re.value == r1.value);
}

TEST_CASE("martingale mean is one at every horizon") {
    const auto fx = load("yule.json");
    for (const double t : {2.0, 4.0}) {
        const auto w = sim::mc_W_sample(fx.m, fx.sd, 0, t, 3000, 11);
        const auto s = stats::summarize(w);
        CHECK(std::abs(s.mean - 1.0) < 4.0 * s.stderr_);
    }
}

TEST_CASE("scaled moments match the closed forms on the splitting clock") {
    const auto fx = load("yule.json");
    const Vector one{1.0};
    const double t = 4.0;
    const double p = std::exp(-t);
    const auto m1 = sim::mc_moment(fx.m, fx.sd, one, 1, 0, t, 3000, 19);
    CHECK(std::abs(m1.value - 1.0) < 4.0 * m1.stderr_);
    const auto m2 = sim::mc_moment(fx.m, fx.sd, one, 2, 0, t, 3000, 19);
    CHECK(std::abs(m2.value - (2.0 - p)) < 4.0 * m2.stderr_);
    const auto m3 = sim::mc_moment(fx.m, fx.sd, one, 3, 0, t, 3000, 19);
    CHECK(std::abs(m3.value - (6.0 - 6.0 * p + p * p)) < 4.0 * m3.stderr_);
}

TEST_CASE("moment order is capped at four") {
    const auto fx = load("yule.json");
    try {
        (void)sim::mc_moment(fx.m, fx.sd, Vector{1.0}, 5, 0, 1.0, 10, 1);
        FAIL("expected cap error");
    } catch (const Error& e) {
        CHECK(std::string(e.kind()) == errkind::kCapExceeded);
    }
}

TEST_CASE("lln residual is identically zero when f is spanned by phi") {
    // One state: every payload is a multiple of phi, so g vanishes exactly.
    const auto fx = load("yule.json");
    const auto r = sim::mc_lln_gap(fx.m, fx.sd, Vector{0.7}, 0, 3.0, 500, 3);
    CHECK(r.value == 0.0);
    CHECK(r.stderr_ == 0.0);
}

TEST_CASE("lln residual matches the quadrature oracle at t = 2") {
    const auto fx = load("two_state.json");
    const Vector f{1.0, 0.5};
    const auto r = sim::mc_lln_gap(fx.m, fx.sd, f, 0, 2.0, 4000, 23);
    // Frozen from adaptive quadrature of the second-moment identity.
    CHECK(std::abs(r.value - 0.008799341650270439) < 4.0 * r.stderr_);
    CHECK(r.stderr_ < 0.002);
}

TEST_CASE("running integral matches the exact semigroup integral") {
    const auto yule = load("yule.json");
    const auto ry = sim::mc_running_integral(yule.m, yule.sd, Vector{1.0}, 0, 4.0, 2000, 29);
    CHECK(std::abs(ry.value - (1.0 - std::exp(-4.0))) < 4.0 * ry.stderr_);

    const auto two = load("two_state.json");
    const Vector f{1.0, 0.5};
    const auto rt = sim::mc_running_integral(two.m, two.sd, f, 0, 4.0, 2000, 29);
    CHECK(std::abs(rt.value - 0.30968439195866454) < 4.0 * rt.stderr_);
}

TEST_CASE("motion sampling reproduces the jump kernel") {
    const auto fx = load("pure_motion.json");
    const double t = 1.5;
    const int reps = 4000;
    double at_first = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        rng::RngStream r(4243, static_cast<std::uint64_t>(rep));
        const auto ps = sim::simulate(fx.m, 0, t, r);
        at_first += static_cast<double>(ps.counts[0]);
    }
    // exp(tq) row for the symmetric two-state walk.
    const double p00 = 0.5 * (1.0 + std::exp(-2.0 * t));
    const double stat = stats::chi_square_statistic(
        {at_first, reps - at_first}, {reps * p00, reps * (1.0 - p00)});
    CHECK(stats::chi_square_tail(stat, 1.0) > 0.001);
}

TEST_CASE("martingale limit sample passes a distributional test") {
    const auto fx = load("yule.json");
    const auto w = sim::mc_W_sample(fx.m, fx.sd, 0, 8.0, 3000, 42);
    REQUIRE(w.size() == 3000);
    for (const double v : w) CHECK(v >= 0.0);
    const auto ks = stats::ks_test(w, [](double x) { return 1.0 - std::exp(-x); });
    CHECK(ks.p_value > 0.001);
}

TEST_CASE("paired laplace terms stay close on a coupled trajectory") {
    const auto fx = load("two_state.json");
    const Vector f{1.0, 0.5};
    const auto r = sim::laplace_functional_gap(fx.m, fx.sd, f, 0, 4.0, 2000, 57);
    CHECK(r.gap.value < 0.03);
    CHECK(r.mean_functional > 0.0);
    CHECK(r.mean_limit > 0.0);
    CHECK(r.gap.reps == 2000);
}

TEST_CASE("population cap aborts loudly") {
    const auto fx = load("yule.json");
    sim::SimOptions tight;
    tight.particle_cap = 50;
    rng::RngStream r(2, 0);
    try {
        (void)sim::simulate(fx.m, 0, 8.0, r, tight);
        FAIL("expected population overflow");
    } catch (const Error& e) {
        CHECK(std::string(e.kind()) == errkind::kPopulationOverflow);
        CHECK(std::string(e.what()).find("cap") != std::string::npos);
    }
    // The same abort propagates out of a threaded estimator.
    tight.workers = 2;
    try {
        (void)sim::mc_moment(fx.m, fx.sd, Vector{1.0}, 1, 0, 8.0, 16, 2, tight);
        FAIL("expected population overflow");
    } catch (const Error& e) {
        CHECK(std::string(e.kind()) == errkind::kPopulationOverflow);
    }
}

TEST_CASE("subcritical population dies out and stops early") {
    const auto fx = load("motion_killed.json");
    int extinct = 0;
    for (int rep = 0; rep < 64; ++rep) {
        rng::RngStream r(91, static_cast<std::uint64_t>(rep));
        const auto ps = sim::simulate(fx.m, 0, 30.0, r);
        if (ps.total() == 0) ++extinct;
        CHECK(ps.time == 30.0);
    }
    CHECK(extinct == 64);  // killing rate 1 per particle, horizon 30
}
