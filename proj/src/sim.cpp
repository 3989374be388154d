#include "bmp/sim.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "bmp/kernels.hpp"
#include "bmp/stats.hpp"

namespace bmp::sim {

std::int64_t PopulationState::total() const {
    std::int64_t t = 0;
    for (const auto c : counts) t += c;
    return t;
}

namespace {

/// Per-state event rates, split so the event type can be drawn by one scan.
struct RateTable {
    linalg::Vector motion;  ///< sum of off-diagonal q(x, .)
    linalg::Vector kill;    ///< conservation deficit of row x
    linalg::Vector total;   ///< motion + kill + gamma
};

RateTable build_rates(const model::BmpModel& m) {
    const std::size_t n = m.n();
    RateTable rt{linalg::Vector(n, 0.0), linalg::Vector(n, 0.0), linalg::Vector(n, 0.0)};
    for (std::size_t x = 0; x < n; ++x) {
        double off = 0.0;
        for (std::size_t y = 0; y < n; ++y)
            if (y != x) off += m.q(x, y);
        rt.motion[x] = off;
        rt.kill[x] = m.kill_rate(x);
        rt.total[x] = off + rt.kill[x] + m.gamma[x];
    }
    return rt;
}

[[noreturn]] void overflow_error(const model::BmpModel& m, std::int64_t cap, double t) {
    double lambda = 0.0;
    try {
        lambda = spectral::max_real_eigenvalue(model::mean_generator(m));
    } catch (const Error&) {
        lambda = 0.0;
    }
    std::ostringstream os;
    os << "population exceeded the cap of " << cap << " at t = " << t;
    if (lambda > 0.0)
        os << "; expected size grows like e^{" << lambda << " t}, so horizons up to about "
           << std::log(static_cast<double>(cap)) / lambda << " stay below the cap on average";
    fail(errkind::kPopulationOverflow, os.str());
}

}  // namespace

PopulationState simulate(const model::BmpModel& m, std::size_t x0, double T, rng::RngStream& rng,
                         const SimOptions& opts) {
    const std::size_t n = m.n();
    if (x0 >= n) fail(errkind::kInvariant, "simulate: start state out of range");
    if (T < 0.0) fail(errkind::kInvariant, "simulate: negative horizon");

    const RateTable rt = build_rates(m);
    PopulationState ps;
    ps.counts.assign(n, 0);
    ps.occupation.assign(n, 0.0);
    ps.counts[x0] = 1;
    std::int64_t total = 1;

    double R = rt.total[x0];
    std::int64_t events_since_refresh = 0;

    while (ps.time < T && total > 0) {
        if (R <= 0.0) {
            // Only zero-rate particles remain; they sit still until T.
            for (std::size_t x = 0; x < n; ++x)
                ps.occupation[x] += static_cast<double>(ps.counts[x]) * (T - ps.time);
            ps.time = T;
            break;
        }
        const double dt = rng.exponential() / R;
        if (ps.time + dt >= T) {
            for (std::size_t x = 0; x < n; ++x)
                ps.occupation[x] += static_cast<double>(ps.counts[x]) * (T - ps.time);
            ps.time = T;
            break;
        }
        for (std::size_t x = 0; x < n; ++x)
            ps.occupation[x] += static_cast<double>(ps.counts[x]) * dt;
        ps.time += dt;

        // Draw the acting state proportional to counts * rate, then reuse the
        // residual of the same uniform for the event type (the residual is
        // again uniform on the chosen bin, so one draw covers both levels).
        const double u = rng.uniform() * R;
        std::size_t x = n;
        double before = 0.0;
        std::size_t last = n;
        double last_before = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            if (ps.counts[s] == 0 || rt.total[s] <= 0.0) continue;
            const double bin = static_cast<double>(ps.counts[s]) * rt.total[s];
            last = s;
            last_before = before;
            if (u <= before + bin) {
                x = s;
                break;
            }
            before += bin;
        }
        if (x == n) {
            x = last;  // rounding pushed u past the final bin
            before = last_before;
        }
        if (x == n) {  // counts and R disagree; R drifted to junk
            R = 0.0;
            continue;
        }
        double v = (u - before) / static_cast<double>(ps.counts[x]);
        if (v < 0.0) v = 0.0;
        if (v >= rt.total[x]) v = rt.total[x] * (1.0 - 1e-16);
        if (v < rt.motion[x]) {
            // Motion jump: pick the destination from row x of q.
            double w = v;
            std::size_t y = n;
            std::size_t last_y = n;
            for (std::size_t s = 0; s < n; ++s) {
                if (s == x || m.q(x, s) <= 0.0) continue;
                last_y = s;
                w -= m.q(x, s);
                if (w < 0.0) {
                    y = s;
                    break;
                }
            }
            if (y == n) y = last_y;
            ps.counts[x] -= 1;
            ps.counts[y] += 1;
            R += static_cast<double>(rt.total[y]) - rt.total[x];
        } else if (v < rt.motion[x] + rt.kill[x]) {
            ps.counts[x] -= 1;
            total -= 1;
            R -= rt.total[x];
        } else {
            // Branch: the particle dies and an offspring configuration replaces it.
            const auto& law = m.offspring[x];
            std::size_t ci = law.size() - 1;
            if (law.size() > 1) {
                double w = rng.uniform();
                for (std::size_t c = 0; c < law.size(); ++c) {
                    w -= law[c].p;
                    if (w < 0.0) {
                        ci = c;
                        break;
                    }
                }
            }
            ps.counts[x] -= 1;
            total -= 1;
            R -= rt.total[x];
            for (const auto child : law[ci].children) {
                ps.counts[child] += 1;
                total += 1;
                R += rt.total[child];
            }
            if (total > opts.particle_cap) overflow_error(m, opts.particle_cap, ps.time);
        }

        // Rebuild R from counts now and then so float drift cannot accumulate.
        if (++events_since_refresh == 4096) {
            events_since_refresh = 0;
            R = 0.0;
            for (std::size_t s = 0; s < n; ++s)
                R += static_cast<double>(ps.counts[s]) * rt.total[s];
        }
    }
    if (total == 0) ps.time = T;  // extinct populations just wait out the clock
    return ps;
}

namespace {

int resolve_workers(const SimOptions& opts) {
    int w = opts.workers;
    if (w <= 0) {
        if (const char* env = std::getenv("BMP_WORKERS")) w = std::atoi(env);
    }
    if (w <= 0) w = static_cast<int>(std::thread::hardware_concurrency());
    if (w <= 0) w = 1;
    return std::min(w, 64);
}

/// Run fn(rep) for rep in [0, reps), filling rep-indexed outputs inside fn.
/// Work is claimed dynamically, but replicate r's result depends only on
/// (seed, r), so scheduling cannot change any output.
void parallel_reps(std::int64_t reps, const SimOptions& opts,
                   const std::function<void(std::int64_t)>& fn) {
    const int workers = std::min<std::int64_t>(resolve_workers(opts), std::max<std::int64_t>(reps, 1));
    if (workers <= 1) {
        for (std::int64_t r = 0; r < reps; ++r) fn(r);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::int64_t r = next.fetch_add(1);
            if (r >= reps) return;
            try {
                fn(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(reps);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Shared shape of the scalar estimators: one statistic per replicate, then
/// a fixed-order reduction to mean and standard error.
EstimatorResult estimate(std::int64_t reps, std::uint64_t seed, const SimOptions& opts,
                         const std::function<double(std::int64_t, rng::RngStream&)>& statistic) {
    if (reps <= 0) fail(errkind::kInvariant, "estimator: reps must be positive");
    std::vector<double> values(static_cast<std::size_t>(reps));
    parallel_reps(reps, opts, [&](std::int64_t r) {
        rng::RngStream rng(seed, static_cast<std::uint64_t>(r));
        values[static_cast<std::size_t>(r)] = statistic(r, rng);
    });
    const auto s = stats::summarize(values);
    return EstimatorResult{s.mean, s.stderr_, reps, seed};
}

double scaled_terminal(const PopulationState& ps, const linalg::Vector& f, double lambda, double T) {
    double acc = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x)
        acc += static_cast<double>(ps.counts[x]) * f[x];
    return std::exp(-lambda * T) * acc;
}

}  // namespace

EstimatorResult mc_moment(const model::BmpModel& m, const spectral::SpectralData& sd,
                          const linalg::Vector& f, int k, std::size_t x0, double T,
                          std::int64_t reps, std::uint64_t seed, const SimOptions& opts) {
    if (k < 1 || k > 4) fail(errkind::kCapExceeded, "mc_moment: order must be in 1..4");
    if (f.size() != m.n()) fail(errkind::kInvariant, "mc_moment: payload size mismatch");
    return estimate(reps, seed, opts, [&](std::int64_t, rng::RngStream& rng) {
        const auto ps = simulate(m, x0, T, rng, opts);
        double v = scaled_terminal(ps, f, sd.lambda, T);
        double p = 1.0;
        for (int i = 0; i < k; ++i) p *= v;
        return p;
    });
}

std::vector<double> mc_W_sample(const model::BmpModel& m, const spectral::SpectralData& sd,
                                std::size_t x0, double T, std::int64_t reps, std::uint64_t seed,
                                const SimOptions& opts) {
    if (reps <= 0) fail(errkind::kInvariant, "mc_W_sample: reps must be positive");
    std::vector<double> values(static_cast<std::size_t>(reps));
    parallel_reps(reps, opts, [&](std::int64_t r) {
        rng::RngStream rng(seed, static_cast<std::uint64_t>(r));
        const auto ps = simulate(m, x0, T, rng, opts);
        values[static_cast<std::size_t>(r)] = scaled_terminal(ps, sd.phi, sd.lambda, T);
    });
    return values;
}

EstimatorResult mc_lln_gap(const model::BmpModel& m, const spectral::SpectralData& sd,
                           const linalg::Vector& f, std::size_t x0, double T, std::int64_t reps,
                           std::uint64_t seed, const SimOptions& opts) {
    if (f.size() != m.n()) fail(errkind::kInvariant, "mc_lln_gap: payload size mismatch");
    const double proj = kernels::dot(sd.phi_tilde.data(), f.data(), f.size());
    linalg::Vector g(f.size());
    for (std::size_t x = 0; x < f.size(); ++x) g[x] = f[x] - proj * sd.phi[x];
    return estimate(reps, seed, opts, [&](std::int64_t, rng::RngStream& rng) {
        const auto ps = simulate(m, x0, T, rng, opts);
        const double r = scaled_terminal(ps, g, sd.lambda, T);
        return r * r;
    });
}

EstimatorResult mc_running_integral(const model::BmpModel& m, const spectral::SpectralData& sd,
                                    const linalg::Vector& f, std::size_t x0, double T,
                                    std::int64_t reps, std::uint64_t seed, const SimOptions& opts) {
    if (f.size() != m.n()) fail(errkind::kInvariant, "mc_running_integral: payload size mismatch");
    return estimate(reps, seed, opts, [&](std::int64_t, rng::RngStream& rng) {
        const auto ps = simulate(m, x0, T, rng, opts);
        return std::exp(-sd.lambda * T) * kernels::dot(ps.occupation.data(), f.data(), f.size());
    });
}

LaplaceGapResult laplace_functional_gap(const model::BmpModel& m,
                                        const spectral::SpectralData& sd, const linalg::Vector& f,
                                        std::size_t x0, double T, std::int64_t reps,
                                        std::uint64_t seed, const SimOptions& opts) {
    if (f.size() != m.n()) fail(errkind::kInvariant, "laplace_functional_gap: payload size mismatch");
    if (reps <= 0) fail(errkind::kInvariant, "laplace_functional_gap: reps must be positive");
    const double proj = kernels::dot(sd.phi_tilde.data(), f.data(), f.size());
    std::vector<double> diffs(static_cast<std::size_t>(reps));
    std::vector<double> term_f(static_cast<std::size_t>(reps));
    std::vector<double> term_w(static_cast<std::size_t>(reps));
    parallel_reps(reps, opts, [&](std::int64_t r) {
        rng::RngStream rng(seed, static_cast<std::uint64_t>(r));
        const auto ps = simulate(m, x0, T, rng, opts);
        const double xf = scaled_terminal(ps, f, sd.lambda, T);
        const double w = scaled_terminal(ps, sd.phi, sd.lambda, T);
        const auto i = static_cast<std::size_t>(r);
        term_f[i] = std::exp(-xf);
        term_w[i] = std::exp(-w * proj);
        diffs[i] = term_f[i] - term_w[i];
    });
    const auto sd_diff = stats::summarize(diffs);
    const auto sf = stats::summarize(term_f);
    const auto sw = stats::summarize(term_w);
    LaplaceGapResult out;
    out.gap = EstimatorResult{std::abs(sd_diff.mean), sd_diff.stderr_, reps, seed};
    out.mean_functional = sf.mean;
    out.mean_limit = sw.mean;
    return out;
}

}  // namespace bmp::sim
