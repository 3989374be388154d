#include "bmp/moments.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "bmp/errors.hpp"
#include "bmp/kernels.hpp"

namespace bmp::moments {

namespace {

double factorial_d(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

/// [z^k] prod_j (1 + sum_{m=1}^{k-1} weight(child_j, m) z^m).
///
/// Every composition of k with parts <= k-1 has at least two positive parts,
/// so this single coefficient is exactly the >= 2-positive selector sum of
/// prod_j weight(x_j, k_j).
template <typename WeightFn>
double interaction_coefficient(const std::vector<std::uint32_t>& children, int k,
                               const WeightFn& weight) {
    if (children.size() < 2) return 0.0;
    std::vector<double> poly(static_cast<std::size_t>(k) + 1, 0.0);
    std::vector<double> next(static_cast<std::size_t>(k) + 1, 0.0);
    poly[0] = 1.0;
    for (std::uint32_t child : children) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int d = 0; d <= k; ++d) {
            const double coeff = poly[static_cast<std::size_t>(d)];
            if (coeff == 0.0) continue;
            next[static_cast<std::size_t>(d)] += coeff;
            const int top = std::min(k - d, k - 1);
            for (int m = 1; m <= top; ++m) {
                next[static_cast<std::size_t>(d + m)] += coeff * weight(child, m);
            }
        }
        std::swap(poly, next);
    }
    return poly[static_cast<std::size_t>(k)];
}

}  // namespace

linalg::Vector resolvent_apply(const linalg::Matrix& a, double q, const linalg::Vector& g) {
    const double top = spectral::max_real_eigenvalue(a);
    if (q <= top + 1e-10) {
        fail(errkind::kNotInResolventSet,
             "resolvent point q = " + std::to_string(q) + " is not above the spectrum (max Re = " +
                 std::to_string(top) + ")");
    }
    const std::size_t n = a.rows();
    linalg::Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = (i == j ? q : 0.0) - a(i, j);
    return linalg::LuFactor(std::move(m)).solve(g);
}

linalg::Vector branch_moment_source(const model::BmpModel& m, const spectral::SpectralData& sd,
                                    const MomentTable& table, int k) {
    if (k < 2 || k > table.order_max + 1) {
        fail(errkind::kInvariant, "branch moment source needs 2 <= k <= computed order + 1");
    }
    const std::size_t n = m.n();
    const auto weight = [&](std::uint32_t child, int order) {
        return sd.phi[child] * table.L[static_cast<std::size_t>(order)][child];
    };
    linalg::Vector b(n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        if (m.gamma[x] == 0.0) continue;
        b[x] = m.gamma[x] *
               model::expect_over_configs(m, x, [&](const std::vector<std::uint32_t>& children) {
                   return interaction_coefficient(children, k, weight);
               });
    }
    return b;
}

MomentTable compute_Lk(const model::BmpModel& m, const spectral::SpectralData& sd, int order_max) {
    if (order_max < 1 || order_max > kMaxMomentOrder) {
        fail(errkind::kCapExceeded,
             "moment order " + std::to_string(order_max) + " outside [1, 20]");
    }
    if (!sd.supercritical) {
        fail(errkind::kNotSupercritical,
             "moment recursion needs lambda > 0 (got " + std::to_string(sd.lambda) + ")");
    }
    const std::size_t n = m.n();
    const linalg::Matrix a = model::mean_generator(m);

    MomentTable table;
    table.order_max = order_max;
    table.L.assign(static_cast<std::size_t>(order_max) + 1, linalg::Vector());
    table.s.assign(static_cast<std::size_t>(order_max) + 1, linalg::Vector());
    table.L[1].assign(n, 1.0);
    table.s[1] = sd.phi;

    for (int k = 2; k <= order_max; ++k) {
        const linalg::Vector b = branch_moment_source(m, sd, table, k);
        const linalg::Vector v = resolvent_apply(a, k * sd.lambda, b);
        linalg::Vector row(n);
        linalg::Vector srow(n);
        const double kfact = factorial_d(k);
        for (std::size_t x = 0; x < n; ++x) {
            // The resolvent of a nonnegative source at q > lambda is
            // nonnegative; clip the roundoff shadow below zero.
            row[x] = std::max(0.0, v[x] / sd.phi[x]);
            srow[x] = kfact * sd.phi[x] * row[x];
        }
        table.L[static_cast<std::size_t>(k)] = std::move(row);
        table.s[static_cast<std::size_t>(k)] = std::move(srow);
    }
    return table;
}

// ============================================================================
// Finite-time moments on a uniform grid.
//
// In scaled variables m^{(l)}_t = e^{-l lambda t} psi_t^{(l)}[f], the
// convolution against the constant-step propagator P = e^{-l lambda h} e^{hA}
// collapses to running recurrences: with g_j the (scaled) branch source at
// step j,
//   trapezoid_j = h (K_j + g_j/2 - P^j g_0 / 2),  K_{j+1} = P (K_j + g_j),
// so each refinement costs O(J) matvecs.
// ============================================================================

namespace {

struct OrderState {
    linalg::Matrix propagator;  // e^{-m lambda h} expm(h A)
    linalg::Vector base;        // P^j f^m
    linalg::Vector conv;        // K_j
    linalg::Vector tail;        // P^j g_0
    linalg::Vector g_now;       // source at the current step
};

/// One sweep at fixed step count. Fills out[r] with the scaled order-l moment
/// at request_steps[r] * h. request_steps must be ascending, last = steps.
void sweep(const model::BmpModel& mdl, const spectral::SpectralData& sd, const linalg::Matrix& a,
           const linalg::Vector& f, int l, double h, int steps,
           const std::vector<int>& request_steps, std::vector<linalg::Vector>& out) {
    const std::size_t n = mdl.n();
    const linalg::Matrix step_kernel = linalg::expm(h * a);

    // vals[m] = scaled m-th moment at the current step; vals[0] = 1.
    std::vector<linalg::Vector> vals(static_cast<std::size_t>(l) + 1, linalg::Vector(n, 1.0));
    for (int m = 1; m <= l; ++m) {
        for (std::size_t x = 0; x < n; ++x) {
            vals[static_cast<std::size_t>(m)][x] = vals[static_cast<std::size_t>(m - 1)][x] * f[x];
        }
    }

    std::vector<OrderState> orders(static_cast<std::size_t>(l) + 1);
    std::vector<double> inv_factorial(static_cast<std::size_t>(l) + 1, 1.0);
    for (int m = 2; m <= l; ++m) {
        inv_factorial[static_cast<std::size_t>(m)] = inv_factorial[static_cast<std::size_t>(m - 1)] / m;
    }

    auto source = [&](int m) {
        // gamma(x) E_x[ sum over >= 2-positive compositions of m of
        //   multinomial(m, parts) prod_j vals[k_j](child_j) ],
        // via m! [z^m] prod_j sum_c vals[c](child_j) z^c / c!.
        linalg::Vector g(n, 0.0);
        const double mfact = factorial_d(m);
        for (std::size_t x = 0; x < n; ++x) {
            if (mdl.gamma[x] == 0.0) continue;
            g[x] = mdl.gamma[x] * mfact *
                   model::expect_over_configs(
                       mdl, x, [&](const std::vector<std::uint32_t>& children) {
                           return interaction_coefficient(
                               children, m, [&](std::uint32_t child, int c) {
                                   return vals[static_cast<std::size_t>(c)][child] *
                                          inv_factorial[static_cast<std::size_t>(c)];
                               });
                       });
        }
        return g;
    };

    for (int m = 1; m <= l; ++m) {
        auto& st = orders[static_cast<std::size_t>(m)];
        st.propagator = std::exp(-m * sd.lambda * h) * step_kernel;
        st.base = vals[static_cast<std::size_t>(m)];
        st.conv.assign(n, 0.0);
        if (m >= 2) {
            st.g_now = source(m);
            st.tail = st.g_now;
        }
    }

    std::size_t next_request = 0;
    for (int j = 0;; ++j) {
        if (next_request < request_steps.size() && request_steps[next_request] == j) {
            out[next_request] = vals[static_cast<std::size_t>(l)];
            ++next_request;
        }
        if (j == steps) break;

        // Advance every order to step j+1, consuming the step-j sources.
        for (int m = 1; m <= l; ++m) {
            auto& st = orders[static_cast<std::size_t>(m)];
            if (m >= 2) {
                linalg::Vector mix = st.conv;
                kernels::axpy(1.0, st.g_now.data(), mix.data(), n);
                st.conv = linalg::matvec(st.propagator, mix);
                st.tail = linalg::matvec(st.propagator, st.tail);
            }
            st.base = linalg::matvec(st.propagator, st.base);
        }
        for (int m = 1; m <= l; ++m) {
            auto& st = orders[static_cast<std::size_t>(m)];
            if (m == 1) {
                vals[1] = st.base;
                continue;
            }
            st.g_now = source(m);
            linalg::Vector v = st.base;
            for (std::size_t x = 0; x < n; ++x) {
                v[x] += h * (st.conv[x] + 0.5 * st.g_now[x] - 0.5 * st.tail[x]);
            }
            vals[static_cast<std::size_t>(m)] = std::move(v);
        }
    }
}

std::vector<linalg::Vector> scaled_values_at(const model::BmpModel& mdl,
                                             const spectral::SpectralData& sd,
                                             const linalg::Vector& f, int l, double t_max,
                                             int points, const GridOptions& opts) {
    if (l < 1 || l > kMaxFiniteTimeOrder) {
        fail(errkind::kCapExceeded, "finite-time moment order outside [1, 5]");
    }
    if (f.size() != mdl.n()) fail(errkind::kInvariant, "test function has wrong dimension");
    if (points < 1 || t_max < 0.0) fail(errkind::kInvariant, "need t_max >= 0 and points >= 1");

    std::vector<linalg::Vector> out(static_cast<std::size_t>(points) + 1);
    if (t_max == 0.0) {
        linalg::Vector f_pow(mdl.n(), 1.0);
        for (int i = 0; i < l; ++i)
            for (std::size_t x = 0; x < mdl.n(); ++x) f_pow[x] *= f[x];
        std::fill(out.begin(), out.end(), f_pow);
        return out;
    }

    const double out_step = t_max / points;
    double step = opts.step > 0.0 ? opts.step : t_max / 256.0;
    if (step > t_max / 50.0 + 1e-15) {
        fail(errkind::kGridTooCoarse, "integration step must be at most t_max / 50");
    }
    // Refinements must keep the requested times on the grid.
    int per_point = std::max(1, static_cast<int>(std::ceil(out_step / step - 1e-12)));

    const linalg::Matrix a = model::mean_generator(mdl);
    auto run = [&](int per) {
        std::vector<int> request(static_cast<std::size_t>(points) + 1);
        for (int r = 0; r <= points; ++r) request[static_cast<std::size_t>(r)] = r * per;
        std::vector<linalg::Vector> values(request.size());
        sweep(mdl, sd, a, f, l, out_step / per, points * per, request, values);
        return values;
    };

    std::vector<linalg::Vector> coarse = run(per_point);
    std::vector<linalg::Vector> extrapolated;
    for (int round = 0;; ++round) {
        per_point *= 2;
        std::vector<linalg::Vector> fine = run(per_point);
        std::vector<linalg::Vector> richardson(fine.size());
        double change = 0.0;
        for (std::size_t r = 0; r < fine.size(); ++r) {
            richardson[r].resize(mdl.n());
            for (std::size_t x = 0; x < mdl.n(); ++x) {
                richardson[r][x] = (4.0 * fine[r][x] - coarse[r][x]) / 3.0;
                const double prev = extrapolated.empty() ? coarse[r][x] : extrapolated[r][x];
                change = std::max(change, std::fabs(richardson[r][x] - prev) /
                                              (1.0 + std::fabs(richardson[r][x])));
            }
        }
        extrapolated = std::move(richardson);
        if (change < opts.richardson_tol || round + 1 >= opts.max_halvings) {
            if (change >= opts.richardson_tol) {
                fail(errkind::kInvariant, "moment grid did not converge within the halving budget");
            }
            return extrapolated;
        }
        coarse = std::move(fine);
    }
}

}  // namespace

linalg::Vector finite_time_moment(const model::BmpModel& m, const spectral::SpectralData& sd,
                                  const linalg::Vector& f, int l, double t,
                                  const GridOptions& opts) {
    if (l * sd.lambda * t > 700.0) {
        fail(errkind::kOverflow, "unscaled moment overflows doubles (l lambda t > 700)");
    }
    GridOptions local = opts;
    std::vector<linalg::Vector> curve;
    if (t == 0.0) {
        curve = scaled_values_at(m, sd, f, l, 0.0, 1, local);
    } else {
        // Single-point request: integrate on [0, t] with the requested step.
        const double step = local.step > 0.0 ? local.step : t / 256.0;
        if (step > t / 50.0 + 1e-15) {
            fail(errkind::kGridTooCoarse, "integration step must be at most t / 50");
        }
        local.step = step;
        curve = scaled_values_at(m, sd, f, l, t, 1, local);
    }
    linalg::Vector v = curve.back();
    const double unscale = std::exp(l * sd.lambda * t);
    kernels::scale(unscale, v.data(), v.size());
    return v;
}

std::vector<linalg::Vector> scaled_moment_curve(const model::BmpModel& m,
                                                const spectral::SpectralData& sd,
                                                const linalg::Vector& f, int l, double t_max,
                                                int points, const GridOptions& opts) {
    return scaled_values_at(m, sd, f, l, t_max, points, opts);
}

std::vector<double> delta_curve(const model::BmpModel& m, const spectral::SpectralData& sd,
                                const MomentTable& table, const linalg::Vector& f, int l,
                                double t_max, int points, const GridOptions& opts) {
    if (l > table.order_max) fail(errkind::kInvariant, "delta curve needs the order-l moment row");
    const std::size_t n = m.n();
    const double phi_tilde_f = kernels::dot(sd.phi_tilde.data(), f.data(), n);
    const double lim_scale = factorial_d(l) * std::pow(phi_tilde_f, l);

    const std::vector<linalg::Vector> curve = scaled_moment_curve(m, sd, f, l, t_max, points, opts);
    std::vector<double> delta(curve.size());
    for (std::size_t r = 0; r < curve.size(); ++r) {
        double worst = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            const double limit = lim_scale * sd.phi[x] * table.L[static_cast<std::size_t>(l)][x];
            worst = std::max(worst, std::fabs(curve[r][x] - limit));
        }
        delta[r] = worst;
    }
    return delta;
}

MomentBoundReport check_moment_bound(const spectral::SpectralData& sd, const MomentTable& table) {
    MomentBoundReport rep;
    rep.c_by_order.assign(static_cast<std::size_t>(table.order_max) + 1, 0.0);
    for (int k = 1; k <= table.order_max; ++k) {
        double sup = 0.0;
        for (std::size_t x = 0; x < sd.phi.size(); ++x) {
            sup = std::max(sup, sd.phi[x] * table.L[static_cast<std::size_t>(k)][x]);
        }
        const double c_k = std::pow(sup / factorial_d(k), 1.0 / (2.0 * k - 1.0));
        rep.c_by_order[static_cast<std::size_t>(k)] = c_k;
        rep.c_star = std::max(rep.c_star, c_k);
    }
    return rep;
}

DeterminacyReport carleman_report(const linalg::Vector& s_row) {
    const int order_max = static_cast<int>(s_row.size()) - 1;
    if (order_max < 1) fail(errkind::kInvariant, "determinacy report needs at least s_1");
    DeterminacyReport rep;
    rep.terms.assign(s_row.size(), 0.0);
    rep.partial_sums.assign(s_row.size(), 0.0);

    double c_star = 1.0;
    double c_full = 1.0;
    double c_half = 1.0;
    const int half = (order_max + 1) / 2;
    double running = 0.0;
    for (int k = 1; k <= order_max; ++k) {
        const double s_k = s_row[static_cast<std::size_t>(k)];
        if (!(s_k > 0.0)) {
            fail(errkind::kNonpositiveMoment, "moment s_" + std::to_string(k) + " is not positive");
        }
        rep.terms[static_cast<std::size_t>(k)] = std::pow(s_k, -1.0 / (2.0 * k));
        running += rep.terms[static_cast<std::size_t>(k)];
        rep.partial_sums[static_cast<std::size_t>(k)] = running;

        const double kfact = factorial_d(k);
        const double c_k = std::pow(s_k / (kfact * kfact), 1.0 / (2.0 * k - 1.0));
        c_star = std::max(c_star, c_k);
        // The verdict fits the growth constant from k >= 2 only. At k = 1
        // the exponent 1/(2k-1) is 1, so c_1 equals s_1 and measures overall
        // scale, not the factorial envelope the trend comparison is probing.
        if (k >= 2) {
            c_full = std::max(c_full, c_k);
            if (k <= half) c_half = std::max(c_half, c_k);
        }
    }
    rep.c_star = c_star;
    rep.verdict =
        c_full <= c_half * (1.0 + 1e-9) ? Verdict::kDivergentTrend : Verdict::kInconclusive;
    return rep;
}

ChainReport moment_bound_chain(const model::BmpModel& m, const spectral::SpectralData& sd,
                               const MomentTable& table) {
    const std::size_t n = m.n();
    const linalg::Matrix a = model::mean_generator(m);
    ChainReport rep;
    rep.c_star = check_moment_bound(sd, table).c_star;
    rep.pass = true;

    const auto phi_l_weight = [&](std::uint32_t child, int order) {
        return sd.phi[child] * table.L[static_cast<std::size_t>(order)][child];
    };

    for (int k = 2; k <= table.order_max; ++k) {
        ChainRow row;
        row.k = k;
        for (std::size_t x = 0; x < n; ++x) {
            row.sup_phi_L =
                std::max(row.sup_phi_L, sd.phi[x] * table.L[static_cast<std::size_t>(k)][x]);
            row.interaction = std::max(
                row.interaction,
                model::expect_over_configs(m, x, [&](const std::vector<std::uint32_t>& children) {
                    return interaction_coefficient(children, k, phi_l_weight);
                }));
            row.inv_multinomial = std::max(
                row.inv_multinomial,
                model::expect_over_configs(m, x, [&](const std::vector<std::uint32_t>& children) {
                    // 1/multinomial(k, parts) = prod_j k_j! / k!.
                    const double coeff = interaction_coefficient(
                        children, k, [&](std::uint32_t, int c) { return factorial_d(c); });
                    return coeff / factorial_d(k);
                }));
        }
        const linalg::Vector res = resolvent_apply(a, k * sd.lambda, m.gamma);
        row.resolvent_gamma = *std::max_element(res.begin(), res.end());
        if (k == 2) {
            rep.c1 = row.resolvent_gamma;
            rep.c1_dominates = true;
        }
        rep.c1_dominates = rep.c1_dominates && row.resolvent_gamma <= rep.c1 * (1.0 + 1e-12);

        const double slack = 1.0 + 1e-9;
        row.step_resolvent_ok = row.sup_phi_L <= row.interaction * rep.c1 * slack + 1e-300;
        row.step_induction_ok =
            row.interaction <=
            std::pow(rep.c_star, 2.0 * k - 2.0) * factorial_d(k) * row.inv_multinomial * slack;
        rep.pass = rep.pass && row.step_resolvent_ok && row.step_induction_ok;
        rep.rows.push_back(row);
    }
    rep.pass = rep.pass && rep.c1_dominates;
    return rep;
}

}  // namespace bmp::moments
