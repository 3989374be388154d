// bmp: command line for branching Markov process models. Computes eigendata
// and moment tables, runs the verification suites, and drives the Monte Carlo
// estimators. Human-readable summaries go to stdout; every number of record
// goes to a file under --out, together with a manifest echoing the resolved
// knobs. Fixed seeds make rerun outputs byte-identical. Failures surface as
// one machine-readable record {kind, message} on stderr with exit code 2;
// a verification that runs to completion but misses its tolerance exits 1.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bmp/comb_exact.hpp"
#include "bmp/errors.hpp"
#include "bmp/model.hpp"
#include "bmp/moments.hpp"
#include "bmp/rng.hpp"
#include "bmp/sim.hpp"
#include "bmp/spectral.hpp"
#include "bmp/stats.hpp"
#include "bmp/version.hpp"

namespace {

using bmp::linalg::Vector;
using json = nlohmann::ordered_json;

struct Options {
    std::string model_path;
    std::string out_dir = ".";
    std::uint64_t seed = 42;
    std::size_t x0 = 0;
    double T = 4.0;
    std::int64_t reps = 2000;
    std::string f_spec;
    int k = 1;
    int kmax = 10;
    int lemma_kmax = 20;
    int lemma_nmax = 8;
    int l = 2;
    double tmax = 8.0;
    int points = 16;
    int probes = 32;
    bool dump_reps = false;
};

struct LoadedModel {
    bmp::model::BmpModel m;
    bmp::spectral::SpectralData sd;
};

LoadedModel load(const Options& opt) {
    LoadedModel lm;
    lm.m = bmp::model::load_model(opt.model_path);
    lm.sd = bmp::spectral::compute_eigendata(bmp::model::mean_generator(lm.m));
    return lm;
}

Vector parse_payload(const std::string& spec, std::size_t n) {
    if (spec.empty()) return Vector(n, 1.0);
    Vector f;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t comma = spec.find(',', pos);
        const std::string tok = spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            std::size_t used = 0;
            f.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            bmp::fail(bmp::errkind::kUsage, "--f entry '" + tok + "' is not a number");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (f.size() != n) {
        bmp::fail(bmp::errkind::kUsage, "--f has " + std::to_string(f.size()) +
                                            " entries for a model with " + std::to_string(n) +
                                            " states");
    }
    return f;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) bmp::fail(bmp::errkind::kIo, "cannot write '" + path.string() + "'");
    out << content;
    if (!out) bmp::fail(bmp::errkind::kIo, "short write to '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

std::filesystem::path out_path(const Options& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out_dir);
    return std::filesystem::path(opt.out_dir) / name;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json estimator_json(const bmp::sim::EstimatorResult& e) {
    return json{{"value", e.value},
                {"stderr", e.stderr_},
                {"reps", e.reps},
                {"seed", e.seed}};
}

void write_manifest(const Options& opt, const std::string& subcommand, json knobs) {
    json m;
    m["version"] = bmp::kVersion;
    m["subcommand"] = subcommand;
    if (!opt.model_path.empty()) m["model"] = opt.model_path;
    m["out"] = opt.out_dir;
    m["knobs"] = std::move(knobs);
    write_json(out_path(opt, "manifest.json"), m);
}

// ---------------------------------------------------------------------------
// spectral: eigendata report plus the uniform-convergence gap curve.

int cmd_spectral(const Options& opt) {
    const auto lm = load(opt);
    const auto a = bmp::model::mean_generator(lm.m);

    json rep;
    rep["lambda"] = lm.sd.lambda;
    rep["supercritical"] = lm.sd.supercritical;
    rep["phi"] = lm.sd.phi;
    rep["phi_tilde"] = lm.sd.phi_tilde;
    if (lm.sd.spectral_gap) {
        rep["spectral_gap"] = *lm.sd.spectral_gap;
    } else {
        rep["spectral_gap"] = nullptr;
    }
    json curve = json::array();
    for (int j = 0; j <= opt.points; ++j) {
        const double t = opt.tmax * j / opt.points;
        curve.push_back(json::array({t, bmp::spectral::h1_gap(a, lm.sd, t)}));
    }
    rep["h1_gap_curve"] = curve;
    write_json(out_path(opt, "spectral.json"), rep);
    write_manifest(opt, "spectral",
                   json{{"seed", opt.seed}, {"tmax", opt.tmax}, {"points", opt.points}});

    std::printf("lambda = %.12g (%s)\n", lm.sd.lambda,
                lm.sd.supercritical ? "supercritical" : "not supercritical");
    if (lm.sd.spectral_gap) std::printf("spectral gap = %.12g\n", *lm.sd.spectral_gap);
    std::printf("wrote %s\n", out_path(opt, "spectral.json").c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// moments: limit moment table, the bound constant, and the determinacy report.

int cmd_moments(const Options& opt) {
    const auto lm = load(opt);
    if (opt.x0 >= lm.m.n()) bmp::fail(bmp::errkind::kUsage, "--x0 out of range");
    const auto table = bmp::moments::compute_Lk(lm.m, lm.sd, opt.kmax);
    const auto bound = bmp::moments::check_moment_bound(lm.sd, table);

    Vector s_row(static_cast<std::size_t>(opt.kmax) + 1, 0.0);
    for (int k = 1; k <= opt.kmax; ++k) s_row[k] = table.s[k][opt.x0];
    const auto det = bmp::moments::carleman_report(s_row);

    json rep;
    rep["kmax"] = opt.kmax;
    rep["x0"] = opt.x0;
    json l_rows = json::array();
    json s_rows = json::array();
    for (int k = 1; k <= opt.kmax; ++k) {
        l_rows.push_back(table.L[k]);
        s_rows.push_back(table.s[k]);
    }
    rep["L"] = l_rows;  // row i holds order i+1, states in model order
    rep["s"] = s_rows;
    rep["C_star"] = bound.c_star;
    json car;
    car["c_star"] = det.c_star;
    car["terms"] = std::vector<double>(det.terms.begin() + 1, det.terms.end());
    car["partial_sums"] = std::vector<double>(det.partial_sums.begin() + 1, det.partial_sums.end());
    car["verdict"] =
        det.verdict == bmp::moments::Verdict::kDivergentTrend ? "divergent_trend" : "inconclusive";
    rep["carleman"] = car;
    write_json(out_path(opt, "moments.json"), rep);
    write_manifest(opt, "moments", json{{"kmax", opt.kmax}, {"x0", opt.x0}});

    std::printf("C_star = %.12g, carleman verdict = %s\n", bound.c_star,
                car["verdict"].get<std::string>().c_str());
    std::printf("wrote %s\n", out_path(opt, "moments.json").c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// simulate: scaled k-th moment estimator, optionally dumping each replicate.

int cmd_simulate(const Options& opt) {
    const auto lm = load(opt);
    if (opt.x0 >= lm.m.n()) bmp::fail(bmp::errkind::kUsage, "--x0 out of range");
    if (opt.k < 1 || opt.k > 4) bmp::fail(bmp::errkind::kUsage, "--k must be in 1..4");
    const Vector f = parse_payload(opt.f_spec, lm.m.n());

    bmp::sim::EstimatorResult est;
    if (opt.dump_reps) {
        // Reproduce the estimator's per-replicate values (same streams, same
        // arithmetic) so the CSV and the JSON agree exactly.
        std::vector<double> values(static_cast<std::size_t>(opt.reps));
        std::string csv = "rep,value\n";
        for (std::int64_t r = 0; r < opt.reps; ++r) {
            bmp::rng::RngStream rng(opt.seed, static_cast<std::uint64_t>(r));
            const auto ps = bmp::sim::simulate(lm.m, opt.x0, opt.T, rng);
            double acc = 0.0;
            for (std::size_t x = 0; x < f.size(); ++x)
                acc += static_cast<double>(ps.counts[x]) * f[x];
            double v = std::exp(-lm.sd.lambda * opt.T) * acc;
            double p = 1.0;
            for (int i = 0; i < opt.k; ++i) p *= v;
            values[static_cast<std::size_t>(r)] = p;
            csv += std::to_string(r) + "," + num(p) + "\n";
        }
        const auto s = bmp::stats::summarize(values);
        est = bmp::sim::EstimatorResult{s.mean, s.stderr_, opt.reps, opt.seed};
        write_text(out_path(opt, "reps.csv"), csv);
    } else {
        est = bmp::sim::mc_moment(lm.m, lm.sd, f, opt.k, opt.x0, opt.T, opt.reps, opt.seed);
    }

    json rep = estimator_json(est);
    rep["k"] = opt.k;
    rep["T"] = opt.T;
    rep["x0"] = opt.x0;
    rep["f"] = f;
    write_json(out_path(opt, "simulate.json"), rep);
    write_manifest(opt, "simulate",
                   json{{"seed", opt.seed},
                        {"x0", opt.x0},
                        {"T", opt.T},
                        {"reps", opt.reps},
                        {"k", opt.k},
                        {"f", f},
                        {"dump_reps", opt.dump_reps}});

    std::printf("scaled moment (k=%d, T=%g): %.8g +- %.3g\n", opt.k, opt.T, est.value,
                est.stderr_);
    std::printf("wrote %s\n", out_path(opt, "simulate.json").c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// verify-lemma: exact composition-sum sweep; CSV of every cell plus a JSON
// summary with the fitted constant.

int cmd_verify_lemma(const Options& opt) {
    const auto rep = bmp::comb::verify_lemma_bound(opt.lemma_kmax, opt.lemma_nmax);

    static const char* kSelectorNames[4] = {"all", "at_least_two_positive", "all_positive",
                                            "all_positive_three_gt1"};
    std::string csv = "N,k,selector,exact,double\n";
    for (const auto& cell : rep.cells) {
        for (int s = 0; s < 4; ++s) {
            csv += std::to_string(cell.n_parts) + "," + std::to_string(cell.k) + "," +
                   kSelectorNames[s] + "," + bmp::comb::rational_string(cell.sums[s]) + "," +
                   num(cell.sums[s].get_d()) + "\n";
        }
    }
    write_text(out_path(opt, "lemma.csv"), csv);

    json summary;
    summary["C_fitted"] = bmp::comb::rational_string(rep.fitted_c);
    summary["C_fitted_double"] = rep.fitted_c.get_d();
    summary["C_fitted_arg_N"] = rep.fitted_c_arg_n;
    summary["three_gt1_max"] = bmp::comb::rational_string(rep.three_gt1_max);
    summary["three_gt1_max_double"] = rep.three_gt1_max.get_d();
    summary["three_gt1_bound_ok"] = rep.three_gt1_bound_ok;
    summary["partition_identity_ok"] = rep.partition_identity_ok;
    summary["stable_under_kmax"] = rep.stable;
    summary["pass"] = rep.pass;
    write_json(out_path(opt, "lemma.json"), summary);
    write_manifest(opt, "verify-lemma",
                   json{{"kmax", opt.lemma_kmax}, {"nmax", opt.lemma_nmax}});

    std::printf("fitted C = %s, restricted max = %s, %s\n",
                bmp::comb::rational_string(rep.fitted_c).c_str(),
                bmp::comb::rational_string(rep.three_gt1_max).c_str(),
                rep.pass ? "pass" : "FAIL");
    std::printf("wrote %s\n", out_path(opt, "lemma.csv").c_str());
    return rep.pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// verify-delta: finite-horizon vs limit moment gap, maximized over a probe
// family (state indicators, the constant 1, normalized phi, and --probes
// random payloads drawn from dedicated auxiliary streams).

std::vector<Vector> probe_family(const LoadedModel& lm, int probes, std::uint64_t seed) {
    const std::size_t n = lm.m.n();
    std::vector<Vector> family;
    for (std::size_t x = 0; x < n; ++x) {
        Vector e(n, 0.0);
        e[x] = 1.0;
        family.push_back(e);
    }
    family.emplace_back(n, 1.0);
    double sup = 0.0;
    for (double v : lm.sd.phi) sup = std::max(sup, std::fabs(v));
    Vector phin(n);
    for (std::size_t x = 0; x < n; ++x) phin[x] = lm.sd.phi[x] / sup;
    family.push_back(phin);
    for (int j = 0; j < probes; ++j) {
        bmp::rng::RngStream rng(seed, bmp::rng::kAuxStreamBase + static_cast<std::uint64_t>(j));
        Vector v(n);
        for (std::size_t x = 0; x < n; ++x) v[x] = rng.uniform();
        family.push_back(v);
    }
    return family;
}

int cmd_verify_delta(const Options& opt) {
    const auto lm = load(opt);
    const auto table = bmp::moments::compute_Lk(lm.m, lm.sd, std::max(opt.l, 1));

    // Exactness self-check: at order 1 the normalized eigenfunction probe
    // must give an identically zero curve.
    double sup = 0.0;
    for (double v : lm.sd.phi) sup = std::max(sup, std::fabs(v));
    Vector phin(lm.m.n());
    for (std::size_t x = 0; x < lm.m.n(); ++x) phin[x] = lm.sd.phi[x] / sup;
    double order1_worst = 0.0;
    for (double d : bmp::moments::delta_curve(lm.m, lm.sd, table, phin, 1, opt.tmax, opt.points))
        order1_worst = std::max(order1_worst, d);

    const auto family = probe_family(lm, opt.probes, opt.seed);
    std::vector<double> delta(static_cast<std::size_t>(opt.points) + 1, 0.0);
    for (const auto& f : family) {
        const auto curve =
            bmp::moments::delta_curve(lm.m, lm.sd, table, f, opt.l, opt.tmax, opt.points);
        for (std::size_t j = 0; j < delta.size(); ++j) delta[j] = std::max(delta[j], curve[j]);
    }

    std::string csv = "t,delta\n";
    for (int j = 0; j <= opt.points; ++j) {
        csv += num(opt.tmax * j / opt.points) + "," + num(delta[static_cast<std::size_t>(j)]) +
               "\n";
    }
    write_text(out_path(opt, "delta.csv"), csv);

    const bool ok = order1_worst <= 1e-10;
    json summary;
    summary["l"] = opt.l;
    summary["tmax"] = opt.tmax;
    summary["probe_count"] = family.size();
    summary["delta_start"] = delta.front();
    summary["delta_end"] = delta.back();
    summary["order1_selfcheck_max"] = order1_worst;
    summary["pass"] = ok;
    write_json(out_path(opt, "delta.json"), summary);
    write_manifest(opt, "verify-delta",
                   json{{"seed", opt.seed},
                        {"l", opt.l},
                        {"tmax", opt.tmax},
                        {"points", opt.points},
                        {"probes", opt.probes}});

    std::printf("delta over %zu probes: %.6g at t=0 -> %.6g at t=%g (order-1 self-check %.2g)\n",
                family.size(), delta.front(), delta.back(), opt.tmax, order1_worst);
    std::printf("wrote %s\n", out_path(opt, "delta.csv").c_str());
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// verify-lln: the mean-square residual of the scaled occupation against its
// deterministic counterpart, at a short and a long horizon.

json lln_point(const LoadedModel& lm, const Vector& f, const Options& opt, double T,
               std::uint64_t seed, bool& ok) {
    const auto est = bmp::sim::mc_lln_gap(lm.m, lm.sd, f, opt.x0, T, opt.reps, seed);

    double proj = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x) proj += lm.sd.phi_tilde[x] * f[x];
    Vector g(f.size());
    for (std::size_t x = 0; x < f.size(); ++x) g[x] = f[x] - proj * lm.sd.phi[x];
    const double exact = bmp::moments::finite_time_moment(lm.m, lm.sd, g, 2, T)[opt.x0] *
                         std::exp(-2.0 * lm.sd.lambda * T);

    const double diff = est.value - exact;
    const bool point_ok = std::fabs(diff) <= 3.0 * est.stderr_ + 1e-12;
    ok = ok && point_ok;

    json j = estimator_json(est);
    j["T"] = T;
    j["exact"] = exact;
    j["z"] = est.stderr_ > 0.0 ? diff / est.stderr_ : 0.0;
    j["within_3se"] = point_ok;
    return j;
}

int cmd_verify_lln(const Options& opt) {
    const auto lm = load(opt);
    if (opt.x0 >= lm.m.n()) bmp::fail(bmp::errkind::kUsage, "--x0 out of range");
    const Vector f = parse_payload(opt.f_spec, lm.m.n());

    bool ok = true;
    json rep;
    rep["t_short"] = lln_point(lm, f, opt, opt.T / 4.0, opt.seed, ok);
    rep["t_long"] = lln_point(lm, f, opt, opt.T, opt.seed + 1, ok);

    const double vs = rep["t_short"]["value"].get<double>();
    const double vl = rep["t_long"]["value"].get<double>();
    const double ss = rep["t_short"]["stderr"].get<double>();
    const double sl = rep["t_long"]["stderr"].get<double>();
    const bool decreased = vl <= vs + 3.0 * std::hypot(ss, sl) + 1e-12;
    rep["gap_decreased"] = decreased;
    ok = ok && decreased;
    rep["pass"] = ok;
    write_json(out_path(opt, "lln.json"), rep);
    write_manifest(opt, "verify-lln",
                   json{{"seed", opt.seed},
                        {"x0", opt.x0},
                        {"T", opt.T},
                        {"reps", opt.reps},
                        {"f", f}});

    std::printf("lln gap: %.6g (T=%g) -> %.6g (T=%g), exact match %s\n", vs, opt.T / 4.0, vl,
                opt.T, ok ? "pass" : "FAIL");
    std::printf("wrote %s\n", out_path(opt, "lln.json").c_str());
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// verify-corollary: running-integral estimator against the two candidate
// limit constants. Targets carry the phi(x0) factor (the limit variable has
// mean phi(x0) from a single ancestor).

int cmd_verify_corollary(const Options& opt) {
    const auto lm = load(opt);
    if (opt.x0 >= lm.m.n()) bmp::fail(bmp::errkind::kUsage, "--x0 out of range");
    const Vector f = parse_payload(opt.f_spec, lm.m.n());

    const auto est =
        bmp::sim::mc_running_integral(lm.m, lm.sd, f, opt.x0, opt.T, opt.reps, opt.seed);
    double ftf = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x) ftf += lm.sd.phi_tilde[x] * f[x];
    const double mean_w = lm.sd.phi[opt.x0];
    const double target_a = mean_w * ftf;
    const double target_b = mean_w * ftf / lm.sd.lambda;
    const double za = (est.value - target_a) / est.stderr_;
    const double zb = (est.value - target_b) / est.stderr_;
    const bool hit_a = std::fabs(za) <= 3.0;
    const bool hit_b = std::fabs(zb) <= 3.0;

    std::string matches = "neither";
    if (hit_a && hit_b) {
        matches = "both";
    } else if (hit_a) {
        matches = "phitilde_f";
    } else if (hit_b) {
        matches = "phitilde_f_over_lambda";
    }
    const bool ok = hit_a || hit_b;

    json rep = estimator_json(est);
    rep["T"] = opt.T;
    rep["phitilde_f"] = target_a;
    rep["phitilde_f_over_lambda"] = target_b;
    rep["z_phitilde_f"] = za;
    rep["z_phitilde_f_over_lambda"] = zb;
    rep["matches"] = matches;
    rep["pass"] = ok;
    write_json(out_path(opt, "corollary.json"), rep);
    write_manifest(opt, "verify-corollary",
                   json{{"seed", opt.seed},
                        {"x0", opt.x0},
                        {"T", opt.T},
                        {"reps", opt.reps},
                        {"f", f}});

    std::printf("running integral %.6g +- %.2g matches %s (z = %.2f / %.2f)\n", est.value,
                est.stderr_, matches.c_str(), za, zb);
    std::printf("wrote %s\n", out_path(opt, "corollary.json").c_str());
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// verify-laplace: paired gap between the horizon-T Laplace functional and the
// one evaluated on the limit variable.

int cmd_verify_laplace(const Options& opt) {
    const auto lm = load(opt);
    if (opt.x0 >= lm.m.n()) bmp::fail(bmp::errkind::kUsage, "--x0 out of range");
    const Vector f = parse_payload(opt.f_spec, lm.m.n());

    const auto lap =
        bmp::sim::laplace_functional_gap(lm.m, lm.sd, f, opt.x0, opt.T, opt.reps, opt.seed);
    const bool ok = lap.gap.value <= 3.0 * lap.gap.stderr_ + 1e-12;

    json rep;
    rep["gap"] = estimator_json(lap.gap);
    rep["T"] = opt.T;
    rep["mean_functional"] = lap.mean_functional;
    rep["mean_limit"] = lap.mean_limit;
    rep["pass"] = ok;
    write_json(out_path(opt, "laplace.json"), rep);
    write_manifest(opt, "verify-laplace",
                   json{{"seed", opt.seed},
                        {"x0", opt.x0},
                        {"T", opt.T},
                        {"reps", opt.reps},
                        {"f", f}});

    std::printf("laplace gap %.3g +- %.2g (%s); E[exp(-X_T[f] e^{-lambda T})] = %.6g\n",
                lap.gap.value, lap.gap.stderr_, ok ? "pass" : "FAIL", lap.mean_functional);
    std::printf("wrote %s\n", out_path(opt, "laplace.json").c_str());
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// paper-check: one-shot pipeline over all verification steps.

int cmd_paper_check(Options opt) {
    json steps;
    int worst = 0;
    const auto run_step = [&](const char* name, int rc) {
        steps[name] = (rc == 0);
        worst = std::max(worst, rc);
        std::printf("[%s] %s\n", rc == 0 ? "ok" : "FAIL", name);
    };

    opt.kmax = 10;
    run_step("spectral", cmd_spectral(opt));
    run_step("moments", cmd_moments(opt));
    run_step("verify-lemma", cmd_verify_lemma(opt));
    run_step("verify-lln", cmd_verify_lln(opt));
    run_step("verify-delta", cmd_verify_delta(opt));
    run_step("verify-corollary", cmd_verify_corollary(opt));
    run_step("verify-laplace", cmd_verify_laplace(opt));

    json rep;
    rep["steps"] = steps;
    rep["pass"] = worst == 0;
    write_json(out_path(opt, "paper_check.json"), rep);
    write_manifest(opt, "paper-check",
                   json{{"seed", opt.seed},
                        {"x0", opt.x0},
                        {"T", opt.T},
                        {"reps", opt.reps},
                        {"kmax", opt.kmax},
                        {"lemma_kmax", opt.lemma_kmax},
                        {"lemma_nmax", opt.lemma_nmax},
                        {"l", opt.l},
                        {"tmax", opt.tmax},
                        {"points", opt.points},
                        {"probes", opt.probes}});
    std::printf("paper check: %s\n", worst == 0 ? "pass" : "FAIL");
    return worst;
}

int emit_error(const std::string& kind, const std::string& message) {
    json j;
    j["kind"] = kind;
    j["message"] = message;
    std::fprintf(stderr, "%s\n", j.dump().c_str());
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"branching Markov process toolkit"};
    app.require_subcommand(1);

    Options opt;
    const auto add_common = [&](CLI::App* cmd, bool needs_model) {
        if (needs_model) {
            cmd->add_option("--model", opt.model_path, "model JSON file")->required();
        }
        cmd->add_option("--out", opt.out_dir, "output directory (default .)");
        cmd->add_option("--seed", opt.seed, "RNG seed");
    };

    auto* spectral = app.add_subcommand("spectral", "eigendata and convergence-gap curve");
    add_common(spectral, true);
    spectral->add_option("--tmax", opt.tmax, "curve horizon");
    spectral->add_option("--points", opt.points, "curve intervals");

    auto* moments = app.add_subcommand("moments", "limit moment table and determinacy report");
    add_common(moments, true);
    moments->add_option("--kmax", opt.kmax, "highest moment order (default 10)");
    moments->add_option("--x0", opt.x0, "state for the determinacy row");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo scaled moment estimator");
    add_common(simulate, true);
    simulate->add_option("--x0", opt.x0, "starting state index");
    simulate->add_option("--T", opt.T, "horizon");
    simulate->add_option("--reps", opt.reps, "replicates");
    simulate->add_option("--f", opt.f_spec, "payload vector, comma separated (default all ones)");
    simulate->add_option("--k", opt.k, "moment order (1..4)");
    simulate->add_flag("--dump-reps", opt.dump_reps, "write per-replicate values to reps.csv");

    auto* lemma = app.add_subcommand("verify-lemma", "exact composition-sum bounds");
    add_common(lemma, false);
    lemma->add_option("--kmax", opt.lemma_kmax, "highest order (default 20)");
    lemma->add_option("--nmax", opt.lemma_nmax, "largest part count (default 8)");

    auto* delta = app.add_subcommand("verify-delta", "finite-horizon vs limit moment gap");
    add_common(delta, true);
    delta->add_option("--l", opt.l, "moment order (default 2)");
    delta->add_option("--tmax", opt.tmax, "curve horizon");
    delta->add_option("--points", opt.points, "curve intervals");
    delta->add_option("--probes", opt.probes, "random probes (default 32)");

    auto* lln = app.add_subcommand("verify-lln", "mean-square residual vs exact curve");
    add_common(lln, true);
    lln->add_option("--x0", opt.x0, "starting state index");
    lln->add_option("--T", opt.T, "long horizon (short horizon is T/4)");
    lln->add_option("--reps", opt.reps, "replicates");
    lln->add_option("--f", opt.f_spec, "payload vector (default all ones)");

    auto* corollary = app.add_subcommand("verify-corollary", "running-integral limit constant");
    add_common(corollary, true);
    corollary->add_option("--x0", opt.x0, "starting state index");
    corollary->add_option("--T", opt.T, "horizon");
    corollary->add_option("--reps", opt.reps, "replicates");
    corollary->add_option("--f", opt.f_spec, "payload vector (default all ones)");

    auto* laplace = app.add_subcommand("verify-laplace", "Laplace functional gap");
    add_common(laplace, true);
    laplace->add_option("--x0", opt.x0, "starting state index");
    laplace->add_option("--T", opt.T, "horizon");
    laplace->add_option("--reps", opt.reps, "replicates");
    laplace->add_option("--f", opt.f_spec, "payload vector (default all ones)");

    auto* paper = app.add_subcommand("paper-check", "run every verification step");
    add_common(paper, true);
    paper->add_option("--x0", opt.x0, "starting state index");
    paper->add_option("--T", opt.T, "Monte Carlo horizon");
    paper->add_option("--reps", opt.reps, "replicates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return emit_error(bmp::errkind::kUsage, e.what());
    }

    try {
        if (app.got_subcommand(spectral)) return cmd_spectral(opt);
        if (app.got_subcommand(moments)) return cmd_moments(opt);
        if (app.got_subcommand(simulate)) return cmd_simulate(opt);
        if (app.got_subcommand(lemma)) return cmd_verify_lemma(opt);
        if (app.got_subcommand(delta)) return cmd_verify_delta(opt);
        if (app.got_subcommand(lln)) return cmd_verify_lln(opt);
        if (app.got_subcommand(corollary)) return cmd_verify_corollary(opt);
        if (app.got_subcommand(laplace)) return cmd_verify_laplace(opt);
        if (app.got_subcommand(paper)) return cmd_paper_check(opt);
    } catch (const bmp::Error& e) {
        return emit_error(e.kind(), e.what());
    } catch (const std::exception& e) {
        return emit_error("internal", e.what());
    }
    return emit_error(bmp::errkind::kUsage, "no subcommand selected");
}
