#include "bmp/comb.hpp"
#include "bmp/comb_exact.hpp"

#include <algorithm>

namespace bmp::comb {

std::vector<Composition> enumerate_compositions(int k, int n_parts, Selector sel) {
    std::vector<Composition> out;
    for_each_composition(k, n_parts, sel,
                         [&out](const std::vector<int>& parts) { out.push_back({parts}); });
    return out;
}

namespace {

const mpz_class& factorial(int k) {
    static const std::vector<mpz_class> table = [] {
        std::vector<mpz_class> t(kMaxK + 1);
        t[0] = 1;
        for (int i = 1; i <= kMaxK; ++i) t[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i - 1)] * i;
        return t;
    }();
    return table[static_cast<std::size_t>(k)];
}

mpz_class binomial(int n, int r) {
    mpz_class out;
    mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(r));
    return out;
}

}  // namespace

mpz_class multinomial(int k, const std::vector<int>& parts) {
    if (k < 0 || k > kMaxK) fail(errkind::kCapExceeded, "multinomial order out of range");
    int total = 0;
    mpz_class denom = 1;
    for (int p : parts) {
        if (p < 0) fail(errkind::kInvariant, "multinomial parts must be >= 0");
        total += p;
        denom *= factorial(p);
    }
    if (total != k) fail(errkind::kInvariant, "multinomial parts must sum to k");
    return factorial(k) / denom;
}

mpq_class inverse_multinomial_sum(int k, int n_parts, Selector sel) {
    mpq_class acc = 0;
    for_each_composition(k, n_parts, sel, [&](const std::vector<int>& parts) {
        acc += mpq_class(1, 1) / mpq_class(multinomial(k, parts));
    });
    acc.canonicalize();
    return acc;
}

std::array<mpq_class, 4> cell_sums(int k, int n_parts) {
    std::array<mpq_class, 4> sums{};
    for_each_composition(k, n_parts, Selector::kAll, [&](const std::vector<int>& parts) {
        int positive = 0;
        int greater_one = 0;
        for (int p : parts) {
            if (p > 0) ++positive;
            if (p > 1) ++greater_one;
        }
        const mpq_class term = mpq_class(1, 1) / mpq_class(multinomial(k, parts));
        sums[0] += term;
        if (positive >= 2) sums[1] += term;
        if (positive == n_parts) {
            sums[2] += term;
            if (greater_one >= 3) sums[3] += term;
        }
    });
    for (auto& s : sums) s.canonicalize();
    return sums;
}

LemmaReport verify_lemma_bound(int k_max, int n_max) {
    check_composition_caps(k_max, n_max);
    constexpr int kStabilityK = 15;

    LemmaReport rep;
    rep.k_max = k_max;
    rep.n_max = n_max;
    rep.three_gt1_max = 0;
    rep.partition_identity_ok = true;
    rep.stable = true;

    rep.sup_all_by_n.assign(static_cast<std::size_t>(n_max), mpq_class(0));
    rep.sup_all_arg_k.assign(static_cast<std::size_t>(n_max), 0);
    std::vector<mpq_class> sup_prefix(static_cast<std::size_t>(n_max), mpq_class(0));

    // all_positive_by[N][k] feeds the partition identity, with the 0-slot
    // convention sum(k, 0) = [k == 0].
    std::vector<std::vector<mpq_class>> all_positive_by(
        static_cast<std::size_t>(n_max) + 1, std::vector<mpq_class>(static_cast<std::size_t>(k_max) + 1, mpq_class(0)));
    for (int k = 0; k <= k_max; ++k) all_positive_by[0][static_cast<std::size_t>(k)] = (k == 0) ? 1 : 0;

    for (int n = 1; n <= n_max; ++n) {
        for (int k = 0; k <= k_max; ++k) {
            LemmaCell cell;
            cell.n_parts = n;
            cell.k = k;
            cell.sums = cell_sums(k, n);
            all_positive_by[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] = cell.sums[2];

            auto& sup = rep.sup_all_by_n[static_cast<std::size_t>(n - 1)];
            if (cell.sums[0] > sup) {
                sup = cell.sums[0];
                rep.sup_all_arg_k[static_cast<std::size_t>(n - 1)] = k;
            }
            if (k <= kStabilityK && cell.sums[0] > sup_prefix[static_cast<std::size_t>(n - 1)]) {
                sup_prefix[static_cast<std::size_t>(n - 1)] = cell.sums[0];
            }
            if (cell.sums[3] > rep.three_gt1_max) rep.three_gt1_max = cell.sums[3];

            // Partition over the zero set: choosing which alpha slots are zero
            // must reassemble the unrestricted sum exactly.
            mpq_class assembled = 0;
            for (int alpha = 0; alpha <= n; ++alpha) {
                assembled += mpq_class(binomial(n, alpha)) *
                             all_positive_by[static_cast<std::size_t>(n - alpha)][static_cast<std::size_t>(k)];
            }
            if (assembled != cell.sums[0]) rep.partition_identity_ok = false;

            rep.cells.push_back(std::move(cell));
        }
        if (rep.sup_all_by_n[static_cast<std::size_t>(n - 1)] != sup_prefix[static_cast<std::size_t>(n - 1)]) {
            rep.stable = false;
        }
    }

    rep.fitted_c = 0;
    rep.fitted_c_prefix = 0;
    for (int n = 1; n <= n_max; ++n) {
        const mpz_class pow2 = mpz_class(1) << n;
        mpq_class ratio = rep.sup_all_by_n[static_cast<std::size_t>(n - 1)] / mpq_class(pow2);
        ratio.canonicalize();
        if (ratio > rep.fitted_c) {
            rep.fitted_c = ratio;
            rep.fitted_c_arg_n = n;
        }
        mpq_class ratio_prefix = sup_prefix[static_cast<std::size_t>(n - 1)] / mpq_class(pow2);
        ratio_prefix.canonicalize();
        if (ratio_prefix > rep.fitted_c_prefix) rep.fitted_c_prefix = ratio_prefix;
    }

    rep.three_gt1_bound_ok = rep.three_gt1_max <= mpq_class(4);
    rep.pass = rep.three_gt1_bound_ok && rep.partition_identity_ok && rep.stable;
    return rep;
}

std::string rational_string(const mpq_class& q) {
    return q.get_str();
}

}  // namespace bmp::comb
