#pragma once

#include <array>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "bmp/comb.hpp"

// ============================================================================
// Exact integer/rational evaluation of the inverse-multinomial sums and the
// uniform bounds over them. Everything here is exact: doubles appear only
// when a caller converts for reporting.
// ============================================================================

namespace bmp::comb {

/// k! / (parts[0]! ... parts[N-1]!), exact. Parts must be nonnegative and sum to k.
mpz_class multinomial(int k, const std::vector<int>& parts);

/// Sum of 1/multinomial(k, c) over the admitted compositions, exact.
mpq_class inverse_multinomial_sum(int k, int n_parts, Selector sel);

/// The four selector sums of one (k, N) cell, computed in a single sweep.
/// Indexed by the Selector enum order.
std::array<mpq_class, 4> cell_sums(int k, int n_parts);

struct LemmaCell {
    int n_parts = 0;
    int k = 0;
    std::array<mpq_class, 4> sums;
};

struct LemmaReport {
    int k_max = 0;
    int n_max = 0;
    std::vector<LemmaCell> cells;  // every (N, k), N outer ascending, k inner ascending

    // sup over k of the unrestricted sum, per N (index N-1), with the arg max.
    std::vector<mpq_class> sup_all_by_n;
    std::vector<int> sup_all_arg_k;

    mpq_class fitted_c;  // minimal C with sup_k sum_all(k, N) <= C 2^N for all N <= n_max
    int fitted_c_arg_n = 0;
    mpq_class fitted_c_prefix;  // same constant fitted on k <= min(15, k_max)

    mpq_class three_gt1_max;      // max over cells of the all-positive, >=3-greater-one sum
    bool three_gt1_bound_ok = false;  // three_gt1_max <= 4, exact comparison
    bool partition_identity_ok = false;
    bool stable = false;  // per-N suprema unchanged between k <= 15 and k <= k_max
    bool pass = false;
};

/// Exhaustive verification over k <= k_max, N <= n_max (defaults are the
/// desk-scale 20 and 8; caps from the enumeration layer apply).
LemmaReport verify_lemma_bound(int k_max = 20, int n_max = 8);

/// "num/den" in lowest terms.
std::string rational_string(const mpq_class& q);

}  // namespace bmp::comb
