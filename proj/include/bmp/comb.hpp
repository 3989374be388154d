#pragma once

#include <cstdint>
#include <vector>

#include "bmp/errors.hpp"

// ============================================================================
// Compositions of k into N nonnegative ordered parts, with the part-pattern
// selectors the moment recursion and the inverse-multinomial bounds quantify
// over. Enumeration is lexicographic (ascending), so every consumer sees the
// same deterministic order.
// ============================================================================

namespace bmp::comb {

inline constexpr int kMaxK = 64;
inline constexpr int kMaxParts = 16;

enum class Selector {
    kAll,                        // every composition
    kAtLeastTwoPositive,         // >= 2 positive parts (branch interaction terms)
    kAllPositive,                // every part >= 1
    kAllPositiveThreeGreaterOne  // every part >= 1 and >= 3 parts > 1
};

struct Composition {
    std::vector<int> parts;
};

inline void check_composition_caps(int k, int n_parts) {
    if (k < 0 || n_parts < 1) fail(errkind::kInvariant, "compositions need k >= 0 and N >= 1");
    if (k > kMaxK || n_parts > kMaxParts) {
        fail(errkind::kCapExceeded, "composition request (k=" + std::to_string(k) + ", N=" +
                                        std::to_string(n_parts) + ") exceeds caps (64, 16)");
    }
}

inline bool selector_admits(Selector sel, const std::vector<int>& parts) {
    if (sel == Selector::kAll) return true;
    int positive = 0;
    int greater_one = 0;
    for (int p : parts) {
        if (p > 0) ++positive;
        if (p > 1) ++greater_one;
    }
    switch (sel) {
        case Selector::kAtLeastTwoPositive:
            return positive >= 2;
        case Selector::kAllPositive:
            return positive == static_cast<int>(parts.size());
        case Selector::kAllPositiveThreeGreaterOne:
            return positive == static_cast<int>(parts.size()) && greater_one >= 3;
        default:
            return true;
    }
}

/// Visit the admitted compositions in ascending lexicographic order.
template <typename Fn>
void for_each_composition(int k, int n_parts, Selector sel, Fn&& fn) {
    check_composition_caps(k, n_parts);
    std::vector<int> parts(static_cast<std::size_t>(n_parts), 0);
    parts.back() = k;
    while (true) {
        if (selector_admits(sel, parts)) fn(static_cast<const std::vector<int>&>(parts));
        // Advance: bump the last position with mass to its right, dump that
        // mass (minus one) back into the final slot.
        int i = n_parts - 2;
        int suffix = parts[static_cast<std::size_t>(n_parts) - 1];
        while (i >= 0 && suffix == 0) {
            suffix += parts[static_cast<std::size_t>(i)];
            --i;
        }
        if (i < 0) return;
        suffix += parts[static_cast<std::size_t>(i)];
        parts[static_cast<std::size_t>(i)] += 1;
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < parts.size(); ++j) parts[j] = 0;
        parts.back() = suffix - parts[static_cast<std::size_t>(i)];
    }
}

/// Materialized variant of for_each_composition.
std::vector<Composition> enumerate_compositions(int k, int n_parts, Selector sel);

}  // namespace bmp::comb
