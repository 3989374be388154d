#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bmp/linalg.hpp"

// ============================================================================
// Branching Markov process model on a finite state space.
//
// Particles move by a sub-Markov generator q (off-diagonal rates >= 0, row
// sums <= 0; any deficit is a killing rate into an absorbing cemetery) and
// branch at rate gamma(x) into an offspring configuration drawn from a
// per-state finite law. The empty configuration encodes death at branching.
// ============================================================================

namespace bmp::model {

inline constexpr std::size_t kMaxStates = 64;
inline constexpr std::size_t kMaxLitter = 16;

/// One offspring configuration: probability plus the children's states
/// (duplicates allowed, order irrelevant).
struct OffspringConfig {
    double p = 0.0;
    std::vector<std::uint32_t> children;
};

/// Finite offspring law at one state; probabilities sum to 1.
using OffspringLaw = std::vector<OffspringConfig>;

struct BmpModel {
    std::vector<std::string> states;
    linalg::Matrix q;             // motion generator, n x n
    linalg::Vector gamma;         // branching rates, >= 0
    std::vector<OffspringLaw> offspring;  // one law per state

    [[nodiscard]] std::size_t n() const { return states.size(); }
    /// Killing rate at x: the (nonnegative) deficit of row x of q.
    [[nodiscard]] double kill_rate(std::size_t x) const;
    /// Index of a state label; throws if unknown.
    [[nodiscard]] std::size_t state_index(const std::string& label) const;
};

/// Parse and validate a model from JSON text. Unknown fields, dimension
/// mismatches, negative rates, bad probabilities, and cap violations are all
/// rejected with the offending location named. Offspring probabilities off by
/// at most 1e-12 from 1 are renormalized; larger defects are rejected.
BmpModel parse_model(const std::string& json_text);

/// Load a model from a JSON file.
BmpModel load_model(const std::string& path);

/// Mean offspring matrix M(x, y) = E_x[number of children at y].
linalg::Matrix mean_offspring_matrix(const BmpModel& m);

/// Mean generator A = q + diag(gamma) (M - I); governs first moments.
linalg::Matrix mean_generator(const BmpModel& m);

/// sup_x E_x[2^N]: the geometric litter-size moment that must be finite for
/// the moment machinery (automatic here, but reported).
double check_h2_geometric(const BmpModel& m);

/// sup_x E_x[N^k] for integer k >= 1.
double check_h2k(const BmpModel& m, int k);

/// E_x[h(children)] over the offspring law at x.
double expect_over_configs(const BmpModel& m, std::size_t x,
                           const std::function<double(const std::vector<std::uint32_t>&)>& h);

}  // namespace bmp::model
