#pragma once

#include <cstdint>
#include <vector>

#include "bmp/linalg.hpp"
#include "bmp/model.hpp"
#include "bmp/rng.hpp"
#include "bmp/spectral.hpp"

// ============================================================================
// Exact event-driven simulation of the branching process, tracking particle
// counts per state (particles of one state are exchangeable, so counts are a
// sufficient description). Each particle of state x carries total event rate
// r(x) = -q(x,x) + gamma(x); an event is a motion jump, a death from the
// conservation deficit of q, or a branch drawing an offspring configuration.
//
// Estimators run `reps` independent replicates. Replicate r draws from the
// counter-based stream (seed, r), and results land in slot r of a fixed
// array before a sequential reduction, so every estimate is bit-identical
// no matter how many worker threads run (BMP_WORKERS, or SimOptions).
// ============================================================================

namespace bmp::sim {

struct SimOptions {
    std::int64_t particle_cap = 10'000'000;  ///< abort above this population
    int workers = 0;                         ///< 0: BMP_WORKERS env, else hardware
};

struct PopulationState {
    double time = 0.0;
    std::vector<std::int64_t> counts;  ///< particles per state
    linalg::Vector occupation;         ///< integral of counts over [0, time]

    [[nodiscard]] std::int64_t total() const;
};

/// Run one trajectory from a single particle of state x0 up to time T.
PopulationState simulate(const model::BmpModel& m, std::size_t x0, double T,
                         rng::RngStream& rng, const SimOptions& opts = {});

struct EstimatorResult {
    double value = 0.0;
    double stderr_ = 0.0;
    std::int64_t reps = 0;
    std::uint64_t seed = 0;
};

/// Mean of (e^{-lambda T} X_T[f])^k over replicates, k in 1..4.
EstimatorResult mc_moment(const model::BmpModel& m, const spectral::SpectralData& sd,
                          const linalg::Vector& f, int k, std::size_t x0, double T,
                          std::int64_t reps, std::uint64_t seed, const SimOptions& opts = {});

/// Per-replicate samples of e^{-lambda T} X_T[phi], an approximation of W.
std::vector<double> mc_W_sample(const model::BmpModel& m, const spectral::SpectralData& sd,
                                std::size_t x0, double T, std::int64_t reps, std::uint64_t seed,
                                const SimOptions& opts = {});

/// Mean squared residual of the law of large numbers: with g = f - (phitilde f) phi,
/// the mean of (e^{-lambda T} X_T[g])^2 over replicates.
EstimatorResult mc_lln_gap(const model::BmpModel& m, const spectral::SpectralData& sd,
                           const linalg::Vector& f, std::size_t x0, double T, std::int64_t reps,
                           std::uint64_t seed, const SimOptions& opts = {});

/// Mean of e^{-lambda T} * integral_0^T X_s[f] ds over replicates.
EstimatorResult mc_running_integral(const model::BmpModel& m, const spectral::SpectralData& sd,
                                    const linalg::Vector& f, std::size_t x0, double T,
                                    std::int64_t reps, std::uint64_t seed,
                                    const SimOptions& opts = {});

struct LaplaceGapResult {
    EstimatorResult gap;      ///< |mean exp(-X_T[f] e^{-lambda T}) - mean exp(-W phitilde[f])|
    double mean_functional = 0.0;  ///< mean of the time-T term
    double mean_limit = 0.0;       ///< mean of the limit-variable term
};

/// Both Laplace transform terms evaluated on the same trajectory, so the gap
/// estimate benefits from the coupling.
LaplaceGapResult laplace_functional_gap(const model::BmpModel& m,
                                        const spectral::SpectralData& sd, const linalg::Vector& f,
                                        std::size_t x0, double T, std::int64_t reps,
                                        std::uint64_t seed, const SimOptions& opts = {});

}  // namespace bmp::sim
