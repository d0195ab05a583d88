#ifndef SFMC_ESTIMATORS_HPP
#define SFMC_ESTIMATORS_HPP

#include "sfmc/channels.hpp"
#include "sfmc/model.hpp"
#include "sfmc/rng.hpp"
#include "sfmc/sim.hpp"

namespace sfmc {

enum class InitScheme { random_uniform, spectral_like };

struct EstimatorConfig {
    int max_iters = 200;
    /// Relative objective-change threshold for convergence.
    double tol = 1e-6;
    /// Initial gradient step; adapted by backtracking halving.
    double step_size = 0.1;
    InitScheme init_scheme = InitScheme::random_uniform;
    /// 0 means "use the class parameter".
    int k_budget = 0;
    int r_budget = 0;
    int restarts = 5;

    int effective_k(const ModelClassParams& params) const {
        return k_budget > 0 ? k_budget : params.k;
    }
    int effective_r(const ModelClassParams& params) const {
        return r_budget > 0 ? r_budget : params.r;
    }
    /// Throws std::invalid_argument if budgets exceed the class parameters
    /// or scalar settings are out of range.
    void validate(const ModelClassParams& params) const;
};

/// All-zeros baseline (constant x_min for a positive-rate class).
Matrix estimate_zero(const ObservationSet& obs, const ModelClassParams& params);

/// Observed-entry plug-in: observed cells carry the observation clipped to
/// the class entry bounds (one-bit observations map to +/- the entry cap),
/// unobserved cells are zero (x_min for a positive-rate class).
Matrix estimate_plugin(const ObservationSet& obs, const ModelClassParams& params);

/// Penalized maximum-likelihood surrogate: alternating projected gradient
/// descent on the observed-cell negative log-likelihood. D steps clip to
/// [-1, 1]; A steps hard-threshold to the k budget and clip to
/// [-a_max, a_max]. For a Poisson channel the factors are kept nonnegative
/// with D's first column pinned to 1 and A's first row as per-column
/// offsets in [x_min, a_max], which keeps every entry of D*A at or above
/// x_min. The objective is monotone non-increasing across accepted steps;
/// the best of `restarts` seeded restarts is returned.
///
/// objective_trace, when given, receives the winning restart's accepted
/// objective values (initial value first).
Matrix estimate_sparse_mle(const ObservationSet& obs, const ModelClassParams& params,
                           const NoiseChannel& channel, const EstimatorConfig& cfg,
                           Rng& rng, std::vector<double>* objective_trace = nullptr);

} // namespace sfmc

#endif // SFMC_ESTIMATORS_HPP
