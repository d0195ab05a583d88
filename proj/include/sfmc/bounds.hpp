#ifndef SFMC_BOUNDS_HPP
#define SFMC_BOUNDS_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "sfmc/channels.hpp"
#include "sfmc/model.hpp"

namespace sfmc {

/// Tunable constants of the lower-bound machinery. The absolute constant
/// c_d is unknown in general and defaults to 1; every downstream report is
/// therefore a rate statement "up to constants". gamma_d_const defaults to
/// 90% of the largest value for which the packing KL budgets are feasible
/// at the chosen alpha; values outside that range are representable so
/// that infeasible configurations can be verified to fail.
struct BoundConstants {
    double c_d = 1.0;
    double alpha = 1.0 / 16.0;
    double gamma_d_const = default_gamma(1.0 / 16.0);

    /// 0.9 * sqrt(alpha * log 2) / 2.
    static double default_gamma(double alpha);

    /// Largest feasible gamma for the KL budgets: sqrt(alpha * log 2) / 2.
    static double gamma_feasible_limit(double alpha);

    bool gamma_feasible() const { return gamma_d_const < gamma_feasible_limit(alpha); }

    /// Throws std::invalid_argument unless 0 < alpha < 1/8, c_d > 0 and
    /// gamma_d_const > 0. Feasibility of gamma is reported, not enforced.
    void validate() const;
};

enum class Regime { boundedness, parametric };

std::string regime_name(Regime regime);

/// Evaluated minimax lower bound with its term breakdown.
struct BoundReport {
    double value = 0.0;
    /// a_max^2 * (delta + 1) branch (for the Poisson corollary, a_max^2).
    double boundedness_term = 0.0;
    /// gamma^2 * mu^2 * (n1*r + k)/m branch (Poisson: gamma^2 * x_min * (n1*r + k - n2)/m).
    double parametric_term = 0.0;
    Regime active_regime = Regime::parametric;
    double delta = 0.0;
    std::optional<ChannelKind> channel_tag;
};

/// min(1, k/n2): the fraction of dictionary degrees of freedom that
/// manifest given the sparse factor's column coverage.
double delta_factor(int k, int n2);

/// value = c_d * min(boundedness_term, parametric_term); ties resolve to
/// the parametric regime. Requires 1 <= m <= n1*n2.
BoundReport general_lower_bound(const ModelClassParams& params, double mu_d,
                                std::int64_t m, const BoundConstants& consts);

/// min(mu_d, a_max)^2 * (n1*r*delta + k) / m.
double large_sample_rate(const ModelClassParams& params, double mu_d, std::int64_t m);

/// delta * a_max^2; independent of m.
double small_sample_rate(const ModelClassParams& params);

/// Channel-specific instantiation of the lower bound. Gaussian, Laplace and
/// one-bit dispatch through general_lower_bound with the channel's
/// quadratic-KL coefficient; Poisson uses its own branch pair and requires
/// x_min set and k >= n2.
BoundReport corollary_bound(const NoiseChannel& channel, const ModelClassParams& params,
                            std::int64_t m, const BoundConstants& consts);

/// Published achievable rate for the matching penalized maximum-likelihood
/// estimator, evaluated with leading constant 1. Advisory overlay only:
/// the true rates hold up to unspecified constants.
double upper_bound_rate(const NoiseChannel& channel, const ModelClassParams& params,
                        std::int64_t m);

} // namespace sfmc

#endif // SFMC_BOUNDS_HPP
