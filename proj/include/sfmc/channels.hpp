#ifndef SFMC_CHANNELS_HPP
#define SFMC_CHANNELS_HPP

#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "sfmc/model.hpp"
#include "sfmc/rng.hpp"

namespace sfmc {

enum class ChannelKind { gaussian, laplace, poisson, one_bit };

std::string channel_kind_name(ChannelKind kind);

struct ValueInterval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Noise CDF/pdf pair for thresholded one-bit observations.
class Link {
public:
    virtual ~Link() = default;
    virtual double cdf(double t) const = 0;
    virtual double pdf(double t) const = 0;
    virtual std::string name() const = 0;
    virtual double scale() const = 0;
};

class LogisticLink final : public Link {
public:
    explicit LogisticLink(double scale);
    double cdf(double t) const override;
    double pdf(double t) const override;
    std::string name() const override { return "logistic"; }
    double scale() const override { return scale_; }

private:
    double scale_;
};

/// Gaussian-noise link: cdf of N(0, sigma^2).
class ProbitLink final : public Link {
public:
    explicit ProbitLink(double sigma);
    double cdf(double t) const override;
    double pdf(double t) const override;
    std::string name() const override { return "probit"; }
    double scale() const override { return sigma_; }

private:
    double sigma_;
};

// Scalar KL divergences in closed form.
//
// Argument order matters everywhere in this library: kl_*(x, y) is the
// divergence of the distribution at parameter y FROM the one at parameter x,
// i.e. E_x[log p_x / p_y]. The first argument is the "true" parameter.

/// (x-y)^2 / (2 sigma^2).
double kl_gaussian(double x, double y, double sigma);

/// tau|x-y| - (1 - exp(-tau|x-y|)); bounded by (tau^2/2)(x-y)^2.
double kl_laplace(double x, double y, double tau);

/// x log(x/y) - x + y for positive rates; bounded by (x-y)^2 / y.
double kl_poisson(double x, double y);

/// Bernoulli KL between success probabilities F(x) and F(y).
double kl_onebit(double x, double y, const Link& link);

/// Link-steepness constant over [-half_width, half_width]:
///   sqrt(sup 1/(F(t)(1-F(t)))) * sqrt(sup f(t)^2).
/// Suprema are taken over a dense uniform grid including both endpoints.
/// Throws std::domain_error if F reaches 0 or 1 on the interval.
double compute_c_f(const Link& link, double half_width, int grid_points = 10001);

/// Companion infimum constant: inf f(t)^2 / (F(t)(1-F(t))) over the same grid.
double compute_c_f_prime(const Link& link, double half_width, int grid_points = 10001);

/// Scalar observation channel: how a single matrix entry x turns into an
/// observation y. Implementations are immutable; sampling uses a
/// caller-owned Rng.
class NoiseChannel {
public:
    virtual ~NoiseChannel() = default;

    virtual ChannelKind kind() const = 0;
    virtual std::string name() const = 0;

    /// One observation at parameter x. Throws std::domain_error when x is
    /// outside parameter_domain().
    virtual double sample(double x, Rng& rng) const = 0;

    /// log p_x(y).
    virtual double log_likelihood(double y, double x) const = 0;

    /// K(P_x, P_y) = E_x[log p_x / p_y]. See the note on argument order
    /// above the kl_* functions.
    virtual double kl(double x, double y) const = 0;

    /// d/dx of the negative log-likelihood -log p_x(y).
    virtual double nll_grad(double y, double x) const = 0;

    /// Coefficient mu with kl(x, y) <= (x-y)^2 / (2 mu^2) on the valid
    /// domain implied by `params`. Empty for the Poisson channel, whose
    /// lower-bound path runs through the rate floor x_min instead.
    virtual std::optional<double> quadratic_mu(const ModelClassParams& params) const = 0;

    virtual ValueInterval parameter_domain() const = 0;
};

class GaussianChannel final : public NoiseChannel {
public:
    explicit GaussianChannel(double sigma, std::optional<double> sigma_min = std::nullopt);

    ChannelKind kind() const override { return ChannelKind::gaussian; }
    std::string name() const override { return "gaussian"; }
    double sample(double x, Rng& rng) const override;
    double log_likelihood(double y, double x) const override;
    double kl(double x, double y) const override;
    double nll_grad(double y, double x) const override;
    std::optional<double> quadratic_mu(const ModelClassParams&) const override;
    ValueInterval parameter_domain() const override { return {}; }

    double sigma() const { return sigma_; }
    /// Variance floor for independent, non-identically distributed noise;
    /// when set it replaces sigma in the lower-bound coefficient.
    std::optional<double> sigma_min() const { return sigma_min_; }

private:
    double sigma_;
    std::optional<double> sigma_min_;
};

class LaplaceChannel final : public NoiseChannel {
public:
    explicit LaplaceChannel(double tau);

    ChannelKind kind() const override { return ChannelKind::laplace; }
    std::string name() const override { return "laplace"; }
    double sample(double x, Rng& rng) const override;
    double log_likelihood(double y, double x) const override;
    double kl(double x, double y) const override;
    double nll_grad(double y, double x) const override;
    std::optional<double> quadratic_mu(const ModelClassParams&) const override;
    ValueInterval parameter_domain() const override { return {}; }

    double tau() const { return tau_; }

private:
    double tau_;
};

class PoissonChannel final : public NoiseChannel {
public:
    /// strict = true rejects sampling below x_min; otherwise any positive
    /// rate is accepted and x_min only drives the bound arithmetic.
    explicit PoissonChannel(double x_min, bool strict = true);

    ChannelKind kind() const override { return ChannelKind::poisson; }
    std::string name() const override { return "poisson"; }
    double sample(double x, Rng& rng) const override;
    double log_likelihood(double y, double x) const override;
    double kl(double x, double y) const override;
    double nll_grad(double y, double x) const override;
    /// Always empty: use the dedicated Poisson bound path.
    std::optional<double> quadratic_mu(const ModelClassParams&) const override;
    ValueInterval parameter_domain() const override;

    double x_min() const { return x_min_; }
    bool strict() const { return strict_; }

private:
    double x_min_;
    bool strict_;
};

class OneBitChannel final : public NoiseChannel {
public:
    OneBitChannel(std::shared_ptr<const Link> link, double domain_half_width);

    ChannelKind kind() const override { return ChannelKind::one_bit; }
    std::string name() const override { return "onebit"; }
    double sample(double x, Rng& rng) const override;
    double log_likelihood(double y, double x) const override;
    double kl(double x, double y) const override;
    double nll_grad(double y, double x) const override;
    /// 1 / c_F with the supremum interval half-width r * a_max.
    std::optional<double> quadratic_mu(const ModelClassParams& params) const override;
    ValueInterval parameter_domain() const override {
        return {-domain_half_width_, domain_half_width_};
    }

    const Link& link() const { return *link_; }
    std::shared_ptr<const Link> link_ptr() const { return link_; }
    double domain_half_width() const { return domain_half_width_; }

private:
    std::shared_ptr<const Link> link_;
    double domain_half_width_;
};

} // namespace sfmc

#endif // SFMC_CHANNELS_HPP
