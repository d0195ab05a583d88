#include "sfmc/channels.hpp"

#include <cmath>
#include <stdexcept>

namespace sfmc {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_probability_open(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error(std::string(what) + " outside (0,1)");
}

} // namespace

std::string channel_kind_name(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::gaussian: return "gaussian";
        case ChannelKind::laplace: return "laplace";
        case ChannelKind::poisson: return "poisson";
        case ChannelKind::one_bit: return "onebit";
    }
    return "unknown";
}

// ---------------------------------------------------------------- links

LogisticLink::LogisticLink(double scale) : scale_(scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("logistic scale must be > 0");
}

double LogisticLink::cdf(double t) const { return 1.0 / (1.0 + std::exp(-t / scale_)); }

double LogisticLink::pdf(double t) const {
    const double p = cdf(t);
    return p * (1.0 - p) / scale_;
}

ProbitLink::ProbitLink(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("probit sigma must be > 0");
}

double ProbitLink::cdf(double t) const {
    return 0.5 * std::erfc(-t / (sigma_ * std::sqrt(2.0)));
}

double ProbitLink::pdf(double t) const {
    const double z = t / sigma_;
    return std::exp(-0.5 * z * z) / (sigma_ * std::sqrt(2.0 * kPi));
}

// ---------------------------------------------------------- scalar KL

double kl_gaussian(double x, double y, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("kl_gaussian: sigma must be > 0");
    const double d = x - y;
    return d * d / (2.0 * sigma * sigma);
}

double kl_laplace(double x, double y, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("kl_laplace: tau must be > 0");
    const double u = tau * std::abs(x - y);
    return u - (1.0 - std::exp(-u));
}

double kl_poisson(double x, double y) {
    if (!(x > 0.0 && y > 0.0)) throw std::domain_error("kl_poisson: rates must be > 0");
    return x * std::log(x / y) - x + y;
}

double kl_onebit(double x, double y, const Link& link) {
    const double p = link.cdf(x);
    const double q = link.cdf(y);
    require_probability_open(p, "F(x)");
    require_probability_open(q, "F(y)");
    return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

// --------------------------------------------------- link constants

namespace {

template <typename Fn>
void for_each_grid_point(double half_width, int grid_points, Fn&& fn) {
    if (!(half_width > 0.0)) throw std::invalid_argument("half_width must be > 0");
    if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
    for (int i = 0; i < grid_points; ++i) {
        const double t = -half_width +
                         (2.0 * half_width) * static_cast<double>(i) / (grid_points - 1);
        fn(t);
    }
    // endpoints once more, exactly, in case of rounding in the sweep
    fn(-half_width);
    fn(half_width);
}

} // namespace

double compute_c_f(const Link& link, double half_width, int grid_points) {
    double sup_inv = 0.0;
    double sup_f2 = 0.0;
    for_each_grid_point(half_width, grid_points, [&](double t) {
        const double F = link.cdf(t);
        if (!(F > 0.0 && F < 1.0))
            throw std::domain_error("link cdf reaches 0 or 1 on the interval");
        const double f = link.pdf(t);
        sup_inv = std::max(sup_inv, 1.0 / (F * (1.0 - F)));
        sup_f2 = std::max(sup_f2, f * f);
    });
    return std::sqrt(sup_inv) * std::sqrt(sup_f2);
}

double compute_c_f_prime(const Link& link, double half_width, int grid_points) {
    double inf_ratio = std::numeric_limits<double>::infinity();
    for_each_grid_point(half_width, grid_points, [&](double t) {
        const double F = link.cdf(t);
        if (!(F > 0.0 && F < 1.0))
            throw std::domain_error("link cdf reaches 0 or 1 on the interval");
        const double f = link.pdf(t);
        inf_ratio = std::min(inf_ratio, f * f / (F * (1.0 - F)));
    });
    return inf_ratio;
}

// ------------------------------------------------------------ Gaussian

GaussianChannel::GaussianChannel(double sigma, std::optional<double> sigma_min)
    : sigma_(sigma), sigma_min_(sigma_min) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be > 0");
    if (sigma_min && !(*sigma_min > 0.0 && *sigma_min <= sigma))
        throw std::invalid_argument("need 0 < sigma_min <= sigma");
}

double GaussianChannel::sample(double x, Rng& rng) const { return x + sigma_ * rng.normal(); }

double GaussianChannel::log_likelihood(double y, double x) const {
    const double d = y - x;
    return -0.5 * d * d / (sigma_ * sigma_) - 0.5 * std::log(2.0 * kPi * sigma_ * sigma_);
}

double GaussianChannel::kl(double x, double y) const { return kl_gaussian(x, y, sigma_); }

double GaussianChannel::nll_grad(double y, double x) const {
    return (x - y) / (sigma_ * sigma_);
}

std::optional<double> GaussianChannel::quadratic_mu(const ModelClassParams&) const {
    return sigma_min_.value_or(sigma_);
}

// ------------------------------------------------------------- Laplace

LaplaceChannel::LaplaceChannel(double tau) : tau_(tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("laplace tau must be > 0");
}

double LaplaceChannel::sample(double x, Rng& rng) const { return x + rng.laplace(tau_); }

double LaplaceChannel::log_likelihood(double y, double x) const {
    return std::log(tau_ / 2.0) - tau_ * std::abs(y - x);
}

double LaplaceChannel::kl(double x, double y) const { return kl_laplace(x, y, tau_); }

double LaplaceChannel::nll_grad(double y, double x) const {
    // subgradient of tau|y - x| in x; 0 at the tie
    if (x > y) return tau_;
    if (x < y) return -tau_;
    return 0.0;
}

std::optional<double> LaplaceChannel::quadratic_mu(const ModelClassParams&) const {
    return 1.0 / tau_;
}

// ------------------------------------------------------------- Poisson

PoissonChannel::PoissonChannel(double x_min, bool strict) : x_min_(x_min), strict_(strict) {
    if (!(x_min > 0.0)) throw std::invalid_argument("poisson x_min must be > 0");
}

double PoissonChannel::sample(double x, Rng& rng) const {
    if (!(x > 0.0) || (strict_ && x < x_min_))
        throw std::domain_error("poisson rate outside channel domain");
    return static_cast<double>(rng.poisson(x));
}

double PoissonChannel::log_likelihood(double y, double x) const {
    if (!(x > 0.0)) throw std::domain_error("poisson rate must be > 0");
    if (y < 0.0 || y != std::floor(y)) return -std::numeric_limits<double>::infinity();
    return y * std::log(x) - x - std::lgamma(y + 1.0);
}

double PoissonChannel::kl(double x, double y) const { return kl_poisson(x, y); }

double PoissonChannel::nll_grad(double y, double x) const {
    if (!(x > 0.0)) throw std::domain_error("poisson rate must be > 0");
    return 1.0 - y / x;
}

std::optional<double> PoissonChannel::quadratic_mu(const ModelClassParams&) const {
    return std::nullopt;
}

ValueInterval PoissonChannel::parameter_domain() const {
    ValueInterval dom;
    dom.lo = strict_ ? x_min_ : std::nextafter(0.0, 1.0);
    return dom;
}

// ------------------------------------------------------------- one-bit

OneBitChannel::OneBitChannel(std::shared_ptr<const Link> link, double domain_half_width)
    : link_(std::move(link)), domain_half_width_(domain_half_width) {
    if (!link_) throw std::invalid_argument("one-bit channel needs a link");
    if (!(domain_half_width > 0.0))
        throw std::invalid_argument("domain_half_width must be > 0");
    const double lo = link_->cdf(-domain_half_width);
    const double hi = link_->cdf(domain_half_width);
    if (!(lo > 0.0 && hi < 1.0))
        throw std::invalid_argument("link must keep F strictly inside (0,1) on the domain");
}

double OneBitChannel::sample(double x, Rng& rng) const {
    if (!parameter_domain().contains(x))
        throw std::domain_error("one-bit parameter outside domain");
    return rng.bernoulli(link_->cdf(x)) ? 1.0 : 0.0;
}

double OneBitChannel::log_likelihood(double y, double x) const {
    const double p = link_->cdf(x);
    require_probability_open(p, "F(x)");
    if (y == 1.0) return std::log(p);
    if (y == 0.0) return std::log(1.0 - p);
    return -std::numeric_limits<double>::infinity();
}

double OneBitChannel::kl(double x, double y) const { return kl_onebit(x, y, *link_); }

double OneBitChannel::nll_grad(double y, double x) const {
    const double p = link_->cdf(x);
    require_probability_open(p, "F(x)");
    const double f = link_->pdf(x);
    return f * (p - y) / (p * (1.0 - p));
}

std::optional<double> OneBitChannel::quadratic_mu(const ModelClassParams& params) const {
    return 1.0 / compute_c_f(*link_, params.x_max());
}

} // namespace sfmc
