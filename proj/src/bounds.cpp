#include "sfmc/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace sfmc {

double BoundConstants::default_gamma(double alpha) {
    return 0.9 * gamma_feasible_limit(alpha);
}

double BoundConstants::gamma_feasible_limit(double alpha) {
    return std::sqrt(alpha * std::log(2.0)) / 2.0;
}

void BoundConstants::validate() const {
    if (!(alpha > 0.0 && alpha < 0.125))
        throw std::invalid_argument("alpha must lie in (0, 1/8)");
    if (!(c_d > 0.0)) throw std::invalid_argument("c_d must be > 0");
    if (!(gamma_d_const > 0.0)) throw std::invalid_argument("gamma_d_const must be > 0");
}

std::string regime_name(Regime regime) {
    return regime == Regime::boundedness ? "boundedness" : "parametric";
}

double delta_factor(int k, int n2) {
    if (k < 1 || n2 < 1) throw std::invalid_argument("delta_factor: k, n2 must be >= 1");
    return std::min(1.0, static_cast<double>(k) / static_cast<double>(n2));
}

namespace {

// nominal counts beyond n1*n2 are allowed (oversampled observation sets)
void require_m_in_range(const ModelClassParams&, std::int64_t m) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
}

BoundReport assemble(double boundedness, double parametric, double delta, double c_d) {
    BoundReport report;
    report.boundedness_term = boundedness;
    report.parametric_term = parametric;
    report.delta = delta;
    // ties resolve to the parametric regime
    report.active_regime =
        parametric <= boundedness ? Regime::parametric : Regime::boundedness;
    report.value = c_d * std::min(boundedness, parametric);
    return report;
}

} // namespace

BoundReport general_lower_bound(const ModelClassParams& params, double mu_d,
                                std::int64_t m, const BoundConstants& consts) {
    params.validate();
    consts.validate();
    require_m_in_range(params, m);
    if (!(mu_d > 0.0)) throw std::invalid_argument("mu_d must be > 0");

    const double delta = delta_factor(params.k, params.n2);
    const double boundedness = params.a_max * params.a_max * (delta + 1.0);
    const double dof = static_cast<double>(params.n1) * params.r + params.k;
    const double gamma = consts.gamma_d_const;
    const double parametric = gamma * gamma * mu_d * mu_d * dof / static_cast<double>(m);
    return assemble(boundedness, parametric, delta, consts.c_d);
}

double large_sample_rate(const ModelClassParams& params, double mu_d, std::int64_t m) {
    params.validate();
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (!(mu_d > 0.0)) throw std::invalid_argument("mu_d must be > 0");
    const double lead = std::min(mu_d, params.a_max);
    const double delta = delta_factor(params.k, params.n2);
    const double dof = static_cast<double>(params.n1) * params.r * delta + params.k;
    return lead * lead * dof / static_cast<double>(m);
}

double small_sample_rate(const ModelClassParams& params) {
    params.validate();
    return delta_factor(params.k, params.n2) * params.a_max * params.a_max;
}

BoundReport corollary_bound(const NoiseChannel& channel, const ModelClassParams& params,
                            std::int64_t m, const BoundConstants& consts) {
    if (channel.kind() == ChannelKind::poisson) {
        params.validate();
        consts.validate();
        require_m_in_range(params, m);
        if (!params.x_min)
            throw std::invalid_argument("poisson bound requires x_min in the model class");
        if (params.k < params.n2)
            throw std::invalid_argument(
                "poisson class infeasible: every column of A needs a nonzero (k >= n2)");
        const double boundedness = params.a_max * params.a_max;
        const double dof =
            static_cast<double>(params.n1) * params.r + params.k - params.n2;
        const double gamma = consts.gamma_d_const;
        const double parametric =
            gamma * gamma * (*params.x_min) * dof / static_cast<double>(m);
        BoundReport report =
            assemble(boundedness, parametric, delta_factor(params.k, params.n2), consts.c_d);
        report.channel_tag = ChannelKind::poisson;
        return report;
    }

    const auto mu = channel.quadratic_mu(params);
    if (!mu) throw std::logic_error("channel provides no quadratic-KL coefficient");
    BoundReport report = general_lower_bound(params, *mu, m, consts);
    report.channel_tag = channel.kind();
    return report;
}

double upper_bound_rate(const NoiseChannel& channel, const ModelClassParams& params,
                        std::int64_t m) {
    params.validate();
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    const double dof_ratio =
        (static_cast<double>(params.n1) * params.r + params.k) / static_cast<double>(m);
    const double log_dim = std::log(static_cast<double>(std::max(params.n1, params.n2)));
    const double x_max = params.x_max();

    switch (channel.kind()) {
        case ChannelKind::gaussian: {
            const auto& g = static_cast<const GaussianChannel&>(channel);
            const double lead = std::min(g.sigma(), params.a_max);
            return lead * lead * dof_ratio * log_dim;
        }
        case ChannelKind::laplace: {
            // penalized-ML rate reconstructed from the published optimality
            // gap tau * x_max * log(n1 v n2) over the parametric lower rate
            const auto& l = static_cast<const LaplaceChannel&>(channel);
            return (x_max / l.tau()) * dof_ratio * log_dim;
        }
        case ChannelKind::poisson: {
            const auto& p = static_cast<const PoissonChannel&>(channel);
            const double lead = x_max + (x_max / p.x_min()) * x_max * x_max;
            return lead * dof_ratio * log_dim;
        }
        case ChannelKind::one_bit: {
            const auto& o = static_cast<const OneBitChannel&>(channel);
            const double c_f = compute_c_f(o.link(), x_max);
            const double c_f_prime = compute_c_f_prime(o.link(), x_max);
            const double lead = (c_f * c_f / c_f_prime) * (1.0 / (c_f * c_f) + x_max * x_max);
            return lead * dof_ratio * log_dim;
        }
    }
    throw std::logic_error("unknown channel kind");
}

} // namespace sfmc
