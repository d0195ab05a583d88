#include <doctest.h>

#include <cmath>
#include <memory>

#include "sfmc/estimators.hpp"

using namespace sfmc;

namespace {

ObservationSet make_observations(const Matrix& xstar, const ModelClassParams& params,
                                 const NoiseChannel& channel, std::int64_t m,
                                 std::uint64_t seed) {
    Rng rng(seed);
    const SampleMask mask = draw_mask(params.n1, params.n2, m, rng);
    return observe(xstar, mask, channel, rng);
}

Matrix rank_one_sparse_target(const ModelClassParams& params, Rng& rng, int support) {
    Matrix d(params.n1, 1);
    for (auto& v : d.data()) v = rng.uniform(0.3, 1.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    Matrix a(1, params.n2);
    for (int j = 0; j < support; ++j) a(0, j) = rng.uniform(0.4, params.a_max);
    Matrix dd(params.n1, params.r);
    for (int i = 0; i < params.n1; ++i) dd(i, 0) = d(i, 0);
    Matrix aa(params.r, params.n2);
    for (int j = 0; j < params.n2; ++j) aa(0, j) = a(0, j);
    return product(FactorPair{dd, aa});
}

} // namespace

TEST_CASE("estimate_zero") {
    const ModelClassParams params{6, 5, 2, 10, 1.0, std::nullopt};
    ObservationSet obs; // empty is fine
    obs.mask.n1 = 6;
    obs.mask.n2 = 5;
    const Matrix x = estimate_zero(obs, params);
    CHECK(x.frobenius_sq() == 0.0);

    const ModelClassParams poisson_params{6, 5, 2, 10, 1.0, 0.25};
    const Matrix floor = estimate_zero(obs, poisson_params);
    CHECK(floor.min_entry() == 0.25);
    CHECK(floor.max_abs() == 0.25);

    // risk against a nonzero target is exactly its scaled energy
    Matrix target(6, 5);
    target(2, 2) = 2.0;
    CHECK(per_element_sq_error(estimate_zero(obs, params), target) ==
          doctest::Approx(4.0 / 30.0));
}

TEST_CASE("estimate_plugin reproduces the target in the noiseless limit") {
    const ModelClassParams params{8, 8, 2, 16, 1.0, std::nullopt};
    const GaussianChannel channel(1e-6);
    Rng rng(3);
    const Matrix xstar = rank_one_sparse_target(params, rng, 8);
    const ObservationSet obs = make_observations(xstar, params, channel, 64, 5);
    const Matrix xhat = estimate_plugin(obs, params);
    CHECK(per_element_sq_error(xhat, xstar) < 1e-8);
}

TEST_CASE("estimate_plugin: empty mask, clipping, one-bit mapping") {
    const ModelClassParams params{4, 4, 2, 8, 1.0, std::nullopt};
    ObservationSet obs;
    obs.mask.n1 = 4;
    obs.mask.n2 = 4;
    CHECK(estimate_plugin(obs, params).frobenius_sq() == 0.0);

    obs.mask.included = {{0, 0}, {1, 1}};
    obs.values = {100.0, -3.5};
    obs.channel_tag = ChannelKind::gaussian;
    const Matrix clipped = estimate_plugin(obs, params);
    CHECK(clipped(0, 0) == params.x_max());
    CHECK(clipped(1, 1) == -params.x_max());

    obs.values = {1.0, 0.0};
    obs.channel_tag = ChannelKind::one_bit;
    const Matrix bits = estimate_plugin(obs, params);
    CHECK(bits(0, 0) == params.x_max());
    CHECK(bits(1, 1) == -params.x_max());
    CHECK(bits(2, 2) == 0.0);
}

TEST_CASE("nll gradients match central finite differences") {
    const std::vector<std::shared_ptr<const NoiseChannel>> channels = {
        std::make_shared<GaussianChannel>(0.7),
        std::make_shared<LaplaceChannel>(1.3),
        std::make_shared<PoissonChannel>(0.25),
        std::make_shared<OneBitChannel>(std::make_shared<LogisticLink>(1.0), 4.0),
        std::make_shared<OneBitChannel>(std::make_shared<ProbitLink>(1.0), 4.0),
    };
    Rng rng(17);
    const double h = 1e-5;
    for (const auto& channel : channels) {
        for (int t = 0; t < 25; ++t) {
            double x;
            double y;
            if (channel->kind() == ChannelKind::poisson) {
                x = rng.uniform(0.3, 3.0);
                y = std::floor(rng.uniform(0.0, 6.0));
            } else if (channel->kind() == ChannelKind::one_bit) {
                x = rng.uniform(-2.0, 2.0);
                y = rng.bernoulli(0.5) ? 1.0 : 0.0;
            } else {
                x = rng.uniform(-2.0, 2.0);
                do {
                    y = rng.uniform(-2.0, 2.0);
                } while (std::abs(y - x) < 0.05); // keep clear of the Laplace kink
            }
            const double fd = (-channel->log_likelihood(y, x + h) +
                               channel->log_likelihood(y, x - h)) /
                              (2.0 * h);
            const double grad = channel->nll_grad(y, x);
            const double scale = std::max(1.0, std::abs(fd));
            CHECK(std::abs(grad - fd) / scale < 1e-4);
        }
    }
}

TEST_CASE("estimate_sparse_mle recovers a rank-one target in the noiseless limit") {
    ModelClassParams params{16, 16, 1, 8, 1.0, std::nullopt};
    const GaussianChannel channel(1e-6);
    Rng data_rng(29);
    const Matrix xstar = rank_one_sparse_target(params, data_rng, 8);
    const ObservationSet obs = make_observations(xstar, params, channel, 256, 31);

    EstimatorConfig cfg;
    cfg.max_iters = 400;
    cfg.restarts = 20;
    cfg.tol = 1e-10;
    Rng rng(37);
    const Matrix xhat = estimate_sparse_mle(obs, params, channel, cfg, rng);
    CHECK(per_element_sq_error(xhat, xstar) <= 1e-3);
}

TEST_CASE("estimate_sparse_mle output passes class membership bounds") {
    ModelClassParams params{12, 10, 2, 20, 1.0, std::nullopt};
    const GaussianChannel channel(0.5);
    Rng data_rng(41);
    const Matrix xstar = rank_one_sparse_target(params, data_rng, 10);
    const ObservationSet obs = make_observations(xstar, params, channel, 60, 43);

    EstimatorConfig cfg;
    cfg.max_iters = 50;
    cfg.restarts = 2;
    Rng rng(47);
    const Matrix xhat = estimate_sparse_mle(obs, params, channel, cfg, rng);
    CHECK(xhat.max_abs() <= params.x_max() + 1e-12);
}

TEST_CASE("estimate_sparse_mle respects the poisson floor") {
    ModelClassParams params{10, 8, 2, 20, 1.0, 0.25};
    const PoissonChannel channel(0.25);

    Matrix d(10, 2);
    Matrix a(2, 8);
    for (int i = 0; i < 10; ++i) {
        d(i, 0) = 1.0;
        d(i, 1) = 0.5;
    }
    for (int j = 0; j < 8; ++j) a(0, j) = 0.5;
    a(1, 0) = 0.75;
    const Matrix xstar = product(FactorPair{d, a});
    const ObservationSet obs = make_observations(xstar, params, channel, 60, 51);

    EstimatorConfig cfg;
    cfg.max_iters = 60;
    cfg.restarts = 3;
    Rng rng(53);
    const Matrix xhat = estimate_sparse_mle(obs, params, channel, cfg, rng);
    CHECK(xhat.min_entry() >= *params.x_min - 1e-12);
    CHECK(xhat.max_abs() <= params.x_max() + 1e-12);
}

TEST_CASE("estimate_sparse_mle objective sequence is non-increasing") {
    ModelClassParams params{12, 12, 2, 24, 1.0, std::nullopt};
    const GaussianChannel channel(0.5);
    Rng data_rng(87);
    const Matrix xstar = rank_one_sparse_target(params, data_rng, 10);
    const ObservationSet obs = make_observations(xstar, params, channel, 72, 89);

    EstimatorConfig cfg;
    cfg.max_iters = 80;
    cfg.restarts = 2;
    Rng rng(91);
    std::vector<double> trace;
    estimate_sparse_mle(obs, params, channel, cfg, rng, &trace);
    REQUIRE(trace.size() > 1);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] < trace[i - 1]);
}

TEST_CASE("estimate_sparse_mle is seed-deterministic") {
    ModelClassParams params{10, 10, 2, 16, 1.0, std::nullopt};
    const GaussianChannel channel(0.5);
    Rng data_rng(59);
    const Matrix xstar = rank_one_sparse_target(params, data_rng, 8);
    const ObservationSet obs = make_observations(xstar, params, channel, 50, 61);

    EstimatorConfig cfg;
    cfg.max_iters = 40;
    cfg.restarts = 3;
    Rng a(67);
    Rng b(67);
    CHECK(estimate_sparse_mle(obs, params, channel, cfg, a) ==
          estimate_sparse_mle(obs, params, channel, cfg, b));
}

TEST_CASE("spectral_like initialization also converges") {
    ModelClassParams params{12, 12, 1, 6, 1.0, std::nullopt};
    const GaussianChannel channel(0.05);
    Rng data_rng(71);
    const Matrix xstar = rank_one_sparse_target(params, data_rng, 6);
    const ObservationSet obs = make_observations(xstar, params, channel, 144, 73);

    EstimatorConfig cfg;
    cfg.init_scheme = InitScheme::spectral_like;
    cfg.max_iters = 300;
    cfg.restarts = 8;
    Rng rng(79);
    const Matrix xhat = estimate_sparse_mle(obs, params, channel, cfg, rng);
    CHECK(per_element_sq_error(xhat, xstar) < 0.05);
}

TEST_CASE("empirical risk ordering on the gaussian smoke benchmark") {
    // mle <= plugin <= zero in mean risk; the target draws put +/-a_max on
    // the support so the signal energy dominates the noise floor
    const ModelClassParams params{32, 32, 2, 64, 1.0, std::nullopt};
    const auto channel = std::make_shared<GaussianChannel>(0.5);
    MatrixGenerator generator = [params](Rng& rng) {
        Matrix d(params.n1, params.r);
        Matrix a(params.r, params.n2);
        for (auto& v : d.data()) v = rng.uniform(-1.0, 1.0);
        for (int t = 0; t < params.k; ++t)
            a.data()[rng.next_u64() % a.size()] =
                rng.bernoulli(0.5) ? params.a_max : -params.a_max;
        return product(FactorPair{d, a});
    };
    EstimatorConfig cfg;
    cfg.max_iters = 150;
    cfg.restarts = 3;
    cfg.step_size = 0.5;
    Estimator mle = [&](const ObservationSet& obs, const ModelClassParams& p, Rng& rng) {
        return estimate_sparse_mle(obs, p, *channel, cfg, rng);
    };
    Estimator plugin = [](const ObservationSet& obs, const ModelClassParams& p, Rng&) {
        return estimate_plugin(obs, p);
    };
    Estimator zero = [](const ObservationSet& obs, const ModelClassParams& p, Rng&) {
        return estimate_zero(obs, p);
    };
    const std::int64_t m = 512; // half the cells
    const int trials = 50;
    const double risk_mle =
        monte_carlo_risk(generator, mle, *channel, params, m, trials, 83, 8).mean;
    const double risk_plugin =
        monte_carlo_risk(generator, plugin, *channel, params, m, trials, 83, 8).mean;
    const double risk_zero =
        monte_carlo_risk(generator, zero, *channel, params, m, trials, 83, 8).mean;
    CHECK(risk_mle <= risk_plugin);
    CHECK(risk_plugin <= risk_zero);
}

TEST_CASE("estimator config validation") {
    const ModelClassParams params{10, 10, 2, 16, 1.0, std::nullopt};
    EstimatorConfig cfg;
    cfg.k_budget = 17;
    CHECK_THROWS_AS(cfg.validate(params), std::invalid_argument);
    cfg.k_budget = 0;
    cfg.r_budget = 3;
    CHECK_THROWS_AS(cfg.validate(params), std::invalid_argument);
    cfg.r_budget = 0;
    cfg.tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(params), std::invalid_argument);
}

TEST_CASE("estimate_sparse_mle rejects an empty observation set") {
    const ModelClassParams params{10, 10, 2, 16, 1.0, std::nullopt};
    const GaussianChannel channel(1.0);
    ObservationSet obs;
    obs.mask.n1 = 10;
    obs.mask.n2 = 10;
    Rng rng(3);
    CHECK_THROWS_AS(estimate_sparse_mle(obs, params, channel, EstimatorConfig{}, rng),
                    std::invalid_argument);
}
