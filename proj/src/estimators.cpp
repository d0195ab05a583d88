#include "sfmc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace sfmc {

void EstimatorConfig::validate(const ModelClassParams& params) const {
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (!(step_size > 0.0)) throw std::invalid_argument("step_size must be > 0");
    if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    if (k_budget < 0 || k_budget > params.k)
        throw std::invalid_argument("k_budget must lie in [0, k]");
    if (r_budget < 0 || r_budget > params.r)
        throw std::invalid_argument("r_budget must lie in [0, r]");
}

Matrix estimate_zero(const ObservationSet& obs, const ModelClassParams& params) {
    (void)obs;
    if (params.x_min) return Matrix::constant(params.n1, params.n2, *params.x_min);
    return Matrix(params.n1, params.n2);
}

Matrix estimate_plugin(const ObservationSet& obs, const ModelClassParams& params) {
    const double cap = params.x_max();
    const double floor = params.x_min ? *params.x_min : -cap;
    Matrix x = params.x_min ? Matrix::constant(params.n1, params.n2, *params.x_min)
                            : Matrix(params.n1, params.n2);
    for (std::size_t t = 0; t < obs.values.size(); ++t) {
        const auto& [i, j] = obs.mask.included[t];
        double v = obs.values[t];
        if (obs.channel_tag == ChannelKind::one_bit) v = v == 1.0 ? cap : -cap;
        x(i, j) = std::clamp(v, floor, cap);
    }
    return x;
}

namespace {

struct Workspace {
    const ObservationSet& obs;
    const ModelClassParams& params;
    const NoiseChannel& channel;
    int r;
    int k;
    bool positive; // Poisson path: nonnegative factors, offset row

    double objective(const Matrix& x) const {
        double s = 0.0;
        for (std::size_t t = 0; t < obs.values.size(); ++t) {
            const auto& [i, j] = obs.mask.included[t];
            s -= channel.log_likelihood(obs.values[t], x(i, j));
        }
        return s;
    }

    // gradient of the objective in X, zero off the mask
    Matrix gradient(const Matrix& x) const {
        Matrix g(params.n1, params.n2);
        for (std::size_t t = 0; t < obs.values.size(); ++t) {
            const auto& [i, j] = obs.mask.included[t];
            g(i, j) = channel.nll_grad(obs.values[t], x(i, j));
        }
        return g;
    }

    void project_d(Matrix& d) const {
        for (int i = 0; i < d.rows(); ++i) {
            int c = 0;
            if (positive) {
                d(i, 0) = 1.0; // offset column
                c = 1;
            }
            for (; c < d.cols(); ++c)
                d(i, c) = std::clamp(d(i, c), positive ? 0.0 : -1.0, 1.0);
        }
    }

    void project_a(Matrix& a) const {
        const int offset_rows = positive ? 1 : 0;
        const int budget = k - offset_rows * params.n2;
        // hard-threshold the free rows to the budget's largest magnitudes
        std::vector<double> mags;
        mags.reserve(a.size());
        for (int i = offset_rows; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) mags.push_back(std::abs(a(i, j)));
        if (budget < static_cast<int>(mags.size())) {
            std::nth_element(mags.begin(), mags.begin() + budget, mags.end(),
                             std::greater<double>());
            const double cut =
                budget > 0 ? mags[budget - 1] : std::numeric_limits<double>::infinity();
            // keep everything strictly above the cut, then fill the rest of
            // the budget with tied entries in row-major order
            int above = 0;
            for (int i = offset_rows; i < a.rows(); ++i)
                for (int j = 0; j < a.cols(); ++j)
                    if (std::abs(a(i, j)) > cut) ++above;
            int tied_left = budget - above;
            for (int i = offset_rows; i < a.rows(); ++i)
                for (int j = 0; j < a.cols(); ++j) {
                    const double mag = std::abs(a(i, j));
                    if (mag > cut) continue;
                    if (mag == cut && mag > 0.0 && tied_left > 0) {
                        --tied_left;
                        continue;
                    }
                    a(i, j) = 0.0;
                }
        }
        for (int i = offset_rows; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j)
                a(i, j) = std::clamp(a(i, j), positive ? 0.0 : -params.a_max, params.a_max);
        if (positive) {
            const double lo = *params.x_min;
            for (int j = 0; j < a.cols(); ++j) a(0, j) = std::clamp(a(0, j), lo, params.a_max);
        }
    }
};

struct FitResult {
    double objective = std::numeric_limits<double>::infinity();
    FactorPair factors;
    std::vector<double> trace;
};

FitResult fit_once(const Workspace& w, FactorPair start, const EstimatorConfig& cfg) {
    Matrix d = std::move(start.d);
    Matrix a = std::move(start.a);
    Matrix x = multiply(d, a);
    double obj = w.objective(x);
    if (!std::isfinite(obj))
        throw std::runtime_error("estimate_sparse_mle: non-finite initial objective");
    std::vector<double> trace{obj};

    double step_d = cfg.step_size;
    double step_a = cfg.step_size;
    constexpr int kMaxHalvings = 60;

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        const double obj_before = obj;
        bool moved = false;

        {
            const Matrix g = w.gradient(x);
            Matrix gd(w.params.n1, w.r);
            for (int i = 0; i < w.params.n1; ++i)
                for (int c = 0; c < w.r; ++c) {
                    double s = 0.0;
                    for (int j = 0; j < w.params.n2; ++j) s += g(i, j) * a(c, j);
                    gd(i, c) = s;
                }
            double eta = step_d;
            for (int h = 0; h < kMaxHalvings; ++h, eta *= 0.5) {
                Matrix d_try = d;
                for (std::size_t q = 0; q < d_try.size(); ++q)
                    d_try.data()[q] -= eta * gd.data()[q];
                w.project_d(d_try);
                Matrix x_try = multiply(d_try, a);
                const double obj_try = w.objective(x_try);
                if (!std::isfinite(obj_try))
                    throw std::runtime_error("estimate_sparse_mle: non-finite objective");
                if (obj_try < obj) {
                    d = std::move(d_try);
                    x = std::move(x_try);
                    obj = obj_try;
                    trace.push_back(obj);
                    step_d = eta * 2.0;
                    moved = true;
                    break;
                }
            }
        }

        {
            const Matrix g = w.gradient(x);
            Matrix ga(w.r, w.params.n2);
            for (int c = 0; c < w.r; ++c)
                for (int j = 0; j < w.params.n2; ++j) {
                    double s = 0.0;
                    for (int i = 0; i < w.params.n1; ++i) s += d(i, c) * g(i, j);
                    ga(c, j) = s;
                }
            double eta = step_a;
            for (int h = 0; h < kMaxHalvings; ++h, eta *= 0.5) {
                Matrix a_try = a;
                for (std::size_t q = 0; q < a_try.size(); ++q)
                    a_try.data()[q] -= eta * ga.data()[q];
                w.project_a(a_try);
                Matrix x_try = multiply(d, a_try);
                const double obj_try = w.objective(x_try);
                if (!std::isfinite(obj_try))
                    throw std::runtime_error("estimate_sparse_mle: non-finite objective");
                if (obj_try < obj) {
                    a = std::move(a_try);
                    x = std::move(x_try);
                    obj = obj_try;
                    trace.push_back(obj);
                    step_a = eta * 2.0;
                    moved = true;
                    break;
                }
            }
        }

        if (!moved) break;
        const double rel = std::abs(obj_before - obj) / std::max(1.0, std::abs(obj_before));
        if (rel < cfg.tol) break;
    }

    return FitResult{obj, FactorPair{std::move(d), std::move(a)}, std::move(trace)};
}

FactorPair initialize(const Workspace& w, InitScheme scheme, Rng& rng) {
    Matrix d(w.params.n1, w.r);
    Matrix a(w.r, w.params.n2);

    if (scheme == InitScheme::spectral_like) {
        // rough subspace from the zero-filled (bias-corrected) observations
        Matrix y(w.params.n1, w.params.n2);
        const double inv_gamma = w.obs.mask.gamma > 0.0 ? 1.0 / w.obs.mask.gamma : 1.0;
        for (std::size_t t = 0; t < w.obs.values.size(); ++t) {
            const auto& [i, j] = w.obs.mask.included[t];
            double v = w.obs.values[t];
            if (w.obs.channel_tag == ChannelKind::one_bit) v = 2.0 * v - 1.0;
            y(i, j) = v * inv_gamma;
        }
        Matrix b(w.params.n1, w.r);
        for (auto& q : b.data()) q = rng.uniform(-1.0, 1.0);
        for (int pass = 0; pass < 3; ++pass) {
            // b <- Y (Y^T b), then column-normalize
            Matrix yt_b(w.params.n2, w.r);
            for (int j = 0; j < w.params.n2; ++j)
                for (int c = 0; c < w.r; ++c) {
                    double s = 0.0;
                    for (int i = 0; i < w.params.n1; ++i) s += y(i, j) * b(i, c);
                    yt_b(j, c) = s;
                }
            Matrix b_next(w.params.n1, w.r);
            for (int i = 0; i < w.params.n1; ++i)
                for (int c = 0; c < w.r; ++c) {
                    double s = 0.0;
                    for (int j = 0; j < w.params.n2; ++j) s += y(i, j) * yt_b(j, c);
                    b_next(i, c) = s;
                }
            for (int c = 0; c < w.r; ++c) {
                double norm = 0.0;
                for (int i = 0; i < w.params.n1; ++i) norm += b_next(i, c) * b_next(i, c);
                norm = std::sqrt(norm);
                for (int i = 0; i < w.params.n1; ++i)
                    b_next(i, c) = norm > 0.0 ? b_next(i, c) / norm : rng.uniform(-1.0, 1.0);
            }
            b = std::move(b_next);
        }
        const double scale = std::max(1.0, b.max_abs());
        for (std::size_t q = 0; q < b.size(); ++q) d.data()[q] = b.data()[q] / scale;
        w.project_d(d);
        // a <- D^T y, then project into the class
        for (int c = 0; c < w.r; ++c)
            for (int j = 0; j < w.params.n2; ++j) {
                double s = 0.0;
                for (int i = 0; i < w.params.n1; ++i) s += d(i, c) * y(i, j);
                a(c, j) = s;
            }
        w.project_a(a);
        return {std::move(d), std::move(a)};
    }

    if (w.positive) {
        for (int i = 0; i < w.params.n1; ++i) {
            d(i, 0) = 1.0;
            for (int c = 1; c < w.r; ++c) d(i, c) = rng.uniform01();
        }
        for (int j = 0; j < w.params.n2; ++j)
            a(0, j) = rng.uniform(*w.params.x_min, w.params.a_max);
        const int budget = w.k - w.params.n2;
        const std::size_t free_cells = static_cast<std::size_t>(w.r - 1) * w.params.n2;
        for (int t = 0; t < budget && free_cells > 0; ++t) {
            const int cell = static_cast<int>(rng.next_u64() % free_cells);
            a(1 + cell / w.params.n2, cell % w.params.n2) = rng.uniform(0.0, w.params.a_max);
        }
    } else {
        for (auto& q : d.data()) q = rng.uniform(-1.0, 1.0);
        const std::size_t cells = a.size();
        for (int t = 0; t < w.k; ++t) {
            const int cell = static_cast<int>(rng.next_u64() % cells);
            a.data()[cell] = rng.uniform(-w.params.a_max, w.params.a_max);
        }
    }
    return {std::move(d), std::move(a)};
}

} // namespace

Matrix estimate_sparse_mle(const ObservationSet& obs, const ModelClassParams& params,
                           const NoiseChannel& channel, const EstimatorConfig& cfg,
                           Rng& rng, std::vector<double>* objective_trace) {
    if (obs.values.empty())
        throw std::invalid_argument("estimate_sparse_mle: empty observation set");
    cfg.validate(params);

    const bool positive = channel.kind() == ChannelKind::poisson;
    if (positive && !params.x_min)
        throw std::invalid_argument("poisson estimation requires x_min in the model class");

    Workspace w{obs, params, channel, cfg.effective_r(params), cfg.effective_k(params),
                positive};
    if (positive && w.k < params.n2)
        throw std::invalid_argument("poisson estimation needs k_budget >= n2 for the offsets");
    if (positive && w.r < 2)
        throw std::invalid_argument("poisson estimation needs r_budget >= 2");

    const std::uint64_t base_seed = rng.next_u64();
    FitResult best;
    for (int restart = 0; restart < cfg.restarts; ++restart) {
        Rng stream = derive_stream(base_seed, restart);
        FitResult result = fit_once(w, initialize(w, cfg.init_scheme, stream), cfg);
        if (result.objective < best.objective) best = std::move(result);
    }
    if (objective_trace) *objective_trace = best.trace;
    return product(best.factors);
}

} // namespace sfmc
