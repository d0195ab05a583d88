#include "sfmc/sim.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sfmc/parallel.hpp"

namespace sfmc {

SampleMask draw_mask(int n1, int n2, std::int64_t m, Rng& rng) {
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("mask dimensions must be >= 1");
    const std::int64_t cells = static_cast<std::int64_t>(n1) * n2;
    if (m < 1 || m > cells) throw std::invalid_argument("m must lie in [1, n1*n2]");

    SampleMask mask;
    mask.n1 = n1;
    mask.n2 = n2;
    mask.gamma = static_cast<double>(m) / static_cast<double>(cells);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            if (mask.gamma >= 1.0 || rng.bernoulli(mask.gamma)) mask.included.emplace_back(i, j);
    return mask;
}

ObservationSet observe(const Matrix& xstar, const SampleMask& mask,
                       const NoiseChannel& channel, Rng& rng) {
    if (xstar.rows() != mask.n1 || xstar.cols() != mask.n2)
        throw std::invalid_argument("observe: matrix and mask shapes disagree");
    ObservationSet obs;
    obs.mask = mask;
    obs.channel_tag = channel.kind();
    obs.values.reserve(mask.included.size());
    for (const auto& [i, j] : mask.included) obs.values.push_back(channel.sample(xstar(i, j), rng));
    return obs;
}

void write_observations_csv(const ObservationSet& obs, std::ostream& out) {
    char buf[40];
    for (std::size_t t = 0; t < obs.values.size(); ++t) {
        const auto& [i, j] = obs.mask.included[t];
        std::snprintf(buf, sizeof(buf), "%.17g", obs.values[t]);
        out << i << ',' << j << ',' << buf << '\n';
    }
}

ObservationSet read_observations_csv(std::istream& in, int n1, int n2,
                                     ChannelKind channel_tag) {
    ObservationSet obs;
    obs.mask.n1 = n1;
    obs.mask.n2 = n2;
    obs.channel_tag = channel_tag;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int i = 0;
        int j = 0;
        double y = 0.0;
        std::stringstream ss(line);
        std::string cell;
        if (!std::getline(ss, cell, ',')) throw std::runtime_error("bad observation row");
        i = std::stoi(cell);
        if (!std::getline(ss, cell, ',')) throw std::runtime_error("bad observation row");
        j = std::stoi(cell);
        if (!std::getline(ss, cell, ',')) throw std::runtime_error("bad observation row");
        y = std::stod(cell);
        if (i < 0 || i >= n1 || j < 0 || j >= n2)
            throw std::runtime_error("observation index out of range");
        obs.mask.included.emplace_back(i, j);
        obs.values.push_back(y);
    }
    obs.mask.gamma =
        static_cast<double>(obs.values.size()) / (static_cast<double>(n1) * n2);
    return obs;
}

RiskEstimate monte_carlo_risk(const MatrixGenerator& generator, const Estimator& estimator,
                              const NoiseChannel& channel, const ModelClassParams& params,
                              std::int64_t m, int trials, std::uint64_t master_seed,
                              int threads) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");

    std::vector<double> risk(trials, 0.0);
    std::vector<std::uint8_t> failed(trials, 0);

    const std::int64_t cells = static_cast<std::int64_t>(params.n1) * params.n2;
    parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
        Rng rng = derive_stream(master_seed, t);
        const Matrix xstar = generator(rng);
        // nominal counts beyond n1*n2 oversample: full observation rounds
        // plus a Bernoulli remainder, concatenated into one set (repeated
        // cells are fine for likelihood-based estimators)
        ObservationSet obs;
        if (m <= cells) {
            obs = observe(xstar, draw_mask(params.n1, params.n2, m, rng), channel, rng);
        } else {
            obs.channel_tag = channel.kind();
            obs.mask.n1 = params.n1;
            obs.mask.n2 = params.n2;
            obs.mask.gamma = static_cast<double>(m) / static_cast<double>(cells);
            std::int64_t remaining = m;
            while (remaining > 0) {
                const std::int64_t round = std::min(remaining, cells);
                remaining -= round;
                const ObservationSet part =
                    observe(xstar, draw_mask(params.n1, params.n2, round, rng), channel, rng);
                obs.mask.included.insert(obs.mask.included.end(),
                                         part.mask.included.begin(),
                                         part.mask.included.end());
                obs.values.insert(obs.values.end(), part.values.begin(), part.values.end());
            }
        }
        try {
            const Matrix xhat = estimator(obs, params, rng);
            risk[t] = per_element_sq_error(xhat, xstar);
        } catch (const std::exception&) {
            failed[t] = 1;
        }
    });

    int failures = 0;
    for (auto f : failed) failures += f;
    if (failures * 10 > trials) {
        std::ostringstream os;
        os << "monte_carlo_risk: " << failures << "/" << trials << " trials failed";
        throw std::runtime_error(os.str());
    }

    const int ok = trials - failures;
    double mean = 0.0;
    for (int t = 0; t < trials; ++t)
        if (!failed[t]) mean += risk[t];
    mean /= ok;

    double var = 0.0;
    for (int t = 0; t < trials; ++t)
        if (!failed[t]) {
            const double d = risk[t] - mean;
            var += d * d;
        }
    const double std_error = ok > 1 ? std::sqrt(var / (ok - 1)) / std::sqrt(ok) : 0.0;

    RiskEstimate est;
    est.mean = mean;
    est.std_error = std_error;
    est.trials = trials;
    est.failures = failures;
    return est;
}

} // namespace sfmc
