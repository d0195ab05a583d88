#ifndef SFMC_SIM_HPP
#define SFMC_SIM_HPP

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "sfmc/channels.hpp"
#include "sfmc/model.hpp"
#include "sfmc/rng.hpp"

namespace sfmc {

/// Set of observed cells. Cells are stored in row-major order, so the mask
/// doubles as a deterministic iteration order; |included| is random with
/// expectation gamma * n1 * n2.
struct SampleMask {
    int n1 = 0;
    int n2 = 0;
    std::vector<std::pair<int, int>> included;
    double gamma = 0.0;
};

/// Bernoulli(gamma) mask with gamma = m / (n1*n2); each cell is included
/// independently. m is the nominal count, not the realized size.
SampleMask draw_mask(int n1, int n2, std::int64_t m, Rng& rng);

struct ObservationSet {
    SampleMask mask;
    std::vector<double> values; // aligned with mask.included
    ChannelKind channel_tag = ChannelKind::gaussian;
};

/// One channel draw per masked entry of xstar.
ObservationSet observe(const Matrix& xstar, const SampleMask& mask,
                       const NoiseChannel& channel, Rng& rng);

/// CSV triples "i,j,y", one observation per line.
void write_observations_csv(const ObservationSet& obs, std::ostream& out);
/// Reads triples back; channel_tag and gamma are not part of the format and
/// must be supplied by the caller.
ObservationSet read_observations_csv(std::istream& in, int n1, int n2,
                                     ChannelKind channel_tag);

using MatrixGenerator = std::function<Matrix(Rng&)>;
using Estimator = std::function<Matrix(const ObservationSet&, const ModelClassParams&, Rng&)>;

/// Mean and standard error of the per-element squared error over
/// independent (X*, S, Y) draws. Trial t runs entirely on stream
/// derive_stream(master_seed, t): generator, mask, observations, then the
/// estimator, in that order. Trials are independent and may run on several
/// threads; the reduction is by trial index, so results are bit-identical
/// for any thread count.
///
/// m may exceed n1*n2: the trial then observes the full matrix
/// floor(m/(n1*n2)) times plus a Bernoulli remainder mask, concatenated
/// into one observation set with repeated cells.
///
/// A trial whose estimator throws is recorded as failed; more than 10%
/// failures aborts with std::runtime_error.
RiskEstimate monte_carlo_risk(const MatrixGenerator& generator, const Estimator& estimator,
                              const NoiseChannel& channel, const ModelClassParams& params,
                              std::int64_t m, int trials, std::uint64_t master_seed,
                              int threads = 1);

} // namespace sfmc

#endif // SFMC_SIM_HPP
