#ifndef SFMC_PACKING_HPP
#define SFMC_PACKING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sfmc/bounds.hpp"
#include "sfmc/channels.hpp"
#include "sfmc/model.hpp"
#include "sfmc/rng.hpp"

namespace sfmc {

/// Binary code with a certified pairwise Hamming-distance floor. Always
/// contains the all-zeros word; min_distance is the exact minimum over all
/// pairs, computed exhaustively.
struct BinaryCode {
    int length = 0;
    std::vector<std::vector<std::uint8_t>> codewords;
    int min_distance = 0;

    int cardinality() const { return static_cast<int>(codewords.size()); }
};

/// Code of the given length with pairwise Hamming distance >= ceil(L/8) and
/// cardinality >= min(target_cardinality, 2^floor(L/8) + 1), containing the
/// zero word. Built by rejection sampling with a deterministic greedy
/// fallback; throws std::runtime_error (reporting the achieved cardinality)
/// if neither reaches the target. Requires length >= 8.
BinaryCode vg_code(int length, int target_cardinality, Rng& rng);

enum class PackingKind { sparse_factor, dictionary, poisson_sparse, poisson_dictionary };

std::string packing_kind_name(PackingKind kind);

/// Finite family of well-separated model-class matrices around a reference
/// element (the zero matrix, or the constant x_min matrix for the Poisson
/// variants). Factors are retained so each element can be audited as a
/// product D*A.
struct PackingSet {
    PackingKind kind = PackingKind::sparse_factor;
    std::vector<Matrix> elements;
    std::vector<FactorPair> factors;
    int reference_index = 0;
    BinaryCode code;
    /// Amplitude placed on coded positions (a0 for the sparse-side kinds,
    /// d0 for the dictionary-side kinds), after any amplitude_scale.
    double amplitude = 0.0;
    /// Each code bit appears this many times in the matrix.
    int copies_per_bit = 0;
    /// Exact minimum over pairs of ||X_i - X_j||_F^2.
    double min_sq_separation = 0.0;
    /// Constructive floor: ceil(L/8) * copies_per_bit * (per-bit sq amplitude).
    double separation_floor = 0.0;
    /// min of the two rate-branch terms for this kind, used by the
    /// (1/32) * n1 * n2 separation certificate.
    double branch_min = 0.0;

    int code_length() const { return code.length; }
    int cardinality() const { return code.cardinality(); }
};

struct PackingOptions {
    int max_cardinality = 1024;
    /// Multiplies the amplitude after the min-formula; > 1 is for stress
    /// tests that push the KL budget past its limit.
    double amplitude_scale = 1.0;
};

/// Elements X = D_I * A with coded entries {0, a0} stacked in the first
/// ceil(k/n2) rows of A and replicated down the rows of X by the block
/// identity D_I; a0 = min(a_max, gamma * mu_d * sqrt(k/m)).
PackingSet build_sparse_packing(const ModelClassParams& params, std::int64_t m,
                                double mu_d, const BoundConstants& consts, Rng& rng,
                                const PackingOptions& opts = {});

/// Elements X = D * A with D coded over all n1*r entries {0, d0} and A a
/// fixed train of a_max-scaled r x r identity blocks;
/// d0 = min(1, gamma * mu_d / (a_max * sqrt(delta)) * sqrt(n1*r/m)).
PackingSet build_dictionary_packing(const ModelClassParams& params, std::int64_t m,
                                    double mu_d, const BoundConstants& consts, Rng& rng,
                                    const PackingOptions& opts = {});

/// Positive-rate variant of the sparse packing: every element sits on the
/// reference X0 = x_min * ones, coded deviations of size a0 occupy the
/// k - n2 sparsity budget left after the offset row;
/// a0 = min(a_max, gamma * sqrt(x_min) * sqrt((k - n2)/m)). Requires k > n2.
PackingSet build_poisson_sparse_packing(const ModelClassParams& params, std::int64_t m,
                                        const BoundConstants& consts, Rng& rng,
                                        const PackingOptions& opts = {});

/// Positive-rate variant of the dictionary packing: offset as above, code
/// over the n1*(r-1) dictionary entries left after the offset column;
/// d0 = min(1, gamma * sqrt(x_min) / a_max * sqrt(n1*r/m)). Requires r >= 2
/// and min(k - n2, n2) >= r.
PackingSet build_poisson_dictionary_packing(const ModelClassParams& params, std::int64_t m,
                                            const BoundConstants& consts, Rng& rng,
                                            const PackingOptions& opts = {});

/// Numerical check of the two reduction-theorem hypotheses for a packing
/// under a channel: pairwise separation against the (1/32) * n1 * n2 *
/// branch-min floor, and the exact sampled KL budget
/// (m/(n1*n2)) * sum_ij kl(X_j, X0) averaged over non-reference elements
/// against alpha * log(M - 1).
struct TsybakovCertificate {
    bool separation_ok = false;
    double required_separation = 0.0;
    double achieved_separation = 0.0;
    bool kl_budget_ok = false;
    double avg_kl = 0.0;
    double budget = 0.0;
    double alpha = 0.0;
    int cardinality = 0;

    bool all_ok() const { return separation_ok && kl_budget_ok; }
};

TsybakovCertificate verify_tsybakov(const PackingSet& ps, const NoiseChannel& channel,
                                    const ModelClassParams& params, std::int64_t m,
                                    double alpha, int threads = 1);

/// Exact minimum pairwise squared Frobenius separation; pairs may be
/// scanned in parallel.
double min_pairwise_sq_separation(const std::vector<Matrix>& elements, int threads = 1);

} // namespace sfmc

#endif // SFMC_PACKING_HPP
