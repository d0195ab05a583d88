#include "sfmc/packing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sfmc/parallel.hpp"

namespace sfmc {

namespace {

int hamming(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

int exact_min_distance(const std::vector<std::vector<std::uint8_t>>& words) {
    int best = static_cast<int>(words.empty() ? 0 : words[0].size());
    for (std::size_t i = 0; i < words.size(); ++i)
        for (std::size_t j = i + 1; j < words.size(); ++j)
            best = std::min(best, hamming(words[i], words[j]));
    return best;
}

} // namespace

std::string packing_kind_name(PackingKind kind) {
    switch (kind) {
        case PackingKind::sparse_factor: return "sparse_factor";
        case PackingKind::dictionary: return "dictionary";
        case PackingKind::poisson_sparse: return "poisson_sparse";
        case PackingKind::poisson_dictionary: return "poisson_dictionary";
    }
    return "unknown";
}

BinaryCode vg_code(int length, int target_cardinality, Rng& rng) {
    if (length < 8) throw std::invalid_argument("vg_code: length must be >= 8");
    if (target_cardinality < 2)
        throw std::invalid_argument("vg_code: target cardinality must be >= 2");

    const int distance = (length + 7) / 8; // ceil(L/8)
    // cap at the guaranteed-existence cardinality 2^floor(L/8) + 1
    int target = target_cardinality;
    const int exp = length / 8;
    if (exp < 31) {
        const long long guaranteed = (1LL << exp) + 1;
        target = static_cast<int>(std::min<long long>(target, guaranteed));
    }

    std::vector<std::vector<std::uint8_t>> kept;
    kept.emplace_back(length, std::uint8_t{0}); // zero word first

    auto admissible = [&](const std::vector<std::uint8_t>& w) {
        for (const auto& prev : kept)
            if (hamming(prev, w) < distance) return false;
        return true;
    };

    const long long attempt_budget = 2000LL * target + 10000;
    std::vector<std::uint8_t> word(length);
    for (long long attempt = 0; attempt < attempt_budget && kept.size() < static_cast<std::size_t>(target);
         ++attempt) {
        for (int i = 0; i < length; ++i) word[i] = rng.bernoulli(0.5) ? 1 : 0;
        if (admissible(word)) kept.push_back(word);
    }

    if (kept.size() < static_cast<std::size_t>(target) && length <= 24) {
        // deterministic greedy sweep over all words in numeric order
        for (std::uint64_t w = 1; w < (1ULL << length) && kept.size() < static_cast<std::size_t>(target); ++w) {
            for (int i = 0; i < length; ++i) word[i] = (w >> i) & 1u;
            if (admissible(word)) kept.push_back(word);
        }
    }

    if (kept.size() < static_cast<std::size_t>(target)) {
        std::ostringstream os;
        os << "vg_code: could not reach cardinality " << target << " (achieved "
           << kept.size() << ") at length " << length << ", distance " << distance;
        throw std::runtime_error(os.str());
    }

    BinaryCode code;
    code.length = length;
    code.codewords = std::move(kept);
    code.min_distance = exact_min_distance(code.codewords);
    return code;
}

double min_pairwise_sq_separation(const std::vector<Matrix>& elements, int threads) {
    const std::size_t count = elements.size();
    if (count < 2) throw std::invalid_argument("separation needs at least two elements");
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = i + 1; j < count; ++j) {
            left.push_back(i);
            right.push_back(j);
        }
    std::vector<double> dist(left.size());
    parallel_for(left.size(), threads, [&](std::size_t p) {
        const Matrix& a = elements[left[p]];
        const Matrix& b = elements[right[p]];
        double s = 0.0;
        for (std::size_t q = 0; q < a.size(); ++q) {
            const double d = a.data()[q] - b.data()[q];
            s += d * d;
        }
        dist[p] = s;
    });
    return *std::min_element(dist.begin(), dist.end());
}

namespace {

struct BuildContext {
    PackingKind kind;
    const ModelClassParams& params;
    double amplitude;      // value written on coded positions of the factor
    double per_bit_sq;     // squared contribution of one code bit to X
    int copies_per_bit;
    double branch_min;
    BinaryCode code;
};

/// Materializes elements via a codeword -> FactorPair map, checks class
/// membership of every element, computes the exact separation and the
/// constructive floor.
template <typename FactorFn>
PackingSet finalize(const BuildContext& ctx, FactorFn&& factors_of) {
    PackingSet ps;
    ps.kind = ctx.kind;
    ps.code = ctx.code;
    ps.amplitude = ctx.amplitude;
    ps.copies_per_bit = ctx.copies_per_bit;
    ps.branch_min = ctx.branch_min;
    ps.reference_index = 0; // zero codeword is first by construction

    for (const auto& word : ctx.code.codewords) {
        FactorPair fp = factors_of(word);
        Matrix x = product(fp);
        const MembershipReport membership = check_membership(fp, ctx.params);
        if (!membership.ok) {
            std::string msg = "packing element violates class membership:";
            for (const auto& v : membership.violations) msg += " [" + v + "]";
            throw std::runtime_error(msg);
        }
        ps.factors.push_back(std::move(fp));
        ps.elements.push_back(std::move(x));
    }

    ps.min_sq_separation = min_pairwise_sq_separation(ps.elements);
    ps.separation_floor =
        (ctx.code.length / 8.0) * ctx.copies_per_bit * ctx.per_bit_sq;
    if (ps.min_sq_separation + 1e-12 < ps.separation_floor) {
        throw std::logic_error("packing separation fell below its constructive floor");
    }
    return ps;
}

int capped_target(int length, const PackingOptions& opts) {
    const int exp = length / 8;
    if (exp >= 31) return opts.max_cardinality;
    return static_cast<int>(
        std::min<long long>((1LL << exp) + 1, opts.max_cardinality));
}

} // namespace

PackingSet build_sparse_packing(const ModelClassParams& params, std::int64_t m,
                                double mu_d, const BoundConstants& consts, Rng& rng,
                                const PackingOptions& opts) {
    params.validate();
    consts.validate();
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (!(mu_d > 0.0)) throw std::invalid_argument("mu_d must be > 0");

    const int r_used = (params.k + params.n2 - 1) / params.n2; // ceil(k/n2)
    if (r_used > params.r)
        throw std::invalid_argument("sparse packing infeasible: ceil(k/n2) > r");
    if (r_used > params.n1)
        throw std::invalid_argument("sparse packing infeasible: ceil(k/n2) > n1");
    const int copies = params.n1 / r_used;

    const double gamma = consts.gamma_d_const;
    const double a0 =
        std::min(params.a_max,
                 gamma * mu_d * std::sqrt(static_cast<double>(params.k) / m)) *
        opts.amplitude_scale;
    const double branch_min =
        std::min(params.a_max * params.a_max,
                 gamma * gamma * mu_d * mu_d * static_cast<double>(params.k) / m);

    BuildContext ctx{PackingKind::sparse_factor, params, a0, a0 * a0, copies,
                     branch_min, {}};
    ctx.code = vg_code(params.k, capped_target(params.k, opts), rng);

    // support: row-major over the first r_used rows of A
    Matrix d_block(params.n1, params.r);
    for (int i = 0; i < copies * r_used; ++i) d_block(i, i % r_used) = 1.0;

    return finalize(ctx, [&](const std::vector<std::uint8_t>& word) {
        Matrix a(params.r, params.n2);
        for (int p = 0; p < params.k; ++p)
            if (word[p]) a(p / params.n2, p % params.n2) = a0;
        return FactorPair{d_block, std::move(a)};
    });
}

PackingSet build_dictionary_packing(const ModelClassParams& params, std::int64_t m,
                                    double mu_d, const BoundConstants& consts, Rng& rng,
                                    const PackingOptions& opts) {
    params.validate();
    consts.validate();
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (!(mu_d > 0.0)) throw std::invalid_argument("mu_d must be > 0");

    const int coverage = std::min(params.k, params.n2);
    if (params.r > coverage)
        throw std::invalid_argument("dictionary packing infeasible: r > min(k, n2)");
    const int blocks = coverage / params.r;

    const double gamma = consts.gamma_d_const;
    const double delta = delta_factor(params.k, params.n2);
    const double n1r = static_cast<double>(params.n1) * params.r;
    const double d0 =
        std::min(1.0, gamma * mu_d / (params.a_max * std::sqrt(delta)) * std::sqrt(n1r / m)) *
        opts.amplitude_scale;
    const double branch_min =
        std::min(delta * params.a_max * params.a_max, gamma * gamma * mu_d * mu_d * n1r / m);

    const int code_len = params.n1 * params.r;
    BuildContext ctx{PackingKind::dictionary, params, d0, 0.0, blocks, branch_min, {}};
    ctx.per_bit_sq = params.a_max * params.a_max * d0 * d0;
    ctx.code = vg_code(code_len, capped_target(code_len, opts), rng);

    // fixed sparse factor: identity blocks scaled to a_max
    Matrix a_blocks(params.r, params.n2);
    for (int b = 0; b < blocks; ++b)
        for (int c = 0; c < params.r; ++c) a_blocks(c, b * params.r + c) = params.a_max;

    return finalize(ctx, [&](const std::vector<std::uint8_t>& word) {
        Matrix d(params.n1, params.r);
        for (int p = 0; p < code_len; ++p)
            if (word[p]) d(p / params.r, p % params.r) = d0;
        return FactorPair{std::move(d), a_blocks};
    });
}

PackingSet build_poisson_sparse_packing(const ModelClassParams& params, std::int64_t m,
                                        const BoundConstants& consts, Rng& rng,
                                        const PackingOptions& opts) {
    params.validate();
    consts.validate();
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (!params.x_min)
        throw std::invalid_argument("poisson packing requires x_min in the model class");
    if (params.k <= params.n2)
        throw std::invalid_argument(
            "poisson sparse packing infeasible: needs k > n2 (one nonzero per column plus slack)");

    const double x_min = *params.x_min;
    const int budget = params.k - params.n2;
    const int r_used = (params.k + params.n2 - 1) / params.n2 - 1; // rows carrying deviations
    if (r_used + 1 > params.r)
        throw std::invalid_argument("poisson sparse packing infeasible: ceil(k/n2) > r");
    if (r_used > params.n1)
        throw std::invalid_argument("poisson sparse packing infeasible: too few rows");
    const int copies = params.n1 / r_used;

    const double gamma = consts.gamma_d_const;
    const double a0 =
        std::min(params.a_max,
                 gamma * std::sqrt(x_min) * std::sqrt(static_cast<double>(budget) / m)) *
        opts.amplitude_scale;
    const double branch_min =
        std::min(params.a_max * params.a_max,
                 gamma * gamma * x_min * static_cast<double>(budget) / m);

    if (budget < 8)
        throw std::invalid_argument("poisson sparse packing needs k - n2 >= 8 for the code");

    BuildContext ctx{PackingKind::poisson_sparse, params, a0, a0 * a0, copies, branch_min, {}};
    ctx.code = vg_code(budget, capped_target(budget, opts), rng);

    // dictionary: all-ones offset column plus stacked identity blocks
    Matrix d_fixed(params.n1, params.r);
    for (int i = 0; i < params.n1; ++i) d_fixed(i, 0) = 1.0;
    for (int i = 0; i < copies * r_used; ++i) d_fixed(i, 1 + (i % r_used)) = 1.0;

    return finalize(ctx, [&](const std::vector<std::uint8_t>& word) {
        Matrix a(params.r, params.n2);
        for (int j = 0; j < params.n2; ++j) a(0, j) = x_min;
        // deviations: row-major over rows 1..r_used of A
        for (int p = 0; p < budget; ++p)
            if (word[p]) a(1 + p / params.n2, p % params.n2) = a0;
        return FactorPair{d_fixed, std::move(a)};
    });
}

PackingSet build_poisson_dictionary_packing(const ModelClassParams& params, std::int64_t m,
                                            const BoundConstants& consts, Rng& rng,
                                            const PackingOptions& opts) {
    params.validate();
    consts.validate();
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (!params.x_min)
        throw std::invalid_argument("poisson packing requires x_min in the model class");
    if (params.r < 2)
        throw std::invalid_argument(
            "poisson dictionary packing infeasible: needs r >= 2 (offset consumes one column)");
    if (params.k <= params.n2)
        throw std::invalid_argument("poisson dictionary packing infeasible: needs k > n2");

    const double x_min = *params.x_min;
    const int coverage = std::min(params.k - params.n2, params.n2);
    // block budget kept at coverage/r, not coverage/(r-1): the KL budget of
    // the code over n1*(r-1) positions is certified with the same margin as
    // the zero-reference dictionary packing only when r * blocks <= n2
    const int blocks = coverage / params.r;
    if (blocks < 1)
        throw std::invalid_argument(
            "poisson dictionary packing infeasible: min(k - n2, n2) < r");

    const double gamma = consts.gamma_d_const;
    const double n1r = static_cast<double>(params.n1) * params.r;
    const double d0 =
        std::min(1.0, gamma * std::sqrt(x_min) / params.a_max * std::sqrt(n1r / m)) *
        opts.amplitude_scale;
    const double branch_min =
        std::min(params.a_max * params.a_max, gamma * gamma * x_min * n1r / m);

    const int code_len = params.n1 * (params.r - 1);
    BuildContext ctx{PackingKind::poisson_dictionary, params, d0, 0.0, blocks, branch_min, {}};
    ctx.per_bit_sq = params.a_max * params.a_max * d0 * d0;
    ctx.code = vg_code(code_len, capped_target(code_len, opts), rng);

    // sparse factor: offset row plus identity blocks of size r-1 below it
    Matrix a_fixed(params.r, params.n2);
    for (int j = 0; j < params.n2; ++j) a_fixed(0, j) = x_min;
    const int side = params.r - 1;
    for (int b = 0; b < blocks; ++b)
        for (int c = 0; c < side; ++c) a_fixed(1 + c, b * side + c) = params.a_max;

    return finalize(ctx, [&](const std::vector<std::uint8_t>& word) {
        Matrix d(params.n1, params.r);
        for (int i = 0; i < params.n1; ++i) d(i, 0) = 1.0;
        for (int p = 0; p < code_len; ++p)
            if (word[p]) d(p / side, 1 + p % side) = d0;
        return FactorPair{std::move(d), a_fixed};
    });
}

TsybakovCertificate verify_tsybakov(const PackingSet& ps, const NoiseChannel& channel,
                                    const ModelClassParams& params, std::int64_t m,
                                    double alpha, int threads) {
    if (!(alpha > 0.0 && alpha < 0.125))
        throw std::invalid_argument("alpha must lie in (0, 1/8)");
    if (ps.cardinality() < 2)
        throw std::invalid_argument("degenerate packing: need at least two elements");
    if (m < 1) throw std::invalid_argument("m must be >= 1");

    TsybakovCertificate cert;
    cert.alpha = alpha;
    cert.cardinality = ps.cardinality();

    const double cells = static_cast<double>(params.n1) * params.n2;
    cert.required_separation = (cells / 32.0) * ps.branch_min;
    cert.achieved_separation = min_pairwise_sq_separation(ps.elements, threads);
    cert.separation_ok = cert.achieved_separation >= cert.required_separation;

    const Matrix& ref = ps.elements[ps.reference_index];
    std::vector<double> kl_sums(ps.elements.size(), 0.0);
    parallel_for(ps.elements.size(), threads, [&](std::size_t idx) {
        if (static_cast<int>(idx) == ps.reference_index) return;
        const Matrix& x = ps.elements[idx];
        double s = 0.0;
        for (std::size_t q = 0; q < x.size(); ++q)
            s += channel.kl(x.data()[q], ref.data()[q]);
        kl_sums[idx] = s;
    });

    double total = 0.0;
    for (double s : kl_sums) total += s;
    const double non_reference = static_cast<double>(cert.cardinality - 1);
    cert.avg_kl = (static_cast<double>(m) / cells) * total / non_reference;
    cert.budget = alpha * std::log(non_reference);
    cert.kl_budget_ok = cert.avg_kl <= cert.budget;
    return cert;
}

} // namespace sfmc
