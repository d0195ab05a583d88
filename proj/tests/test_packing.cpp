#include <doctest.h>

#include <cmath>
#include <memory>

#include "sfmc/packing.hpp"

#include "oracles.hpp"

using namespace sfmc;

namespace {

int hamming_distance(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

int exhaustive_min_distance(const BinaryCode& code) {
    int best = code.length;
    for (std::size_t i = 0; i < code.codewords.size(); ++i)
        for (std::size_t j = i + 1; j < code.codewords.size(); ++j)
            best = std::min(best, hamming_distance(code.codewords[i], code.codewords[j]));
    return best;
}

void check_packing_invariants(const PackingSet& ps, const ModelClassParams& params) {
    // membership of every element and reconstruction from the audit factors
    for (std::size_t i = 0; i < ps.elements.size(); ++i) {
        CHECK(check_membership(ps.factors[i], params).ok);
        CHECK(product(ps.factors[i]) == ps.elements[i]);
    }
    // exact separation matches the brute-force oracle and the constructive floor
    const double brute = oracle::min_pairwise_sq_frobenius(ps.elements);
    CHECK(ps.min_sq_separation == doctest::Approx(brute).epsilon(1e-13));
    CHECK(ps.min_sq_separation >= ps.separation_floor - 1e-12);
    // the (1/32) branch-min certificate floor
    const double cells = static_cast<double>(params.n1) * params.n2;
    CHECK(ps.min_sq_separation / cells >= ps.branch_min / 32.0 - 1e-15);
    // exhaustive code distance
    CHECK(exhaustive_min_distance(ps.code) == ps.code.min_distance);
    CHECK(ps.code.min_distance >= (ps.code.length + 7) / 8);
}

} // namespace

TEST_CASE("vg_code minimal case") {
    Rng rng(1);
    const BinaryCode code = vg_code(8, 2, rng);
    CHECK(code.cardinality() >= 2);
    CHECK(code.codewords[0] == std::vector<std::uint8_t>(8, 0));
    CHECK(code.min_distance >= 1);
}

TEST_CASE("vg_code at length 64 reaches cardinality 257 with distance 8") {
    Rng rng(2);
    const BinaryCode code = vg_code(64, 257, rng);
    CHECK(code.cardinality() == 257);
    CHECK(exhaustive_min_distance(code) >= 8);
}

TEST_CASE("vg_code is deterministic for a fixed seed") {
    Rng a(33);
    Rng b(33);
    const BinaryCode ca = vg_code(32, 17, a);
    const BinaryCode cb = vg_code(32, 17, b);
    CHECK(ca.codewords == cb.codewords);
}

TEST_CASE("vg_code rejects short lengths and caps the target") {
    Rng rng(3);
    CHECK_THROWS_AS(vg_code(7, 2, rng), std::invalid_argument);
    const BinaryCode code = vg_code(8, 1000, rng);
    CHECK(code.cardinality() == 3); // 2^1 + 1
}

TEST_CASE("sparse packing: repeated-row structure when k = n2") {
    // one coded row of A, replicated down all n1 rows of X
    ModelClassParams params{8, 8, 2, 8, 1.0, std::nullopt};
    BoundConstants consts;
    Rng rng(7);
    const PackingSet ps = build_sparse_packing(params, 32, 1.0, consts, rng);
    check_packing_invariants(ps, params);
    CHECK(ps.kind == PackingKind::sparse_factor);
    CHECK(ps.copies_per_bit == 8);
    for (const auto& element : ps.elements) {
        for (int i = 1; i < element.rows(); ++i)
            for (int j = 0; j < element.cols(); ++j)
                CHECK(element(i, j) == element(0, j));
    }
}

TEST_CASE("sparse packing separation matches the brute-force oracle") {
    ModelClassParams params{8, 4, 2, 8, 1.0, std::nullopt};
    BoundConstants consts;
    Rng rng(11);
    const PackingSet ps = build_sparse_packing(params, 16, 1.0, consts, rng);
    check_packing_invariants(ps, params);
    CHECK(ps.copies_per_bit == 4); // r' = 2, floor(8/2)
}

TEST_CASE("sparse packing rejects infeasible geometry") {
    ModelClassParams params{8, 4, 1, 8, 1.0, std::nullopt}; // ceil(k/n2) = 2 > r
    BoundConstants consts;
    Rng rng(5);
    CHECK_THROWS_AS(build_sparse_packing(params, 16, 1.0, consts, rng),
                    std::invalid_argument);
}

TEST_CASE("dictionary packing: block budget and oracle separation") {
    ModelClassParams params{6, 4, 2, 4, 1.0, std::nullopt};
    BoundConstants consts;
    Rng rng(13);
    const PackingSet ps = build_dictionary_packing(params, 24, 1.0, consts, rng);
    check_packing_invariants(ps, params);
    CHECK(ps.kind == PackingKind::dictionary);
    // each A has r * floor(min(k, n2)/r) = 4 nonzeros, within the k budget
    for (const auto& fp : ps.factors) {
        CHECK(fp.a.nnz() == 4);
        CHECK(fp.a.max_abs() == params.a_max);
    }
}

TEST_CASE("dictionary packing respects the sparsity budget when k >= n2") {
    ModelClassParams params{6, 4, 2, 8, 1.0, std::nullopt};
    BoundConstants consts;
    Rng rng(17);
    const PackingSet ps = build_dictionary_packing(params, 24, 1.0, consts, rng);
    check_packing_invariants(ps, params);
    for (const auto& fp : ps.factors) CHECK(fp.a.nnz() == params.n2);
}

TEST_CASE("poisson sparse packing: floor, separation, reference distances") {
    ModelClassParams params{8, 4, 3, 12, 1.0, 0.3}; // k = n2 + 8
    BoundConstants consts;
    Rng rng(19);
    const PackingSet ps = build_poisson_sparse_packing(params, 32, consts, rng);
    check_packing_invariants(ps, params);
    CHECK(ps.kind == PackingKind::poisson_sparse);
    CHECK(ps.copies_per_bit == 4); // r' = 2

    for (const auto& element : ps.elements) {
        CHECK(element.min_entry() >= *params.x_min);
        CHECK(element.max_abs() <= *params.x_min + ps.amplitude + 1e-15);
    }
    // reference is the constant x_min matrix; distances count coded bits
    const Matrix& ref = ps.elements[ps.reference_index];
    CHECK(ref.min_entry() == *params.x_min);
    CHECK(ref.max_abs() == *params.x_min);
    for (std::size_t i = 0; i < ps.elements.size(); ++i) {
        int weight = 0;
        for (auto bit : ps.code.codewords[i]) weight += bit;
        double d = 0.0;
        for (std::size_t q = 0; q < ref.size(); ++q) {
            const double diff = ps.elements[i].data()[q] - ref.data()[q];
            d += diff * diff;
        }
        CHECK(d == doctest::Approx(weight * ps.copies_per_bit * ps.amplitude *
                                   ps.amplitude).epsilon(1e-12));
    }
}

TEST_CASE("poisson packings reject k <= n2") {
    ModelClassParams params{8, 4, 3, 4, 1.0, 0.3};
    BoundConstants consts;
    Rng rng(23);
    CHECK_THROWS_AS(build_poisson_sparse_packing(params, 16, consts, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_poisson_dictionary_packing(params, 16, consts, rng),
                    std::invalid_argument);
}

TEST_CASE("poisson dictionary packing at desk scale") {
    ModelClassParams params{16, 8, 2, 16, 1.0, 0.25};
    BoundConstants consts;
    Rng rng(29);
    const PackingSet ps = build_poisson_dictionary_packing(params, 256, consts, rng);
    check_packing_invariants(ps, params);
    CHECK(ps.kind == PackingKind::poisson_dictionary);
    for (const auto& element : ps.elements) CHECK(element.min_entry() >= *params.x_min);
}

TEST_CASE("certificates hold with default constants for matched channels") {
    ModelClassParams params{16, 8, 2, 16, 1.0, std::nullopt};
    ModelClassParams poisson_params{16, 8, 2, 16, 1.0, 0.25};
    BoundConstants consts;
    const std::int64_t m = 256;

    std::vector<std::shared_ptr<const NoiseChannel>> channels = {
        std::make_shared<GaussianChannel>(1.0),
        std::make_shared<LaplaceChannel>(1.0),
        std::make_shared<OneBitChannel>(std::make_shared<LogisticLink>(1.0), params.x_max()),
    };
    int stream = 0;
    for (const auto& channel : channels) {
        const double mu = channel->quadratic_mu(params).value();
        Rng rng_a = derive_stream(99, stream++);
        Rng rng_b = derive_stream(99, stream++);
        const PackingSet sparse = build_sparse_packing(params, m, mu, consts, rng_a);
        const PackingSet dict = build_dictionary_packing(params, m, mu, consts, rng_b);
        for (const PackingSet* ps : {&sparse, &dict}) {
            const TsybakovCertificate cert =
                verify_tsybakov(*ps, *channel, params, m, consts.alpha);
            CHECK(cert.separation_ok);
            CHECK(cert.kl_budget_ok);
            CHECK(cert.cardinality == ps->cardinality());
            CHECK(cert.avg_kl <= cert.budget);
        }
    }

    const PoissonChannel poisson(0.25);
    Rng rng_a = derive_stream(99, stream++);
    Rng rng_b = derive_stream(99, stream++);
    const PackingSet psparse =
        build_poisson_sparse_packing(poisson_params, m, consts, rng_a);
    const PackingSet pdict =
        build_poisson_dictionary_packing(poisson_params, m, consts, rng_b);
    for (const PackingSet* ps : {&psparse, &pdict}) {
        const TsybakovCertificate cert =
            verify_tsybakov(*ps, poisson, poisson_params, m, consts.alpha);
        CHECK(cert.separation_ok);
        CHECK(cert.kl_budget_ok);
    }
}

TEST_CASE("inflating the amplitude tenfold breaks the KL budget") {
    ModelClassParams params{16, 8, 2, 16, 1.0, std::nullopt};
    BoundConstants consts;
    const GaussianChannel channel(1.0);
    PackingOptions opts;
    opts.amplitude_scale = 10.0;
    Rng rng(31);
    const PackingSet ps = build_sparse_packing(params, 256, 1.0, consts, rng, opts);
    const TsybakovCertificate cert = verify_tsybakov(ps, channel, params, 256, consts.alpha);
    CHECK_FALSE(cert.kl_budget_ok);
}

TEST_CASE("verify_tsybakov rejects degenerate packings and bad alpha") {
    ModelClassParams params{16, 8, 2, 16, 1.0, std::nullopt};
    BoundConstants consts;
    const GaussianChannel channel(1.0);
    Rng rng(37);
    PackingSet ps = build_sparse_packing(params, 256, 1.0, consts, rng);

    PackingSet lone = ps;
    lone.elements.resize(1);
    lone.factors.resize(1);
    lone.code.codewords.resize(1);
    CHECK_THROWS_AS(verify_tsybakov(lone, channel, params, 256, consts.alpha),
                    std::invalid_argument);
    CHECK_THROWS_AS(verify_tsybakov(ps, channel, params, 256, 0.5), std::invalid_argument);
}

TEST_CASE("verify_tsybakov flags a domain violation for mismatched channels") {
    // zero-reference packing contains entries at 0, outside the Poisson domain
    ModelClassParams params{16, 8, 2, 16, 1.0, std::nullopt};
    BoundConstants consts;
    const PoissonChannel poisson(0.25);
    Rng rng(41);
    const PackingSet ps = build_sparse_packing(params, 256, 1.0, consts, rng);
    CHECK_THROWS_AS(verify_tsybakov(ps, poisson, params, 256, consts.alpha),
                    std::domain_error);
}

TEST_CASE("parallel separation scan agrees with the serial one") {
    ModelClassParams params{16, 8, 2, 16, 1.0, std::nullopt};
    BoundConstants consts;
    Rng rng(43);
    const PackingSet ps = build_dictionary_packing(params, 256, 1.0, consts, rng);
    CHECK(min_pairwise_sq_separation(ps.elements, 1) ==
          min_pairwise_sq_separation(ps.elements, 8));
}
