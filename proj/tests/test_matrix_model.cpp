#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sfmc/model.hpp"
#include "sfmc/rng.hpp"

#include "oracles.hpp"

using namespace sfmc;

TEST_CASE("product: identity left factor") {
    FactorPair fp{Matrix::identity(2), Matrix(2, 2, {1, 0, 0, 2})};
    const Matrix x = product(fp);
    CHECK(x == Matrix(2, 2, {1, 0, 0, 2}));
}

TEST_CASE("product: zero left factor annihilates") {
    FactorPair fp{Matrix(3, 2), Matrix(2, 4, {1, 2, 3, 4, 5, 6, 7, 8})};
    const Matrix x = product(fp);
    CHECK(x.frobenius_sq() == 0.0);
    CHECK(x.rows() == 3);
    CHECK(x.cols() == 4);
}

TEST_CASE("product agrees with the naive triple-loop oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n1 = 1 + static_cast<int>(rng.next_u64() % 8);
        const int r = 1 + static_cast<int>(rng.next_u64() % 8);
        const int n2 = 1 + static_cast<int>(rng.next_u64() % 8);
        Matrix d(n1, r);
        Matrix a(r, n2);
        for (auto& v : d.data()) v = std::floor(rng.uniform(-5.0, 6.0));
        for (auto& v : a.data()) v = std::floor(rng.uniform(-5.0, 6.0));
        const Matrix got = product(FactorPair{d, a});
        const Matrix want = oracle::multiply_naive(d, a);
        REQUIRE(got == want);
    }
}

TEST_CASE("product rejects mismatched inner dimensions") {
    CHECK_THROWS_AS(multiply(Matrix(2, 3), Matrix(2, 2)), std::invalid_argument);
}

TEST_CASE("matrix constructors validate") {
    CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(Matrix(1, 2, {1.0, std::nan("")}), std::invalid_argument);
    CHECK_THROWS_AS(Matrix(0, 2), std::invalid_argument);
}

TEST_CASE("csv round trip is exact") {
    Rng rng(3);
    Matrix m(4, 3);
    for (auto& v : m.data()) v = rng.uniform(-1.0, 1.0);
    m(0, 0) = 0.1; // not exactly representable; exercises full precision
    std::stringstream ss;
    write_csv(m, ss);
    CHECK(read_csv(ss) == m);
}

TEST_CASE("per_element_sq_error basics") {
    const Matrix a(2, 2, {1, 1, 1, 1});
    const Matrix b(2, 2);
    CHECK(per_element_sq_error(a, a) == 0.0);
    CHECK(per_element_sq_error(a, b) == doctest::Approx(1.0));
    CHECK(per_element_sq_error(Matrix(1, 1, {3}), Matrix(1, 1, {1})) == doctest::Approx(4.0));
    CHECK_THROWS_AS(per_element_sq_error(a, Matrix(2, 3)), std::invalid_argument);
}

TEST_CASE("per_element_sq_error symmetry and scaling law") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix x(3, 4);
        Matrix y(3, 4);
        for (auto& v : x.data()) v = rng.uniform(-2.0, 2.0);
        for (auto& v : y.data()) v = rng.uniform(-2.0, 2.0);
        const double e = per_element_sq_error(x, y);
        CHECK(per_element_sq_error(y, x) == e);
        const double c = rng.uniform(-3.0, 3.0);
        Matrix cx = x;
        Matrix cy = y;
        for (auto& v : cx.data()) v *= c;
        for (auto& v : cy.data()) v *= c;
        CHECK(per_element_sq_error(cx, cy) == doctest::Approx(c * c * e).epsilon(1e-12));
    }
}

TEST_CASE("check_membership reports violations with values") {
    ModelClassParams params{4, 4, 2, 3, 1.0, std::nullopt};
    params.validate();

    SUBCASE("d out of bounds") {
        Matrix d(4, 2);
        d(1, 1) = 1.5;
        const auto report = check_membership({d, Matrix(2, 4)}, params);
        CHECK_FALSE(report.ok);
        REQUIRE(report.violations.size() == 1);
        CHECK(report.violations[0].find("||D||_inf") != std::string::npos);
        CHECK(report.violations[0].find("1.5") != std::string::npos);
    }
    SUBCASE("too many nonzeros in a") {
        Matrix a(2, 4);
        a(0, 0) = a(0, 1) = a(0, 2) = a(1, 3) = 0.5;
        const auto report = check_membership({Matrix(4, 2), a}, params);
        CHECK_FALSE(report.ok);
        REQUIRE(report.violations.size() == 1);
        CHECK(report.violations[0].find("||A||_0") != std::string::npos);
    }
    SUBCASE("all constraints satisfied") {
        Matrix d = Matrix::constant(4, 2, 0.5);
        Matrix a(2, 4);
        a(0, 0) = 1.0;
        a(1, 2) = -1.0;
        CHECK(check_membership({d, a}, params).ok);
    }
}

TEST_CASE("membership implies the derived entry cap on the product") {
    Rng rng(23);
    ModelClassParams params{5, 6, 3, 10, 2.0, std::nullopt};
    for (int trial = 0; trial < 40; ++trial) {
        Matrix d(5, 3);
        Matrix a(3, 6);
        for (auto& v : d.data()) v = rng.uniform(-1.0, 1.0);
        for (int t = 0; t < params.k; ++t)
            a.data()[rng.next_u64() % a.size()] = rng.uniform(-params.a_max, params.a_max);
        const FactorPair fp{d, a};
        REQUIRE(check_membership(fp, params).ok);
        CHECK(product(fp).max_abs() <= params.x_max() + 1e-12);
    }
}

TEST_CASE("poisson class checks the entrywise floor") {
    ModelClassParams params{3, 3, 2, 6, 1.0, 0.5};
    Matrix d(3, 2);
    for (int i = 0; i < 3; ++i) d(i, 0) = 1.0;
    Matrix a(2, 3);
    for (int j = 0; j < 3; ++j) a(0, j) = 0.5;
    CHECK(check_membership({d, a}, params).ok);
    a(0, 1) = 0.25; // product dips below the floor in column 1
    const auto report = check_membership({d, a}, params);
    CHECK_FALSE(report.ok);
    CHECK(report.violations[0].find("x_min") != std::string::npos);
}

TEST_CASE("model params validation") {
    CHECK_THROWS_AS((ModelClassParams{4, 4, 5, 4, 1.0, std::nullopt}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS((ModelClassParams{4, 4, 2, 9, 1.0, std::nullopt}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS((ModelClassParams{4, 4, 2, 8, 1.0, 1.5}.validate()),
                    std::invalid_argument);
    ModelClassParams ok{4, 4, 2, 8, 1.5, 1.0};
    ok.validate();
    CHECK(ok.x_max() == doctest::Approx(3.0));
}
