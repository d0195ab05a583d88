#ifndef SFMC_MODEL_HPP
#define SFMC_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "sfmc/matrix.hpp"

namespace sfmc {

/// Parameters of the sparse-factor model class: n1 x n2 matrices X = D*A
/// with D (n1 x r) entrywise bounded by 1 and A (r x n2) having at most k
/// nonzeros, each bounded by a_max. For positive-rate (count) models the
/// optional x_min adds an entrywise floor on X itself.
struct ModelClassParams {
    int n1 = 0;
    int n2 = 0;
    int r = 0;
    int k = 0;
    double a_max = 0.0;
    std::optional<double> x_min;

    /// Hard entrywise cap on X implied by the factor bounds. Derived, never
    /// stored: |X_ij| <= sum over r terms of 1 * a_max.
    double x_max() const { return static_cast<double>(r) * a_max; }

    /// Throws std::invalid_argument on an inconsistent parameter set.
    void validate() const;
};

struct FactorPair {
    Matrix d; // n1 x r
    Matrix a; // r x n2
};

/// X = D*A. Throws on inner-dimension mismatch.
Matrix product(const FactorPair& fp);

/// Outcome of a class-membership check. Violations are data, not errors:
/// each entry names the violated constraint together with the offending
/// value.
struct MembershipReport {
    bool ok = true;
    std::vector<std::string> violations;
};

MembershipReport check_membership(const FactorPair& fp, const ModelClassParams& params);

/// Normalized per-element squared Frobenius error
/// ||xhat - xstar||_F^2 / (n1*n2). Symmetric; zero iff the inputs are equal.
double per_element_sq_error(const Matrix& xhat, const Matrix& xstar);

/// Monte-Carlo estimate of the per-element risk.
struct RiskEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int trials = 0;
    int failures = 0;
};

} // namespace sfmc

#endif // SFMC_MODEL_HPP
