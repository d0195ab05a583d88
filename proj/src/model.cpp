#include "sfmc/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sfmc {

void ModelClassParams::validate() const {
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("n1, n2 must be >= 1");
    if (r < 1 || r > std::min(n1, n2))
        throw std::invalid_argument("need 1 <= r <= min(n1, n2)");
    if (k < 1 || static_cast<long long>(k) > static_cast<long long>(r) * n2)
        throw std::invalid_argument("need 1 <= k <= r*n2");
    if (!(a_max > 0.0)) throw std::invalid_argument("a_max must be > 0");
    if (x_min && !(*x_min > 0.0 && *x_min <= a_max))
        throw std::invalid_argument("need 0 < x_min <= a_max");
}

Matrix product(const FactorPair& fp) { return multiply(fp.d, fp.a); }

MembershipReport check_membership(const FactorPair& fp, const ModelClassParams& params) {
    MembershipReport report;
    auto fail = [&report](const std::string& msg) {
        report.ok = false;
        report.violations.push_back(msg);
    };

    if (fp.d.rows() != params.n1 || fp.d.cols() != params.r)
        fail("D shape != n1 x r");
    if (fp.a.rows() != params.r || fp.a.cols() != params.n2)
        fail("A shape != r x n2");
    if (!report.ok) return report;

    const double d_inf = fp.d.max_abs();
    if (d_inf > 1.0) {
        std::ostringstream os;
        os << "||D||_inf <= 1 violated: " << d_inf;
        fail(os.str());
    }
    const double a_inf = fp.a.max_abs();
    if (a_inf > params.a_max) {
        std::ostringstream os;
        os << "||A||_inf <= a_max violated: " << a_inf << " > " << params.a_max;
        fail(os.str());
    }
    const std::size_t a_nnz = fp.a.nnz();
    if (a_nnz > static_cast<std::size_t>(params.k)) {
        std::ostringstream os;
        os << "||A||_0 <= k violated: " << a_nnz << " > " << params.k;
        fail(os.str());
    }
    if (params.x_min) {
        const double lo = product(fp).min_entry();
        if (lo < *params.x_min) {
            std::ostringstream os;
            os << "min entry of D*A >= x_min violated: " << lo << " < " << *params.x_min;
            fail(os.str());
        }
    }
    return report;
}

double per_element_sq_error(const Matrix& xhat, const Matrix& xstar) {
    if (!xhat.same_shape(xstar))
        throw std::invalid_argument("per_element_sq_error: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < xhat.size(); ++i) {
        const double d = xhat.data()[i] - xstar.data()[i];
        s += d * d;
    }
    return s / static_cast<double>(xhat.size());
}

} // namespace sfmc
