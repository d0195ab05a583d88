#ifndef SFMC_MATRIX_HPP
#define SFMC_MATRIX_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace sfmc {

/// Dense row-major matrix of doubles. Value semantics; copies are cheap at
/// the problem sizes this library targets (a few thousand per side).
/// Entries are required to be finite; constructors taking data enforce it.
class Matrix {
public:
    Matrix() = default;

    /// rows x cols, zero-filled.
    Matrix(int rows, int cols);

    /// rows x cols from row-major entries. Throws if the length does not
    /// match or any entry is NaN/Inf.
    Matrix(int rows, int cols, std::vector<double> entries);

    static Matrix constant(int rows, int cols, double value);
    static Matrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    double frobenius_sq() const;
    double max_abs() const;
    double min_entry() const;
    /// Count of exact nonzeros (no epsilon thresholding).
    std::size_t nnz() const;
    bool all_finite() const;

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// Matrix product; throws std::invalid_argument on inner-dimension mismatch.
Matrix multiply(const Matrix& lhs, const Matrix& rhs);

/// CSV serialization: one row per line, entries separated by commas,
/// written with enough digits to round-trip doubles exactly.
void write_csv(const Matrix& m, std::ostream& out);
void write_csv_file(const Matrix& m, const std::string& path);
Matrix read_csv(std::istream& in);
Matrix read_csv_file(const std::string& path);

} // namespace sfmc

#endif // SFMC_MATRIX_HPP
