#include "sfmc/matrix.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sfmc {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("matrix dimensions must be positive");
    data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Matrix::Matrix(int rows, int cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("matrix dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(rows) * cols)
        throw std::invalid_argument("entry count does not match rows*cols");
    if (!all_finite()) throw std::invalid_argument("matrix entries must be finite");
}

Matrix Matrix::constant(int rows, int cols, double value) {
    Matrix m(rows, cols);
    for (auto& v : m.data_) v = value;
    return m;
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double Matrix::frobenius_sq() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
}

double Matrix::max_abs() const {
    double s = 0.0;
    for (double v : data_) s = std::max(s, std::abs(v));
    return s;
}

double Matrix::min_entry() const {
    double s = data_.empty() ? 0.0 : data_[0];
    for (double v : data_) s = std::min(s, v);
    return s;
}

std::size_t Matrix::nnz() const {
    std::size_t n = 0;
    for (double v : data_)
        if (v != 0.0) ++n;
    return n;
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix multiply(const Matrix& lhs, const Matrix& rhs) {
    if (lhs.cols() != rhs.rows())
        throw std::invalid_argument("matrix product: inner dimensions disagree");
    Matrix out(lhs.rows(), rhs.cols());
    for (int i = 0; i < lhs.rows(); ++i) {
        for (int l = 0; l < lhs.cols(); ++l) {
            const double d = lhs(i, l);
            if (d == 0.0) continue;
            for (int j = 0; j < rhs.cols(); ++j) out(i, j) += d * rhs(l, j);
        }
    }
    return out;
}

void write_csv(const Matrix& m, std::ostream& out) {
    char buf[40];
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            if (j) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

void write_csv_file(const Matrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_csv(m, out);
}

Matrix read_csv(std::istream& in) {
    std::vector<double> entries;
    int cols = -1;
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        int c = 0;
        while (std::getline(ss, cell, ',')) {
            std::size_t pos = 0;
            const double v = std::stod(cell, &pos);
            entries.push_back(v);
            ++c;
        }
        if (cols < 0)
            cols = c;
        else if (c != cols)
            throw std::runtime_error("csv rows have inconsistent lengths");
        ++rows;
    }
    if (rows == 0 || cols <= 0) throw std::runtime_error("csv contains no data");
    return Matrix(rows, cols, std::move(entries));
}

Matrix read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_csv(in);
}

} // namespace sfmc
