#include "sgf/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "sgf/error.hpp"

namespace sgf {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw InvalidInput("DenseMatrix: data length " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void DenseMatrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool DenseMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

static void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw InvalidInput(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                           shape_string(b));
    }
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& o) {
    require_same_shape(*this, o, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& o) {
    require_same_shape(*this, o, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

DenseMatrix& DenseMatrix::axpy(double s, const DenseMatrix& o) {
    require_same_shape(*this, o, "axpy");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
    return *this;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw InvalidInput("matmul: " + shape_string(a) + " * " + shape_string(b));
    }
    DenseMatrix c(a.rows(), b.cols());
    const std::size_t inner_dim = a.cols();
    const std::size_t out_cols = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* crow = c.data().data() + i * out_cols;
        const double* arow = a.data().data() + i * inner_dim;
        for (std::size_t k = 0; k < inner_dim; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;  // sparse bag-of-words features
            const double* brow = b.data().data() + k * out_cols;
            for (std::size_t j = 0; j < out_cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) {
        throw InvalidInput("matmul_tn: " + shape_string(a) + "^T * " + shape_string(b));
    }
    DenseMatrix c(a.cols(), b.cols());
    const std::size_t out_cols = b.cols();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double* arow = a.data().data() + r * a.cols();
        const double* brow = b.data().data() + r * out_cols;
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double ari = arow[i];
            if (ari == 0.0) continue;
            double* crow = c.data().data() + i * out_cols;
            for (std::size_t j = 0; j < out_cols; ++j) crow[j] += ari * brow[j];
        }
    }
    return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols()) {
        throw InvalidInput("matmul_nt: " + shape_string(a) + " * " + shape_string(b) + "^T");
    }
    DenseMatrix c(a.rows(), b.rows());
    const std::size_t inner_dim = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.data().data() + i * inner_dim;
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* brow = b.data().data() + j * inner_dim;
            double s = 0.0;
            for (std::size_t k = 0; k < inner_dim; ++k) s += arow[k] * brow[k];
            c(i, j) = s;
        }
    }
    return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

double inner(const DenseMatrix& a, const DenseMatrix& b) {
    require_same_shape(a, b, "inner");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

std::string shape_string(const DenseMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace sgf
