#include "invcone/mat.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "invcone/error.hpp"

namespace invcone {

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw Error(ErrorCode::Schema, "ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Mat Mat::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) throw Error(ErrorCode::Schema, "matrix must be non-empty");
    Mat m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols_) {
            throw Error(ErrorCode::Schema, "row " + std::to_string(r) + " has wrong length");
        }
        for (std::size_t c = 0; c < m.cols_; ++c) {
            if (!std::isfinite(rows[r][c])) throw Error(ErrorCode::Schema, "non-finite matrix entry");
            m(r, c) = rows[r][c];
        }
    }
    return m;
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::diagonal(std::span<const double> d) {
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Mat Mat::from_columns(const std::vector<std::vector<double>>& cols) {
    if (cols.empty()) return {};
    Mat m(cols.front().size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c].size() != m.rows_) throw Error(ErrorCode::DimensionMismatch, "ragged column set");
        for (std::size_t r = 0; r < m.rows_; ++r) m(r, c) = cols[c][r];
    }
    return m;
}

std::vector<double> Mat::column(std::size_t c) const {
    std::vector<double> v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
}

std::vector<std::vector<double>> Mat::to_rows() const {
    std::vector<std::vector<double>> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r].assign(row(r).begin(), row(r).end());
    return out;
}

Mat Mat::transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

double Mat::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

double Mat::norm1() const noexcept {
    double best = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < rows_; ++r) s += std::fabs((*this)(r, c));
        best = std::max(best, s);
    }
    return best;
}

bool Mat::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorCode::DimensionMismatch, "matrix product");
    Mat out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

Mat operator+(const Mat& a, const Mat& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error(ErrorCode::DimensionMismatch, "matrix sum");
    Mat out = a;
    for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
    return out;
}

Mat operator-(const Mat& a, const Mat& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error(ErrorCode::DimensionMismatch, "matrix difference");
    Mat out = a;
    for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
    return out;
}

Mat operator*(double s, const Mat& a) {
    Mat out = a;
    for (double& v : out.data_) v *= s;
    return out;
}

std::vector<double> operator*(const Mat& a, std::span<const double> x) {
    if (a.cols_ != x.size()) throw Error(ErrorCode::DimensionMismatch, "matrix-vector product");
    std::vector<double> y(a.rows_, 0.0);
    for (std::size_t i = 0; i < a.rows_; ++i)
        for (std::size_t j = 0; j < a.cols_; ++j) y[i] += a(i, j) * x[j];
    return y;
}

double max_abs_diff(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::DimensionMismatch, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    return m;
}

InverseResult invert(const Mat& a, double max_condition) {
    if (!a.square()) throw Error(ErrorCode::NonSquare, "invert");
    const std::size_t n = a.rows();
    Mat work = a;
    Mat inv = Mat::identity(n);
    const double scale = std::max(a.max_abs(), 1e-300);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < n; ++r)
            if (std::fabs(work(r, k)) > std::fabs(work(piv, k))) piv = r;
        if (std::fabs(work(piv, k)) <= 1e-15 * scale) throw Error(ErrorCode::SingularQ, "matrix is singular");
        if (piv != k) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(work(k, c), work(piv, c));
                std::swap(inv(k, c), inv(piv, c));
            }
        }
        const double d = 1.0 / work(k, k);
        for (std::size_t c = 0; c < n; ++c) {
            work(k, c) *= d;
            inv(k, c) *= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == k) continue;
            const double f = work(r, k);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                work(r, c) -= f * work(k, c);
                inv(r, c) -= f * inv(k, c);
            }
        }
    }
    const double cond = a.norm1() * inv.norm1();
    if (!(cond < max_condition)) throw Error(ErrorCode::SingularQ, "condition number " + std::to_string(cond));
    return {std::move(inv), cond};
}

}  // namespace invcone
