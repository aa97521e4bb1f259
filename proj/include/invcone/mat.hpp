#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace invcone {

/// Small dense real matrix, row-major. Sized for the m <= 16 coupling
/// matrices; the large discretized operators use their own storage.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
    Mat(std::initializer_list<std::initializer_list<double>> rows);

    /// Throws Error{Schema} on ragged or non-finite input.
    static Mat from_rows(const std::vector<std::vector<double>>& rows);
    static Mat identity(std::size_t n);
    static Mat diagonal(std::span<const double> d);
    /// Matrix whose columns are the given vectors (all of equal length).
    static Mat from_columns(const std::vector<std::vector<double>>& cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::vector<double> column(std::size_t c) const;
    std::vector<std::vector<double>> to_rows() const;

    Mat transpose() const;
    double max_abs() const noexcept;
    double norm1() const noexcept;  // max column sum
    bool all_finite() const noexcept;

    friend Mat operator*(const Mat& a, const Mat& b);
    friend Mat operator+(const Mat& a, const Mat& b);
    friend Mat operator-(const Mat& a, const Mat& b);
    friend Mat operator*(double s, const Mat& a);
    friend std::vector<double> operator*(const Mat& a, std::span<const double> x);
    friend bool operator==(const Mat& a, const Mat& b) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// max_{ij} |a_ij - b_ij|; dimensions must agree.
double max_abs_diff(const Mat& a, const Mat& b);

struct InverseResult {
    Mat inverse;
    double condition;  // 1-norm condition number
};

/// Gauss-Jordan with partial pivoting. Throws Error{SingularQ} when a pivot
/// vanishes or the 1-norm condition number is at least `max_condition`.
InverseResult invert(const Mat& a, double max_condition = 1e12);

}  // namespace invcone
