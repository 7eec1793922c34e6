#ifndef CSCD_ARRAY_HPP
#define CSCD_ARRAY_HPP

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace cscd {

/// Dense row-major matrix of doubles. The shape is fixed at construction.
class Array {
public:
    Array() = default;
    Array(std::size_t rows, std::size_t cols, double fill = 0.0);
    Array(std::size_t rows, std::size_t cols, std::vector<double> values);

    /// Builds a matrix from nested row lists; all rows must have equal length.
    static Array from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Array row(std::initializer_list<double> values);
    static Array identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> row_view(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

    bool same_shape(const Array& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    /// False if any entry is NaN or infinite.
    bool all_finite() const noexcept;
    /// Throws NumericalError naming `what` when a non-finite entry is present.
    void require_finite(const std::string& what) const;

    void fill(double v);
    /// this += other (shapes must match).
    void add_in_place(const Array& other);

    std::string shape_string() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Largest absolute elementwise difference; shapes must match.
double max_abs_diff(const Array& a, const Array& b);

} // namespace cscd

#endif
