#include "cscd/array.hpp"

#include "cscd/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cscd {

Array::Array(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Array::Array(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols) {
        throw DimensionError("Array: " + std::to_string(values_.size()) + " values for shape " +
                             std::to_string(rows) + "x" + std::to_string(cols));
    }
}

Array Array::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> v;
    v.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("Array::from_rows: ragged rows");
        v.insert(v.end(), row.begin(), row.end());
    }
    return Array(r, c, std::move(v));
}

Array Array::row(std::initializer_list<double> values) {
    return Array(1, values.size(), std::vector<double>(values));
}

Array Array::identity(std::size_t n) {
    Array a(n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = 1.0;
    return a;
}

bool Array::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

void Array::require_finite(const std::string& what) const {
    if (!all_finite()) throw NumericalError(what + ": non-finite value in " + shape_string() + " array");
}

void Array::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

void Array::add_in_place(const Array& other) {
    if (!same_shape(other)) {
        throw DimensionError("add_in_place: " + shape_string() + " vs " + other.shape_string());
    }
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
}

std::string Array::shape_string() const {
    return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

double max_abs_diff(const Array& a, const Array& b) {
    if (!a.same_shape(b)) throw DimensionError("max_abs_diff: " + a.shape_string() + " vs " + b.shape_string());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace cscd
