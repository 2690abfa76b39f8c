#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ustfwi {

/// Per-axis sizes or coordinates of a regular grid. Row-major storage,
/// last axis fastest.
using Dims = std::vector<int>;
using Coord = std::vector<int>;

inline std::size_t total_size(const Dims& dims) {
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    return n;
}

inline std::string dims_to_string(const Dims& dims) {
    std::string s = "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(dims[i]);
    }
    return s + ")";
}

/// Dense real-valued field on a regular grid.
class Field {
public:
    Field() = default;
    explicit Field(Dims dims, double fill = 0.0)
        : dims_(std::move(dims)), data_(total_size(dims_), fill) {}

    const Dims& dims() const { return dims_; }
    int dim(int axis) const { return dims_[static_cast<std::size_t>(axis)]; }
    int ndim() const { return static_cast<int>(dims_.size()); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> span() { return data_; }
    std::span<const double> span() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::size_t flat_index(const Coord& c) const {
        std::size_t idx = 0;
        for (std::size_t a = 0; a < dims_.size(); ++a)
            idx = idx * static_cast<std::size_t>(dims_[a]) + static_cast<std::size_t>(c[a]);
        return idx;
    }
    double& at(const Coord& c) { return data_[flat_index(c)]; }
    double at(const Coord& c) const { return data_[flat_index(c)]; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    Field& operator+=(const Field& o) {
        check_same_dims(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        check_same_dims(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Field& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    void check_same_dims(const Field& o) const {
        if (dims_ != o.dims_)
            throw std::invalid_argument("field dims mismatch: " + dims_to_string(dims_) +
                                        " vs " + dims_to_string(o.dims_));
    }

private:
    Dims dims_;
    std::vector<double> data_;
};

/// Boolean mask over a grid, stored as bytes.
class Mask {
public:
    Mask() = default;
    explicit Mask(Dims dims, bool fill = false)
        : dims_(std::move(dims)), data_(total_size(dims_), fill ? 1 : 0) {}

    const Dims& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    bool operator[](std::size_t i) const { return data_[i] != 0; }
    void set(std::size_t i, bool v) { data_[i] = v ? 1 : 0; }

    std::size_t count() const {
        return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
    }
    std::vector<std::size_t> indices() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < data_.size(); ++i)
            if (data_[i]) out.push_back(i);
        return out;
    }

private:
    Dims dims_;
    std::vector<std::uint8_t> data_;
};

inline double dot(const Field& a, const Field& b) {
    a.check_same_dims(b);
    // Compensated accumulation keeps reductions order-stable at fp precision.
    double sum = 0.0, comp = 0.0;
    const double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        double term = pa[i] * pb[i] - comp;
        double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    return sum;
}

inline double norm2(const Field& a) { return std::sqrt(dot(a, a)); }

inline double max_abs(const Field& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]));
    return m;
}

inline double kahan_sum(std::span<const double> xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        double term = x - comp;
        double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    return sum;
}

}  // namespace ustfwi
