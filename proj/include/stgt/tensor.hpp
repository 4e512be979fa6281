#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stgt {

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major 2-D tensor of doubles. Vectors are 1xC, scalars 1x1.
struct Tensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static Tensor zeros(std::size_t r, std::size_t c) { return Tensor(r, c); }

    static Tensor scalar(double v) {
        Tensor t(1, 1);
        t.data[0] = v;
        return t;
    }

    static Tensor from_row(std::span<const double> v) {
        Tensor t(1, v.size());
        std::copy(v.begin(), v.end(), t.data.begin());
        return t;
    }

    std::size_t size() const { return data.size(); }

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    std::string shape_str() const {
        return std::to_string(rows) + "x" + std::to_string(cols);
    }
};

inline bool all_finite(const Tensor& t) {
    for (double v : t.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

// Order-insensitive summation: sorting the addends makes the result a pure
// function of the multiset of values, so permutation-invariance claims hold
// bit-for-bit.
inline double stable_sum(std::vector<double>& buf) {
    std::sort(buf.begin(), buf.end());
    double acc = 0.0;
    for (double v : buf) acc += v;
    return acc;
}

}  // namespace stgt
