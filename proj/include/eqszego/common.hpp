#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqszego {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double pi = std::numbers::pi;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A standing assumption of the theory fails for the requested input.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// A computation ran but did not meet its own accuracy contract.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Malformed user input (unknown ids, bad flags).
class ConfigError : public Error {
public:
    using Error::Error;
};

namespace detail {

template <class T>
T pairwise_sum_impl(const T* xs, std::size_t n) {
    if (n <= 8) {
        T acc{};
        for (std::size_t i = 0; i < n; ++i) acc += xs[i];
        return acc;
    }
    const std::size_t h = n / 2;
    return pairwise_sum_impl(xs, h) + pairwise_sum_impl(xs + h, n - h);
}

}  // namespace detail

// Tree reduction: the result depends only on the term order, never on how a
// caller partitions the work.
template <class T>
T pairwise_sum(std::span<const T> xs) {
    if (xs.empty()) return T{};
    return detail::pairwise_sum_impl(xs.data(), xs.size());
}

template <class T>
T pairwise_sum(const std::vector<T>& xs) {
    return pairwise_sum(std::span<const T>(xs));
}

inline double rel_diff(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace eqszego
