#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <doctest.h>

#include "matt/error.hpp"
#include "matt/numeric.hpp"

#define CHECK_MATT_ERROR(expr, expected_code)                                          \
    do {                                                                               \
        bool threw_ = false;                                                           \
        try {                                                                          \
            (void)(expr);                                                              \
        } catch (const matt::Error& e_) {                                              \
            threw_ = true;                                                             \
            CHECK_MESSAGE(e_.code() == (expected_code), std::string(e_.what()));                 \
        }                                                                              \
        CHECK_MESSAGE(threw_, "expected matt::Error " #expected_code " from " #expr); \
    } while (0)

namespace testing {

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

// Independent central-difference derivative of a scalar function of one
// coordinate.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Finite-difference agreement: relative, with an absolute floor for
// near-zero derivatives.
inline bool fd_close(double analytic, double numeric, double rel = 1e-6, double abs_floor = 1e-9) {
    return std::abs(analytic - numeric) <= rel * std::max(std::abs(analytic), std::abs(numeric)) + abs_floor;
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace testing
