#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "matt/error.hpp"
#include "matt/numeric.hpp"

namespace matt {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw Error(ErrorCode::ShapeError, "matrix data length does not match shape");
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::column(std::span<const double> values) {
    return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Parameter& ParamStore::add(std::string name, Matrix init) {
    if (contains(name)) {
        throw Error(ErrorCode::InvalidConfig, "duplicate parameter " + name);
    }
    Matrix grad(init.rows(), init.cols());
    params_.push_back(Parameter{std::move(name), std::move(init), std::move(grad)});
    return params_.back();
}

bool ParamStore::contains(std::string_view name) const {
    return std::any_of(params_.begin(), params_.end(), [&](const Parameter& p) { return p.name == name; });
}

Parameter& ParamStore::at(std::string_view name) {
    for (auto& p : params_) {
        if (p.name == name) return p;
    }
    throw Error(ErrorCode::ShapeError, "no parameter named " + std::string(name));
}

const Parameter& ParamStore::at(std::string_view name) const {
    return const_cast<ParamStore*>(this)->at(name);
}

void ParamStore::zero_grad() {
    for (auto& p : params_) p.grad.fill(0.0);
}

bool ParamStore::same_values(const ParamStore& other) const {
    if (params_.size() != other.params_.size()) return false;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const auto& a = params_[i];
        const auto& b = other.params_[i];
        if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) {
            return false;
        }
        // Bitwise, so that -0.0 and 0.0 differ and NaNs compare equal to themselves.
        if (!std::equal(a.value.data().begin(), a.value.data().end(), b.value.data().begin(),
                        [](double x, double y) { return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y); })) {
            return false;
        }
    }
    return true;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Matrix xavier_uniform(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    if (rows == 0 || cols == 0) {
        throw Error(ErrorCode::ShapeError, "xavier_uniform needs positive dimensions");
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = dist(rng);
    return m;
}

}  // namespace matt
