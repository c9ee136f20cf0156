#include <algorithm>
#include <cmath>
#include <string>

#include "matt/error.hpp"
#include "matt/numeric.hpp"

namespace matt {
namespace {

void require(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::ShapeError, what);
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vector affine(const Matrix& weight, std::span<const double> x, std::span<const double> bias) {
    require(weight.cols() == x.size(), "affine: weight columns != input length");
    require(weight.rows() == bias.size(), "affine: weight rows != bias length");
    Vector y(weight.rows());
    for (std::size_t r = 0; r < weight.rows(); ++r) {
        y[r] = dot(weight.row(r), x) + bias[r];
    }
    return y;
}

void affine_backward(const Matrix& weight, std::span<const double> x, std::span<const double> dy,
                     Matrix& dweight, std::span<double> dbias, std::span<double> dx) {
    require(weight.cols() == x.size() && weight.rows() == dy.size(), "affine_backward: operand shapes");
    require(dweight.rows() == weight.rows() && dweight.cols() == weight.cols(), "affine_backward: dW shape");
    require(dbias.size() == dy.size(), "affine_backward: db shape");
    require(dx.empty() || dx.size() == x.size(), "affine_backward: dx shape");
    for (std::size_t r = 0; r < weight.rows(); ++r) {
        const double g = dy[r];
        dbias[r] += g;
        auto dw = dweight.row(r);
        for (std::size_t c = 0; c < x.size(); ++c) dw[c] += g * x[c];
    }
    if (!dx.empty()) {
        for (std::size_t r = 0; r < weight.rows(); ++r) {
            const auto w = weight.row(r);
            for (std::size_t c = 0; c < x.size(); ++c) dx[c] += dy[r] * w[c];
        }
    }
}

Vector tanh_forward(std::span<const double> x) {
    Vector y(x.size());
    std::transform(x.begin(), x.end(), y.begin(), [](double v) { return std::tanh(v); });
    return y;
}

void tanh_backward(std::span<const double> y, std::span<const double> dy, std::span<double> dx) {
    require(y.size() == dy.size() && y.size() == dx.size(), "tanh_backward: length mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) dx[i] += dy[i] * (1.0 - y[i] * y[i]);
}

Vector softmax(std::span<const double> x) {
    require(!x.empty(), "softmax: empty input");
    const double peak = *std::max_element(x.begin(), x.end());
    Vector p(x.size());
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        p[i] = std::exp(x[i] - peak);
        total += p[i];
    }
    for (auto& v : p) v /= total;
    return p;
}

void softmax_backward(std::span<const double> p, std::span<const double> dp, std::span<double> dx) {
    require(p.size() == dp.size() && p.size() == dx.size(), "softmax_backward: length mismatch");
    const double inner = dot(p, dp);
    for (std::size_t i = 0; i < p.size(); ++i) dx[i] += p[i] * (dp[i] - inner);
}

Vector vconcat(std::span<const double> x, std::span<const double> y) {
    Vector z;
    z.reserve(x.size() + y.size());
    z.insert(z.end(), x.begin(), x.end());
    z.insert(z.end(), y.begin(), y.end());
    return z;
}

void vconcat_backward(std::span<const double> dz, std::span<double> dx, std::span<double> dy) {
    require(dz.size() == dx.size() + dy.size(), "vconcat_backward: length mismatch");
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dz[i];
    for (std::size_t i = 0; i < dy.size(); ++i) dy[i] += dz[dx.size() + i];
}

Vector weighted_sum(std::span<const double> weights, const std::vector<Vector>& vectors) {
    require(!vectors.empty(), "weighted_sum: no vectors");
    require(weights.size() == vectors.size(), "weighted_sum: weight count mismatch");
    const std::size_t d = vectors.front().size();
    Vector g(d, 0.0);
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        require(vectors[k].size() == d, "weighted_sum: ragged vectors");
        for (std::size_t i = 0; i < d; ++i) g[i] += weights[k] * vectors[k][i];
    }
    return g;
}

void weighted_sum_backward(std::span<const double> weights, const std::vector<Vector>& vectors,
                           std::span<const double> dg, std::span<double> dweights,
                           std::vector<Vector>& dvectors) {
    require(weights.size() == vectors.size() && dweights.size() == weights.size() &&
                dvectors.size() == vectors.size(),
            "weighted_sum_backward: count mismatch");
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        require(dvectors[k].size() == dg.size() && vectors[k].size() == dg.size(),
                "weighted_sum_backward: length mismatch");
        dweights[k] += dot(dg, vectors[k]);
        for (std::size_t i = 0; i < dg.size(); ++i) dvectors[k][i] += weights[k] * dg[i];
    }
}

}  // namespace matt
