#include "fft.hpp"

#include <cmath>
#include <numbers>

namespace matt::detail {

RealFft::RealFft(std::size_t n) : n_(n), pow2_(n > 0 && (n & (n - 1)) == 0) {
    twiddles_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
    if (pow2_) {
        bit_reverse_.resize(n);
        std::size_t bits = 0;
        while ((std::size_t{1} << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
            bit_reverse_[i] = r;
        }
    }
}

void RealFft::transform(std::vector<std::complex<double>>& data) const {
    for (std::size_t i = 0; i < n_; ++i) {
        if (i < bit_reverse_[i]) std::swap(data[i], data[bit_reverse_[i]]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t j = 0; j < half; ++j) {
                const auto t = twiddles_[j * stride] * data[start + j + half];
                data[start + j + half] = data[start + j] - t;
                data[start + j] += t;
            }
        }
    }
}

void RealFft::magnitudes(std::span<const double> frame, std::span<double> out) const {
    const std::size_t bins = n_ / 2 + 1;
    if (pow2_) {
        std::vector<std::complex<double>> data(frame.begin(), frame.end());
        transform(data);
        for (std::size_t k = 0; k < bins; ++k) out[k] = std::abs(data[k]);
        return;
    }
    for (std::size_t k = 0; k < bins; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t t = 0; t < n_; ++t) acc += frame[t] * twiddles_[(k * t) % n_];
        out[k] = std::abs(acc);
    }
}

}  // namespace matt::detail
