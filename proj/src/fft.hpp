#pragma once

#include <complex>
#include <span>
#include <vector>

namespace matt::detail {

/// Magnitude spectrum of a real frame. Radix-2 for power-of-two sizes,
/// direct DFT otherwise.
class RealFft {
public:
    explicit RealFft(std::size_t n);

    std::size_t size() const noexcept { return n_; }

    /// out.size() must be n/2 + 1.
    void magnitudes(std::span<const double> frame, std::span<double> out) const;

private:
    void transform(std::vector<std::complex<double>>& data) const;

    std::size_t n_;
    bool pow2_;
    std::vector<std::complex<double>> twiddles_;
    std::vector<std::size_t> bit_reverse_;
};

}  // namespace matt::detail
