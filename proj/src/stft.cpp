#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "matt/dsp.hpp"
#include "matt/error.hpp"

namespace matt {
namespace {

/// Index into a signal of length n after reflect padding (numpy "reflect",
/// repeated for pads longer than the signal).
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
    if (n == 1) return 0;
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    std::ptrdiff_t m = i % period;
    if (m < 0) m += period;
    return static_cast<std::size_t>(m < static_cast<std::ptrdiff_t>(n) ? m : period - m);
}

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
    return w;
}

}  // namespace

void validate(const StftConfig& config) {
    if (config.n_fft < 2 || config.hop == 0 || config.hop > config.n_fft) {
        throw Error(ErrorCode::InvalidConfig, "STFT needs n_fft >= 2 and 0 < hop <= n_fft");
    }
}

std::size_t frame_count(std::size_t length, const StftConfig& config) {
    const std::size_t padded = length + (config.center_pad ? 2 * (config.n_fft / 2) : 0);
    if (length == 0 || padded < config.n_fft) return 0;
    return 1 + (padded - config.n_fft) / config.hop;
}

std::vector<double> extract_frame(std::span<const float> samples, std::size_t index, const StftConfig& config) {
    std::vector<double> frame(config.n_fft);
    const auto offset = static_cast<std::ptrdiff_t>(index * config.hop) -
                        static_cast<std::ptrdiff_t>(config.center_pad ? config.n_fft / 2 : 0);
    for (std::size_t t = 0; t < config.n_fft; ++t) {
        frame[t] = samples[reflect_index(offset + static_cast<std::ptrdiff_t>(t), samples.size())];
    }
    return frame;
}

double MagnitudeSpectrogram::bin_frequency(std::size_t k) const {
    return static_cast<double>(k) * static_cast<double>(sample_rate_hz) / static_cast<double>(config.n_fft);
}

MagnitudeSpectrogram stft(const AudioSignal& signal, const StftConfig& config) {
    validate(config);
    const std::size_t frames = frame_count(signal.samples.size(), config);
    if (frames == 0) {
        throw Error(ErrorCode::AudioTooShort, "signal of " + std::to_string(signal.samples.size()) +
                                                  " samples is shorter than one frame");
    }
    const auto window = hann_window(config.n_fft);
    const detail::RealFft fft(config.n_fft);
    const std::size_t bins = config.n_fft / 2 + 1;

    MagnitudeSpectrogram spec{Matrix(bins, frames), config, signal.sample_rate_hz};
    std::vector<double> column(bins);
    for (std::size_t f = 0; f < frames; ++f) {
        auto frame = extract_frame(signal.samples, f, config);
        for (std::size_t t = 0; t < frame.size(); ++t) frame[t] *= window[t];
        fft.magnitudes(frame, column);
        for (std::size_t k = 0; k < bins; ++k) spec.bins(k, f) = column[k];
    }
    return spec;
}

}  // namespace matt
