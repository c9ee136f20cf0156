#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "io_util.hpp"
#include "matt/dsp.hpp"
#include "matt/error.hpp"

namespace matt {
namespace {

constexpr double kLinearHzPerMel = 200.0 / 3.0;
constexpr double kBreakHz = 1000.0;
constexpr double kBreakMel = kBreakHz / kLinearHzPerMel;  // 15
const double kLogStep = std::log(6.4) / 27.0;

constexpr char kMelMagic[4] = {'M', 'E', 'L', 'F'};

}  // namespace

double hz_to_mel(double hz) {
    if (hz < kBreakHz) return hz / kLinearHzPerMel;
    return kBreakMel + std::log(hz / kBreakHz) / kLogStep;
}

double mel_to_hz(double mel) {
    if (mel < kBreakMel) return mel * kLinearHzPerMel;
    return kBreakHz * std::exp(kLogStep * (mel - kBreakMel));
}

Matrix mel_filterbank(std::size_t n_mels, double f_min, double f_max, std::uint32_t rate_hz, std::size_t n_fft) {
    const double nyquist = static_cast<double>(rate_hz) / 2.0;
    if (!(f_min >= 0.0) || !(f_min < f_max) || f_max > nyquist) {
        throw Error(ErrorCode::InvalidBand,
                    fmt::format("mel band [{}, {}] Hz must satisfy 0 <= f_min < f_max <= {}", f_min, f_max, nyquist));
    }
    if (n_mels < 2 || n_fft < 2) throw Error(ErrorCode::InvalidConfig, "need n_mels >= 2 and n_fft >= 2");

    const std::size_t bins = n_fft / 2 + 1;
    const double mel_lo = hz_to_mel(f_min);
    const double mel_hi = hz_to_mel(f_max);
    std::vector<double> edges(n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1));
    }
    Matrix bank(n_mels, bins);
    for (std::size_t m = 0; m < n_mels; ++m) {
        const double lo = edges[m];
        const double mid = edges[m + 1];
        const double hi = edges[m + 2];
        const double norm = 2.0 / (hi - lo);
        double row_sum = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * static_cast<double>(rate_hz) / static_cast<double>(n_fft);
            const double rising = (f - lo) / (mid - lo);
            const double falling = (hi - f) / (hi - mid);
            const double w = std::max(0.0, std::min(rising, falling)) * norm;
            bank(m, k) = w;
            row_sum += w;
        }
        if (!(row_sum > 0.0)) {
            throw Error(ErrorCode::InvalidConfig,
                        fmt::format("mel filter {} ({:.1f}-{:.1f} Hz) covers no FFT bin; use fewer mels or a larger n_fft",
                                    m, lo, hi));
        }
    }
    return bank;
}

Matrix power_to_db(const Matrix& power, double amin, double db_floor) {
    double peak = 0.0;
    for (double v : power.data()) peak = std::max(peak, v);
    const double ref = std::max(peak, amin);
    Matrix db(power.rows(), power.cols());
    for (std::size_t i = 0; i < power.size(); ++i) {
        const double p = power[i];
        db[i] = p < amin ? db_floor : std::max(db_floor, 10.0 * std::log10(p / ref));
    }
    return db;
}

Matrix log_mel_frames(const MagnitudeSpectrogram& spec, const Matrix& filterbank, const MelConfig& config) {
    if (filterbank.cols() != spec.bins.rows()) {
        throw Error(ErrorCode::ShapeError, "filterbank width does not match spectrogram bins");
    }
    const std::size_t frames = spec.n_frames();
    Matrix mel_power(filterbank.rows(), frames);
    std::vector<double> power(spec.bins.rows());
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t k = 0; k < power.size(); ++k) {
            const double mag = spec.bins(k, f);
            power[k] = mag * mag;
        }
        for (std::size_t m = 0; m < filterbank.rows(); ++m) mel_power(m, f) = dot(filterbank.row(m), power);
    }
    return power_to_db(mel_power, config.amin, config.db_floor);
}

Matrix fit_frames(const Matrix& frames, std::size_t n_frames, double pad_value) {
    Matrix out(frames.rows(), n_frames, pad_value);
    const std::size_t have = frames.cols();
    if (have >= n_frames) {
        const std::size_t start = (have - n_frames) / 2;
        for (std::size_t r = 0; r < frames.rows(); ++r) {
            for (std::size_t c = 0; c < n_frames; ++c) out(r, c) = frames(r, start + c);
        }
    } else {
        const std::size_t left = (n_frames - have) / 2;
        for (std::size_t r = 0; r < frames.rows(); ++r) {
            for (std::size_t c = 0; c < have; ++c) out(r, left + c) = frames(r, c);
        }
    }
    return out;
}

MelSpectrogram log_mel_spectrogram(const AudioSignal& signal, const StftConfig& stft_config,
                                   const MelConfig& mel_config) {
    const double f_max = mel_config.f_max > 0.0 ? mel_config.f_max : signal.sample_rate_hz / 2.0;
    const auto bank = mel_filterbank(mel_config.n_mels, mel_config.f_min, f_max, signal.sample_rate_hz,
                                     stft_config.n_fft);
    const auto spec = stft(signal, stft_config);
    return MelSpectrogram{fit_frames(log_mel_frames(spec, bank, mel_config), mel_config.n_frames, mel_config.db_floor),
                          mel_config};
}

std::string encode_mel_cache(const MelSpectrogram& mel) {
    std::string out(kMelMagic, 4);
    detail::put_le<std::uint32_t>(out, 1);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(mel.values.rows()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(mel.values.cols()));
    for (double v : mel.values.data()) detail::put_le<float>(out, static_cast<float>(v));
    return out;
}

Matrix decode_mel_cache(std::string_view bytes) {
    detail::ByteReader in(bytes);
    if (in.take(4) != std::string_view(kMelMagic, 4)) throw Error(ErrorCode::FormatError, "not a mel cache file");
    if (in.get<std::uint32_t>() != 1) throw Error(ErrorCode::FormatError, "unsupported mel cache version");
    const auto rows = in.get<std::uint32_t>();
    const auto cols = in.get<std::uint32_t>();
    std::vector<double> data(static_cast<std::size_t>(rows) * cols);
    for (auto& v : data) v = in.get<float>();
    if (!in.done()) throw Error(ErrorCode::FormatError, "trailing bytes in mel cache");
    return Matrix(rows, cols, std::move(data));
}

}  // namespace matt
