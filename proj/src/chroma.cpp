#include <algorithm>
#include <cmath>
#include <numbers>

#include "matt/dsp.hpp"
#include "matt/error.hpp"

namespace matt {
namespace {

constexpr double kNormFloor = 1e-12;
constexpr int kCqtLowestMidi = 24;   // C1
constexpr int kCqtHighestMidi = 107;  // B7
constexpr std::size_t kCensWindow = 41;

double midi_to_hz(double midi) { return 440.0 * std::pow(2.0, (midi - 69.0) / 12.0); }

std::size_t pitch_class(int midi) { return static_cast<std::size_t>(((midi % 12) + 12) % 12); }

void normalize_columns_max(Matrix& m) {
    for (std::size_t f = 0; f < m.cols(); ++f) {
        double peak = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) peak = std::max(peak, std::abs(m(r, f)));
        const double d = std::max(peak, kNormFloor);
        for (std::size_t r = 0; r < m.rows(); ++r) m(r, f) /= d;
    }
}

void normalize_columns_l1(Matrix& m) {
    for (std::size_t f = 0; f < m.cols(); ++f) {
        double total = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) total += std::abs(m(r, f));
        const double d = std::max(total, kNormFloor);
        for (std::size_t r = 0; r < m.rows(); ++r) m(r, f) /= d;
    }
}

void normalize_columns_l2(Matrix& m) {
    for (std::size_t f = 0; f < m.cols(); ++f) {
        double total = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) total += m(r, f) * m(r, f);
        const double d = std::max(std::sqrt(total), kNormFloor);
        for (std::size_t r = 0; r < m.rows(); ++r) m(r, f) /= d;
    }
}

Matrix stft_chroma(const MagnitudeSpectrogram& spec) {
    Matrix chroma(12, spec.n_frames());
    for (std::size_t k = 1; k < spec.bins.rows(); ++k) {
        const double midi = 69.0 + 12.0 * std::log2(spec.bin_frequency(k) / 440.0);
        const auto pc = pitch_class(static_cast<int>(std::lround(midi)));
        for (std::size_t f = 0; f < spec.n_frames(); ++f) {
            const double mag = spec.bins(k, f);
            chroma(pc, f) += mag * mag;
        }
    }
    normalize_columns_max(chroma);
    return chroma;
}

/// Triangular filters centred on semitones, each at least one FFT bin wide on
/// either side so that low pitches still see a bin; rows sum to 1.
Matrix pseudo_cqt_filterbank(const MagnitudeSpectrogram& spec, std::vector<int>& midi_of_row) {
    const double bin_hz = spec.bin_frequency(1);
    const double nyquist = spec.sample_rate_hz / 2.0;
    std::vector<std::vector<double>> rows;
    for (int p = kCqtLowestMidi; p <= kCqtHighestMidi; ++p) {
        const double centre = midi_to_hz(p);
        if (centre >= nyquist) break;
        const double lo = std::min(midi_to_hz(p - 1), centre - bin_hz);
        const double hi = std::max(midi_to_hz(p + 1), centre + bin_hz);
        std::vector<double> w(spec.bins.rows(), 0.0);
        double total = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double f = spec.bin_frequency(k);
            const double v = std::max(0.0, std::min((f - lo) / (centre - lo), (hi - f) / (hi - centre)));
            w[k] = v;
            total += v;
        }
        if (total <= 0.0) continue;
        for (auto& v : w) v /= total;
        rows.push_back(std::move(w));
        midi_of_row.push_back(p);
    }
    Matrix bank(rows.size(), spec.bins.rows());
    for (std::size_t r = 0; r < rows.size(); ++r) std::copy(rows[r].begin(), rows[r].end(), bank.row(r).begin());
    return bank;
}

Matrix cqt_chroma_unnormalized(const MagnitudeSpectrogram& spec) {
    std::vector<int> midi;
    const auto bank = pseudo_cqt_filterbank(spec, midi);
    Matrix chroma(12, spec.n_frames());
    std::vector<double> column(spec.bins.rows());
    for (std::size_t f = 0; f < spec.n_frames(); ++f) {
        for (std::size_t k = 0; k < column.size(); ++k) column[k] = spec.bins(k, f);
        for (std::size_t r = 0; r < bank.rows(); ++r) chroma(pitch_class(midi[r]), f) += dot(bank.row(r), column);
    }
    return chroma;
}

Matrix cens_from_cqt(Matrix chroma) {
    normalize_columns_l1(chroma);
    for (auto& v : chroma.data()) {
        double q = 0.0;
        for (const double step : {0.05, 0.1, 0.2, 0.4}) {
            if (v > step) q += 0.25;
        }
        v = q;
    }
    const std::size_t frames = chroma.cols();
    const auto half = static_cast<std::ptrdiff_t>(kCensWindow / 2);
    Matrix smooth(12, frames);
    for (std::size_t r = 0; r < 12; ++r) {
        for (std::size_t f = 0; f < frames; ++f) {
            double acc = 0.0;
            for (std::ptrdiff_t o = -half; o <= half; ++o) {
                const auto idx = static_cast<std::ptrdiff_t>(f) + o;
                if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(frames)) acc += chroma(r, static_cast<std::size_t>(idx));
            }
            smooth(r, f) = acc / static_cast<double>(kCensWindow);
        }
    }
    normalize_columns_l2(smooth);
    return smooth;
}

}  // namespace

FrameFeatureMatrix chroma_features(const MagnitudeSpectrogram& spec, ChromaVariant variant) {
    switch (variant) {
        case ChromaVariant::Stft:
            return {FeatureFamily::ChromaStft, stft_chroma(spec)};
        case ChromaVariant::Cqt: {
            auto chroma = cqt_chroma_unnormalized(spec);
            normalize_columns_max(chroma);
            return {FeatureFamily::ChromaCqt, std::move(chroma)};
        }
        case ChromaVariant::Cens:
            return {FeatureFamily::ChromaCens, cens_from_cqt(cqt_chroma_unnormalized(spec))};
    }
    throw Error(ErrorCode::InvalidConfig, "unknown chroma variant");
}

FrameFeatureMatrix tonnetz(const FrameFeatureMatrix& chroma) {
    if (chroma.values.rows() != 12) throw Error(ErrorCode::ShapeError, "tonnetz needs 12-row chroma");
    Matrix normalized = chroma.values;
    normalize_columns_l1(normalized);

    constexpr double pi = std::numbers::pi;
    constexpr std::array<double, 3> angle_step = {7.0 * pi / 6.0, 3.0 * pi / 2.0, 2.0 * pi / 3.0};
    constexpr std::array<double, 3> radius = {1.0, 1.0, 0.5};
    Matrix phi(6, 12);
    for (std::size_t l = 0; l < 12; ++l) {
        for (std::size_t i = 0; i < 3; ++i) {
            phi(2 * i, l) = radius[i] * std::sin(static_cast<double>(l) * angle_step[i]);
            phi(2 * i + 1, l) = radius[i] * std::cos(static_cast<double>(l) * angle_step[i]);
        }
    }
    Matrix out(6, normalized.cols());
    for (std::size_t f = 0; f < normalized.cols(); ++f) {
        for (std::size_t r = 0; r < 6; ++r) {
            double acc = 0.0;
            for (std::size_t l = 0; l < 12; ++l) acc += phi(r, l) * normalized(l, f);
            out(r, f) = acc;
        }
    }
    return {FeatureFamily::Tonnetz, std::move(out)};
}

}  // namespace matt
