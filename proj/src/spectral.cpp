#include <algorithm>
#include <cmath>

#include "matt/dsp.hpp"
#include "matt/error.hpp"

namespace matt {
namespace {

constexpr double kRolloffFraction = 0.85;
constexpr double kContrastLowHz = 200.0;
constexpr std::size_t kContrastBands = 6;
constexpr double kContrastQuantile = 0.02;
constexpr double kContrastAmin = 1e-10;

/// Bin masks for the octave bands [0,200], [200,400], ..., plus everything
/// above the last edge folded into the top band.
std::vector<std::vector<std::size_t>> contrast_bands(const MagnitudeSpectrogram& spec) {
    const std::size_t bins = spec.bins.rows();
    std::vector<double> edges(kContrastBands + 2, 0.0);
    for (std::size_t i = 1; i < edges.size(); ++i) {
        edges[i] = kContrastLowHz * std::pow(2.0, static_cast<double>(i - 1));
    }
    std::vector<std::vector<std::size_t>> bands;
    for (std::size_t b = 0; b <= kContrastBands; ++b) {
        std::vector<bool> member(bins, false);
        std::ptrdiff_t first = -1;
        std::ptrdiff_t last = -1;
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = spec.bin_frequency(k);
            if (f >= edges[b] && f <= edges[b + 1]) {
                member[k] = true;
                if (first < 0) first = static_cast<std::ptrdiff_t>(k);
                last = static_cast<std::ptrdiff_t>(k);
            }
        }
        if (first >= 0) {
            if (b > 0 && first > 0) member[static_cast<std::size_t>(first - 1)] = true;
            if (b == kContrastBands) {
                for (auto k = static_cast<std::size_t>(last) + 1; k < bins; ++k) member[k] = true;
            }
        }
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < bins; ++k) {
            if (member[k]) idx.push_back(k);
        }
        // Lower bands drop their top bin, which belongs to the next band.
        if (b < kContrastBands && idx.size() > 1) idx.pop_back();
        bands.push_back(std::move(idx));
    }
    return bands;
}

}  // namespace

SpectralDescriptors spectral_descriptors(const MagnitudeSpectrogram& spec) {
    const std::size_t frames = spec.n_frames();
    const std::size_t bins = spec.bins.rows();
    SpectralDescriptors out{{FeatureFamily::SpecCentroid, Matrix(1, frames)},
                            {FeatureFamily::SpecBandwidth, Matrix(1, frames)},
                            {FeatureFamily::SpecContrast, Matrix(kContrastBands + 1, frames)},
                            {FeatureFamily::SpecRolloff, Matrix(1, frames)}};

    const auto bands = contrast_bands(spec);
    std::vector<double> values;
    for (std::size_t f = 0; f < frames; ++f) {
        double total = 0.0;
        double weighted = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            total += spec.bins(k, f);
            weighted += spec.bins(k, f) * spec.bin_frequency(k);
        }
        if (total > 0.0) {
            const double centroid = weighted / total;
            double spread = 0.0;
            for (std::size_t k = 0; k < bins; ++k) {
                const double d = spec.bin_frequency(k) - centroid;
                spread += spec.bins(k, f) * d * d;
            }
            out.centroid.values(0, f) = centroid;
            out.bandwidth.values(0, f) = std::sqrt(spread / total);

            const double target = kRolloffFraction * total;
            double cumulative = 0.0;
            for (std::size_t k = 0; k < bins; ++k) {
                cumulative += spec.bins(k, f);
                if (cumulative >= target) {
                    out.rolloff.values(0, f) = spec.bin_frequency(k);
                    break;
                }
            }
        }

        for (std::size_t b = 0; b < bands.size(); ++b) {
            const auto& idx = bands[b];
            if (idx.empty()) continue;
            values.clear();
            for (auto k : idx) values.push_back(spec.bins(k, f));
            std::sort(values.begin(), values.end());
            const auto n = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::lround(kContrastQuantile * static_cast<double>(idx.size()))));
            double valley = 0.0;
            double peak = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                valley += values[i];
                peak += values[values.size() - 1 - i];
            }
            valley /= static_cast<double>(n);
            peak /= static_cast<double>(n);
            out.contrast.values(b, f) =
                10.0 * std::log10(std::max(peak, kContrastAmin)) - 10.0 * std::log10(std::max(valley, kContrastAmin));
        }
    }
    return out;
}

TimeDomainDescriptors time_domain_descriptors(const AudioSignal& signal, const StftConfig& config) {
    validate(config);
    const std::size_t frames = frame_count(signal.samples.size(), config);
    if (frames == 0) throw Error(ErrorCode::AudioTooShort, "signal shorter than one frame");
    TimeDomainDescriptors out{{FeatureFamily::Rms, Matrix(1, frames)}, {FeatureFamily::Zcr, Matrix(1, frames)}};
    for (std::size_t f = 0; f < frames; ++f) {
        const auto frame = extract_frame(signal.samples, f, config);
        double energy = 0.0;
        std::size_t crossings = 0;
        for (std::size_t t = 0; t < frame.size(); ++t) {
            energy += frame[t] * frame[t];
            if (t > 0 && (frame[t] >= 0.0) != (frame[t - 1] >= 0.0)) ++crossings;
        }
        out.rms.values(0, f) = std::sqrt(energy / static_cast<double>(frame.size()));
        out.zcr.values(0, f) = static_cast<double>(crossings) / static_cast<double>(frame.size() - 1);
    }
    return out;
}

}  // namespace matt
