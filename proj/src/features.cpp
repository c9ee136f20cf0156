#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "matt/dsp.hpp"
#include "matt/error.hpp"

namespace matt {

std::string_view family_name(FeatureFamily family) {
    switch (family) {
        case FeatureFamily::ChromaStft: return "chroma_stft";
        case FeatureFamily::ChromaCqt: return "chroma_cqt";
        case FeatureFamily::ChromaCens: return "chroma_cens";
        case FeatureFamily::Tonnetz: return "tonnetz";
        case FeatureFamily::Mfcc: return "mfcc";
        case FeatureFamily::SpecCentroid: return "spec_centroid";
        case FeatureFamily::SpecBandwidth: return "spec_bandwidth";
        case FeatureFamily::SpecContrast: return "spec_contrast";
        case FeatureFamily::SpecRolloff: return "spec_rolloff";
        case FeatureFamily::Rms: return "rms";
        case FeatureFamily::Zcr: return "zcr";
    }
    return "unknown";
}

std::size_t base_dim(FeatureFamily family) {
    switch (family) {
        case FeatureFamily::ChromaStft:
        case FeatureFamily::ChromaCqt:
        case FeatureFamily::ChromaCens: return 12;
        case FeatureFamily::Tonnetz: return 6;
        case FeatureFamily::Mfcc: return 20;
        case FeatureFamily::SpecContrast: return 7;
        case FeatureFamily::SpecCentroid:
        case FeatureFamily::SpecBandwidth:
        case FeatureFamily::SpecRolloff:
        case FeatureFamily::Rms:
        case FeatureFamily::Zcr: return 1;
    }
    return 0;
}

Matrix dct_matrix(std::size_t n_out, std::size_t n_in) {
    Matrix basis(n_out, n_in);
    const double n = static_cast<double>(n_in);
    for (std::size_t k = 0; k < n_out; ++k) {
        const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        for (std::size_t i = 0; i < n_in; ++i) {
            basis(k, i) = scale * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * i + 1.0) / (2.0 * n));
        }
    }
    return basis;
}

FrameFeatureMatrix mfcc(const Matrix& log_mel, std::size_t n_coeffs) {
    if (n_coeffs == 0 || n_coeffs > log_mel.rows()) {
        throw Error(ErrorCode::InvalidConfig,
                    fmt::format("cannot take {} MFCCs from {} mel bands", n_coeffs, log_mel.rows()));
    }
    const auto basis = dct_matrix(n_coeffs, log_mel.rows());
    Matrix out(n_coeffs, log_mel.cols());
    std::vector<double> column(log_mel.rows());
    for (std::size_t f = 0; f < log_mel.cols(); ++f) {
        for (std::size_t m = 0; m < column.size(); ++m) column[m] = log_mel(m, f);
        for (std::size_t k = 0; k < n_coeffs; ++k) out(k, f) = dot(basis.row(k), column);
    }
    return {FeatureFamily::Mfcc, std::move(out)};
}

SummaryFeatureVector summarize(const FrameFeatureMatrix& frames) {
    const auto& m = frames.values;
    const std::size_t dims = m.rows();
    const std::size_t n = m.cols();
    if (n == 0 || dims == 0) throw Error(ErrorCode::EmptyFeature, "cannot summarise an empty frame matrix");

    SummaryFeatureVector out{frames.family, std::vector<double>(kStatisticNames.size() * dims)};
    const auto put = [&](std::size_t stat, std::size_t dim, double v) { out.values[stat * dims + dim] = v; };
    std::vector<double> sorted(n);
    for (std::size_t d = 0; d < dims; ++d) {
        const auto row = m.row(d);
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= static_cast<double>(n);
        double m2 = 0.0;
        double m3 = 0.0;
        double m4 = 0.0;
        for (double v : row) {
            const double c = v - mean;
            const double c2 = c * c;
            m2 += c2;
            m3 += c2 * c;
            m4 += c2 * c2;
        }
        m2 /= static_cast<double>(n);
        m3 /= static_cast<double>(n);
        m4 /= static_cast<double>(n);

        // Variance this small relative to the mean is rounding noise.
        const double scale = std::max(1.0, std::abs(mean));
        const bool degenerate = m2 <= 1e-24 * scale * scale;
        std::copy(row.begin(), row.end(), sorted.begin());
        std::sort(sorted.begin(), sorted.end());

        put(0, d, mean);
        put(1, d, std::sqrt(m2));
        put(2, d, degenerate ? 0.0 : m3 / std::pow(m2, 1.5));
        put(3, d, degenerate ? 0.0 : m4 / (m2 * m2) - 3.0);
        put(4, d, sorted[(n - 1) / 2]);
        put(5, d, sorted.front());
        put(6, d, sorted.back());
    }
    return out;
}

std::vector<std::string> summary_columns(FeatureFamily family) {
    std::vector<std::string> cols;
    for (const auto stat : kStatisticNames) {
        for (std::size_t i = 0; i < base_dim(family); ++i) {
            cols.push_back(fmt::format("{}_{}_{}", family_name(family), stat, i));
        }
    }
    return cols;
}

std::vector<FeatureFamily> feature_set_families(std::string_view name) {
    using F = FeatureFamily;
    for (const auto f : kAllFamilies) {
        if (family_name(f) == name) return {f};
    }
    static constexpr std::array<F, 9> rows = {F::ChromaStft,   F::Tonnetz,      F::Mfcc,
                                              F::SpecCentroid, F::SpecBandwidth, F::SpecContrast,
                                              F::SpecRolloff,  F::Rms,          F::Zcr};
    if (name.size() == 1 && name[0] >= '1' && name[0] <= '9') return {rows[static_cast<std::size_t>(name[0] - '1')]};
    if (name == "3+6") return {F::Mfcc, F::SpecContrast};
    if (name == "3+6+4") return {F::Mfcc, F::SpecContrast, F::SpecCentroid};
    if (name == "1to9") return {kAllFamilies.begin(), kAllFamilies.end()};
    throw Error(ErrorCode::InvalidConfig, "unknown feature set '" + std::string(name) + "'");
}

std::vector<std::string> published_feature_sets() {
    std::vector<std::string> names;
    for (const auto f : kAllFamilies) names.emplace_back(family_name(f));
    names.insert(names.end(), {"3+6", "3+6+4", "1to9"});
    return names;
}

std::vector<std::string> feature_set_columns(std::string_view name) {
    std::vector<std::string> cols;
    for (const auto f : feature_set_families(name)) {
        const auto c = summary_columns(f);
        cols.insert(cols.end(), c.begin(), c.end());
    }
    return cols;
}

std::vector<float> ExtractedFeatures::feature_set(std::string_view name) const {
    std::vector<float> out;
    for (const auto f : feature_set_families(name)) {
        const auto& values = summaries.at(f).values;
        for (double v : values) out.push_back(static_cast<float>(v));
    }
    return out;
}

FeatureExtractor::FeatureExtractor(ExtractionConfig config) : config_(std::move(config)) {
    validate(config_.stft);
    const double f_max = config_.mel.f_max > 0.0 ? config_.mel.f_max : config_.sample_rate_hz / 2.0;
    mel_bank_ = mel_filterbank(config_.mel.n_mels, config_.mel.f_min, f_max, config_.sample_rate_hz,
                               config_.stft.n_fft);
    if (config_.n_mfcc > config_.mel.n_mels) {
        throw Error(ErrorCode::InvalidConfig, "n_mfcc exceeds n_mels");
    }
}

ExtractedFeatures FeatureExtractor::extract(const AudioSignal& signal) const {
    if (signal.sample_rate_hz != config_.sample_rate_hz) {
        throw Error(ErrorCode::InvalidConfig, fmt::format("audio is {} Hz but extraction is configured for {} Hz "
                                                          "(resample externally)",
                                                          signal.sample_rate_hz, config_.sample_rate_hz));
    }
    const auto spec = stft(signal, config_.stft);
    const auto log_mel = log_mel_frames(spec, mel_bank_, config_.mel);

    std::vector<FrameFeatureMatrix> frames;
    frames.push_back(chroma_features(spec, ChromaVariant::Stft));
    frames.push_back(chroma_features(spec, ChromaVariant::Cqt));
    frames.push_back(chroma_features(spec, ChromaVariant::Cens));
    frames.push_back(tonnetz(frames[1]));
    frames.push_back(mfcc(log_mel, config_.n_mfcc));
    auto spectral = spectral_descriptors(spec);
    frames.push_back(std::move(spectral.centroid));
    frames.push_back(std::move(spectral.bandwidth));
    frames.push_back(std::move(spectral.contrast));
    frames.push_back(std::move(spectral.rolloff));
    auto temporal = time_domain_descriptors(signal, config_.stft);
    frames.push_back(std::move(temporal.rms));
    frames.push_back(std::move(temporal.zcr));

    ExtractedFeatures out;
    for (const auto& f : frames) out.summaries.emplace(f.family, summarize(f));
    out.mel = MelSpectrogram{fit_frames(log_mel, config_.mel.n_frames, config_.mel.db_floor), config_.mel};
    return out;
}

ExtractedFeatures extract_feature_sets(const AudioSignal& signal, const ExtractionConfig& config) {
    return FeatureExtractor(config).extract(signal);
}

}  // namespace matt
