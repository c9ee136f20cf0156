#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "matt/audio.hpp"
#include "matt/numeric.hpp"

namespace matt {

// ---------------------------------------------------------------------------
// Short-time Fourier transform

/// Periodic Hann window; reflect padding of n_fft/2 on both sides when
/// center_pad is set.
struct StftConfig {
    std::size_t n_fft = 2048;
    std::size_t hop = 1024;
    bool center_pad = true;
};

void validate(const StftConfig& config);

/// Number of frames produced for a signal of `length` samples.
std::size_t frame_count(std::size_t length, const StftConfig& config);

/// Frame `index` of the (padded) signal, as doubles, without windowing.
std::vector<double> extract_frame(std::span<const float> samples, std::size_t index, const StftConfig& config);

struct MagnitudeSpectrogram {
    Matrix bins;  ///< (n_fft/2 + 1) x n_frames
    StftConfig config;
    std::uint32_t sample_rate_hz = 0;

    std::size_t n_frames() const noexcept { return bins.cols(); }
    double bin_frequency(std::size_t k) const;
};

/// Throws AudioTooShort when no full frame fits.
MagnitudeSpectrogram stft(const AudioSignal& signal, const StftConfig& config);

// ---------------------------------------------------------------------------
// Mel scale

/// Slaney mel scale: linear below 1 kHz (15 mels at 1 kHz), log above.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Area-normalized triangular filters, n_mels x (n_fft/2 + 1).
/// Throws InvalidBand for a band outside [0, rate/2] and InvalidConfig when a
/// filter would cover no FFT bin.
Matrix mel_filterbank(std::size_t n_mels, double f_min, double f_max, std::uint32_t rate_hz, std::size_t n_fft);

struct MelConfig {
    std::size_t n_mels = 96;
    double f_min = 0.0;
    double f_max = 0.0;  ///< 0 means rate / 2
    std::size_t n_frames = 1360;
    double db_floor = -80.0;
    double amin = 1e-10;
};

struct MelSpectrogram {
    Matrix values;  ///< n_mels x n_frames, dB
    MelConfig config;
};

/// 10 log10(power / ref), ref = max(max power, amin); entries with power
/// below amin, and everything below db_floor, map to db_floor.
Matrix power_to_db(const Matrix& power, double amin, double db_floor);

/// Full-length log-mel matrix (no crop/pad).
Matrix log_mel_frames(const MagnitudeSpectrogram& spec, const Matrix& filterbank, const MelConfig& config);

/// Centered crop, or symmetric padding with `pad_value`, to `n_frames` columns.
Matrix fit_frames(const Matrix& frames, std::size_t n_frames, double pad_value);

MelSpectrogram log_mel_spectrogram(const AudioSignal& signal, const StftConfig& stft_config,
                                   const MelConfig& mel_config);

/// Mel cache: "MELF", u32 version 1, u32 n_mels, u32 n_frames, then row-major
/// little-endian f32.
std::string encode_mel_cache(const MelSpectrogram& mel);
Matrix decode_mel_cache(std::string_view bytes);

// ---------------------------------------------------------------------------
// Frame-level feature families

enum class FeatureFamily {
    ChromaStft,
    ChromaCqt,
    ChromaCens,
    Tonnetz,
    Mfcc,
    SpecCentroid,
    SpecBandwidth,
    SpecContrast,
    SpecRolloff,
    Rms,
    Zcr,
};

inline constexpr std::array kAllFamilies = {
    FeatureFamily::ChromaStft,   FeatureFamily::ChromaCqt,     FeatureFamily::ChromaCens,
    FeatureFamily::Tonnetz,      FeatureFamily::Mfcc,          FeatureFamily::SpecCentroid,
    FeatureFamily::SpecBandwidth, FeatureFamily::SpecContrast, FeatureFamily::SpecRolloff,
    FeatureFamily::Rms,          FeatureFamily::Zcr,
};

std::string_view family_name(FeatureFamily family);
std::size_t base_dim(FeatureFamily family);

struct FrameFeatureMatrix {
    FeatureFamily family;
    Matrix values;  ///< base_dim x n_frames
};

/// Orthonormal DCT-II basis, n_out x n_in.
Matrix dct_matrix(std::size_t n_out, std::size_t n_in);

/// First `n_coeffs` orthonormal DCT-II coefficients of each log-mel column.
FrameFeatureMatrix mfcc(const Matrix& log_mel, std::size_t n_coeffs = 20);

enum class ChromaVariant { Stft, Cqt, Cens };

/// Pitch classes ordered C, C#, ..., B with A4 = 440 Hz.
FrameFeatureMatrix chroma_features(const MagnitudeSpectrogram& spec, ChromaVariant variant);

/// Tonal centroid: fifths, minor thirds, major thirds (radii 1, 1, 0.5).
FrameFeatureMatrix tonnetz(const FrameFeatureMatrix& chroma);

struct SpectralDescriptors {
    FrameFeatureMatrix centroid;
    FrameFeatureMatrix bandwidth;
    FrameFeatureMatrix contrast;
    FrameFeatureMatrix rolloff;
};

SpectralDescriptors spectral_descriptors(const MagnitudeSpectrogram& spec);

struct TimeDomainDescriptors {
    FrameFeatureMatrix rms;
    FrameFeatureMatrix zcr;
};

/// Frames the signal exactly like stft() with the given config.
TimeDomainDescriptors time_domain_descriptors(const AudioSignal& signal, const StftConfig& config);

// ---------------------------------------------------------------------------
// Summaries and feature sets

inline constexpr std::array<std::string_view, 7> kStatisticNames = {"mean",   "std", "skew", "kurtosis",
                                                                    "median", "min", "max"};

/// 7 x base_dim values, statistic-major.
struct SummaryFeatureVector {
    FeatureFamily family;
    std::vector<double> values;
};

/// Per row: mean, population std, skew, excess kurtosis, lower median, min,
/// max. Zero-variance rows get skew = kurtosis = 0. Throws EmptyFeature.
SummaryFeatureVector summarize(const FrameFeatureMatrix& frames);

/// Column names `<family>_<stat>_<index>` in summary order.
std::vector<std::string> summary_columns(FeatureFamily family);

/// Named feature sets: each family by name, "3+6", "3+6+4", "1to9", and the
/// numeric row aliases "1".."9" ("1" = chroma_stft).
std::vector<FeatureFamily> feature_set_families(std::string_view name);
std::vector<std::string> published_feature_sets();
std::vector<std::string> feature_set_columns(std::string_view name);

struct ExtractionConfig {
    std::uint32_t sample_rate_hz = 44100;
    StftConfig stft;
    MelConfig mel;
    std::size_t n_mfcc = 20;
};

struct ExtractedFeatures {
    std::map<FeatureFamily, SummaryFeatureVector> summaries;
    MelSpectrogram mel;

    std::vector<float> feature_set(std::string_view name) const;
};

/// Holds the read-only filterbanks; extract() may be called concurrently.
class FeatureExtractor {
public:
    explicit FeatureExtractor(ExtractionConfig config);

    /// Throws InvalidConfig when the signal's rate differs from the configured one.
    ExtractedFeatures extract(const AudioSignal& signal) const;

    const ExtractionConfig& config() const noexcept { return config_; }

private:
    ExtractionConfig config_;
    Matrix mel_bank_;
};

ExtractedFeatures extract_feature_sets(const AudioSignal& signal, const ExtractionConfig& config);

}  // namespace matt
