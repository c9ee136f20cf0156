#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace matt {

/// Mono PCM in [-1, 1] (with 1e-3 clipping tolerance).
struct AudioSignal {
    std::vector<float> samples;
    std::uint32_t sample_rate_hz = 0;

    double duration_seconds() const {
        return static_cast<double>(samples.size()) / static_cast<double>(sample_rate_hz);
    }
};

/// Averages one or two equal-length channels to mono and validates the
/// result. Throws EmptyAudio, CorruptAudio or InvalidConfig.
AudioSignal downmix_and_validate(const std::vector<std::vector<float>>& channels, std::uint32_t rate_hz);

/// RIFF/WAVE with 16-bit integer or 32-bit float samples, 1 or 2 channels.
AudioSignal read_wav(const std::string& path);
AudioSignal decode_wav(std::span<const char> bytes);

enum class WavEncoding { Pcm16, Float32 };

std::string encode_wav(const AudioSignal& signal, WavEncoding encoding = WavEncoding::Pcm16);
void write_wav(const std::string& path, const AudioSignal& signal, WavEncoding encoding = WavEncoding::Pcm16);

}  // namespace matt
