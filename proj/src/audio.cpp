#include "matt/audio.hpp"

#include <algorithm>
#include <cmath>

#include "io_util.hpp"
#include "matt/error.hpp"

namespace matt {
namespace {

constexpr float kClipTolerance = 1e-3f;
constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioSignal downmix_and_validate(const std::vector<std::vector<float>>& channels, std::uint32_t rate_hz) {
    if (rate_hz == 0) throw Error(ErrorCode::InvalidConfig, "sample rate must be positive");
    if (channels.empty() || channels.size() > 2) {
        throw Error(ErrorCode::InvalidConfig, "expected 1 or 2 channels, got " + std::to_string(channels.size()));
    }
    const std::size_t n = channels.front().size();
    if (n == 0) throw Error(ErrorCode::EmptyAudio, "audio has no samples");
    for (const auto& ch : channels) {
        if (ch.size() != n) throw Error(ErrorCode::CorruptAudio, "channels have different lengths");
    }
    AudioSignal out;
    out.sample_rate_hz = rate_hz;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        float v = channels[0][i];
        if (channels.size() == 2) v = 0.5f * (channels[0][i] + channels[1][i]);
        for (const auto& ch : channels) {
            if (!std::isfinite(ch[i])) throw Error(ErrorCode::CorruptAudio, "non-finite sample at " + std::to_string(i));
        }
        if (std::abs(v) > 1.0f + kClipTolerance) {
            throw Error(ErrorCode::CorruptAudio, "sample out of range at " + std::to_string(i));
        }
        out.samples[i] = v;
    }
    return out;
}

namespace {

AudioSignal decode_wav_unchecked(std::span<const char> bytes);

}  // namespace

AudioSignal decode_wav(std::span<const char> bytes) {
    try {
        return decode_wav_unchecked(bytes);
    } catch (const Error& e) {
        // the byte reader reports truncation as a format error
        if (e.code() == ErrorCode::FormatError) throw Error(ErrorCode::CorruptAudio, e.what());
        throw;
    }
}

namespace {

AudioSignal decode_wav_unchecked(std::span<const char> bytes) {
    detail::ByteReader in(std::string_view(bytes.data(), bytes.size()));
    if (in.take(4) != "RIFF") throw Error(ErrorCode::CorruptAudio, "missing RIFF header");
    in.get<std::uint32_t>();
    if (in.take(4) != "WAVE") throw Error(ErrorCode::CorruptAudio, "not a WAVE file");

    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
    bool have_fmt = false;
    std::string_view data;
    bool have_data = false;
    while (in.remaining() >= 8) {
        const auto id = in.take(4);
        const auto size = in.get<std::uint32_t>();
        if (id == "data") {
            // Tolerate a truncated final chunk (streams written without a size fix-up).
            data = in.take(std::min<std::size_t>(size, in.remaining()));
            have_data = true;
            break;
        }
        const auto body = in.take(size);
        if (id == "fmt ") {
            detail::ByteReader fmt(body);
            format = fmt.get<std::uint16_t>();
            channels = fmt.get<std::uint16_t>();
            rate = fmt.get<std::uint32_t>();
            fmt.get<std::uint32_t>();  // byte rate
            fmt.get<std::uint16_t>();  // block align
            bits = fmt.get<std::uint16_t>();
            if (format == kFormatExtensible && size >= 26) {
                fmt.get<std::uint16_t>();  // cb size
                fmt.get<std::uint16_t>();  // valid bits
                fmt.get<std::uint32_t>();  // channel mask
                format = fmt.get<std::uint16_t>();  // leading bytes of the sub-format GUID
            }
            have_fmt = true;
        }
        if ((size & 1u) && !in.done()) in.take(1);
    }
    if (!have_fmt || !have_data) throw Error(ErrorCode::CorruptAudio, "missing fmt or data chunk");
    if (channels < 1 || channels > 2) {
        throw Error(ErrorCode::CorruptAudio, "unsupported channel count " + std::to_string(channels));
    }
    const bool pcm16 = format == kFormatPcm && bits == 16;
    const bool float32 = format == kFormatFloat && bits == 32;
    if (!pcm16 && !float32) {
        throw Error(ErrorCode::CorruptAudio, "only 16-bit PCM and 32-bit float WAV are supported");
    }
    const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
    const std::size_t frames = data.size() / frame_bytes;
    std::vector<std::vector<float>> chans(channels, std::vector<float>(frames));
    detail::ByteReader samples(data);
    for (std::size_t i = 0; i < frames; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            chans[c][i] = pcm16 ? static_cast<float>(samples.get<std::int16_t>()) / 32768.0f : samples.get<float>();
        }
    }
    return downmix_and_validate(chans, rate);
}

}  // namespace

AudioSignal read_wav(const std::string& path) {
    const auto bytes = detail::read_file(path);
    try {
        return decode_wav(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

std::string encode_wav(const AudioSignal& signal, WavEncoding encoding) {
    const bool pcm = encoding == WavEncoding::Pcm16;
    const std::uint16_t bits = pcm ? 16 : 32;
    const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * (bits / 8));
    std::string out = "RIFF";
    detail::put_le<std::uint32_t>(out, 36 + data_bytes);
    out += "WAVEfmt ";
    detail::put_le<std::uint32_t>(out, 16);
    detail::put_le<std::uint16_t>(out, pcm ? kFormatPcm : kFormatFloat);
    detail::put_le<std::uint16_t>(out, 1);
    detail::put_le<std::uint32_t>(out, signal.sample_rate_hz);
    detail::put_le<std::uint32_t>(out, signal.sample_rate_hz * (bits / 8));
    detail::put_le<std::uint16_t>(out, bits / 8);
    detail::put_le<std::uint16_t>(out, bits);
    out += "data";
    detail::put_le<std::uint32_t>(out, data_bytes);
    for (float v : signal.samples) {
        if (pcm) {
            const float clamped = std::clamp(v, -1.0f, 32767.0f / 32768.0f);
            detail::put_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(clamped * 32768.0f)));
        } else {
            detail::put_le<float>(out, v);
        }
    }
    return out;
}

void write_wav(const std::string& path, const AudioSignal& signal, WavEncoding encoding) {
    detail::write_file_atomic(path, encode_wav(signal, encoding));
}

}  // namespace matt
