#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include <doctest.h>

#include "helpers.hpp"
#include "matt/audio.hpp"

using namespace matt;

namespace {

template <typename T>
void put(std::string& out, T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));  // host is little-endian
    out.append(b, sizeof(T));
}

// Hand-built WAV so the decoder is not only tested against its own encoder.
std::string wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate, std::uint16_t bits,
                      const std::string& payload, bool with_list_chunk = false) {
    std::string body = "WAVE";
    body += "fmt ";
    put<std::uint32_t>(body, 16);
    put<std::uint16_t>(body, format);
    put<std::uint16_t>(body, channels);
    put<std::uint32_t>(body, rate);
    put<std::uint32_t>(body, rate * channels * bits / 8);
    put<std::uint16_t>(body, static_cast<std::uint16_t>(channels * bits / 8));
    put<std::uint16_t>(body, bits);
    if (with_list_chunk) {
        body += "LIST";
        put<std::uint32_t>(body, 3);
        body += "abc";
        body += '\0';  // pad byte for the odd-sized chunk
    }
    body += "data";
    put<std::uint32_t>(body, static_cast<std::uint32_t>(payload.size()));
    body += payload;
    std::string out = "RIFF";
    put<std::uint32_t>(out, static_cast<std::uint32_t>(body.size()));
    return out + body;
}

AudioSignal decode(const std::string& bytes) { return decode_wav(std::span<const char>(bytes.data(), bytes.size())); }

}  // namespace

TEST_CASE("pcm16 stereo is decoded and averaged to mono") {
    std::string payload;
    const std::int16_t frames[][2] = {{16384, 0}, {-32768, -32768}, {1000, 3000}};
    for (const auto& f : frames) {
        put<std::int16_t>(payload, f[0]);
        put<std::int16_t>(payload, f[1]);
    }
    const auto s = decode(wav_bytes(1, 2, 22050, 16, payload, true));
    CHECK(s.sample_rate_hz == 22050);
    REQUIRE(s.samples.size() == 3);
    CHECK(s.samples[0] == doctest::Approx(0.25));
    CHECK(s.samples[1] == doctest::Approx(-1.0));
    CHECK(s.samples[2] == doctest::Approx(2000.0 / 32768.0));
    CHECK(s.duration_seconds() == doctest::Approx(3.0 / 22050.0));
}

TEST_CASE("float32 mono is decoded exactly") {
    std::string payload;
    const float values[] = {0.5f, -0.125f, 1.0f, 0.0f};
    for (float v : values) put<float>(payload, v);
    const auto s = decode(wav_bytes(3, 1, 44100, 32, payload));
    REQUIRE(s.samples.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(s.samples[i] == values[i]);
}

TEST_CASE("encode/decode round trip") {
    AudioSignal s;
    s.sample_rate_hz = 16000;
    for (int i = 0; i < 500; ++i) s.samples.push_back(static_cast<float>(std::sin(0.05 * i) * 0.9));
    const auto f = decode(encode_wav(s, WavEncoding::Float32));
    CHECK(f.samples == s.samples);
    CHECK(f.sample_rate_hz == 16000);
    const auto p = decode(encode_wav(s, WavEncoding::Pcm16));
    REQUIRE(p.samples.size() == s.samples.size());
    for (std::size_t i = 0; i < s.samples.size(); ++i) CHECK(std::abs(p.samples[i] - s.samples[i]) <= 1.0f / 32768.0f);

    const auto dir = std::filesystem::temp_directory_path() / "matt_test_audio";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "clip.wav").string();
    write_wav(path, s, WavEncoding::Float32);
    CHECK(read_wav(path).samples == s.samples);
    std::filesystem::remove_all(dir);
}

TEST_CASE("malformed and unsupported audio") {
    std::string pcm;
    put<std::int16_t>(pcm, 5);
    const auto good = wav_bytes(1, 1, 8000, 16, pcm);

    auto no_riff = good;
    no_riff[0] = 'X';
    CHECK_MATT_ERROR(decode(no_riff), ErrorCode::CorruptAudio);
    CHECK_MATT_ERROR(decode(good.substr(0, 20)), ErrorCode::CorruptAudio);
    CHECK_MATT_ERROR(decode(wav_bytes(1, 1, 8000, 8, "ab")), ErrorCode::CorruptAudio);
    CHECK_MATT_ERROR(decode(wav_bytes(1, 3, 8000, 16, pcm + pcm + pcm)), ErrorCode::CorruptAudio);
    CHECK_MATT_ERROR(decode(wav_bytes(1, 1, 8000, 16, "")), ErrorCode::EmptyAudio);

    std::string loud;
    put<float>(loud, 1.5f);
    CHECK_MATT_ERROR(decode(wav_bytes(3, 1, 8000, 32, loud)), ErrorCode::CorruptAudio);
    std::string nan;
    put<float>(nan, std::numeric_limits<float>::quiet_NaN());
    CHECK_MATT_ERROR(decode(wav_bytes(3, 1, 8000, 32, nan)), ErrorCode::CorruptAudio);

    CHECK_MATT_ERROR(read_wav("/nonexistent/dir/x.wav"), ErrorCode::IoError);
}

TEST_CASE("downmix validation") {
    CHECK(downmix_and_validate({{0.2f, 0.4f}, {0.0f, -0.4f}}, 100).samples == std::vector<float>{0.1f, 0.0f});
    CHECK(downmix_and_validate({{1.0005f}}, 100).samples.size() == 1);  // within clip tolerance
    CHECK_MATT_ERROR(downmix_and_validate({{0.1f}, {0.1f, 0.2f}}, 100), ErrorCode::CorruptAudio);
    CHECK_MATT_ERROR(downmix_and_validate({{0.1f}, {0.1f}, {0.1f}}, 100), ErrorCode::InvalidConfig);
    CHECK_MATT_ERROR(downmix_and_validate({{0.1f}}, 0), ErrorCode::InvalidConfig);
    CHECK_MATT_ERROR(downmix_and_validate({{}}, 100), ErrorCode::EmptyAudio);
}
