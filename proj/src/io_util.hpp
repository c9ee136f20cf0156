#pragma once

// Internal helpers shared by the binary and text file writers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "matt/error.hpp"

namespace matt::detail {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

template <typename T>
void put_le(std::string& out, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.append(bytes, sizeof(T));
}

class ByteReader {
public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > bytes_.size()) {
            throw Error(ErrorCode::FormatError, "unexpected end of binary data");
        }
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string_view take(std::size_t n) {
        if (pos_ + n > bytes_.size()) {
            throw Error(ErrorCode::FormatError, "unexpected end of binary data");
        }
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    bool done() const noexcept { return pos_ == bytes_.size(); }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);

/// Writes to `path + ".tmp"` then renames over `path`.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace matt::detail
