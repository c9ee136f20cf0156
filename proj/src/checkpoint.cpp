#include <limits>

#include "io_util.hpp"
#include "matt/error.hpp"
#include "matt/numeric.hpp"

namespace matt {
namespace {

constexpr char kMagic[4] = {'M', 'A', 'T', 'T'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::string encode_checkpoint(const ParamStore& params) {
    std::string out(kMagic, 4);
    detail::put_le<std::uint32_t>(out, kVersion);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params.items()) {
        if (p.name.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw Error(ErrorCode::FormatError, "parameter name too long");
        }
        detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(p.name.size()));
        out += p.name;
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rows()));
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.cols()));
        for (double v : p.value.data()) detail::put_le<double>(out, v);
    }
    return out;
}

ParamStore decode_checkpoint(std::string_view bytes) {
    detail::ByteReader in(bytes);
    if (in.take(4) != std::string_view(kMagic, 4)) {
        throw Error(ErrorCode::FormatError, "not a checkpoint (bad magic)");
    }
    if (const auto version = in.get<std::uint32_t>(); version != kVersion) {
        throw Error(ErrorCode::FormatError, "unsupported checkpoint version " + std::to_string(version));
    }
    const auto count = in.get<std::uint32_t>();
    ParamStore params;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = in.get<std::uint16_t>();
        std::string name(in.take(name_len));
        const auto rows = in.get<std::uint32_t>();
        const auto cols = in.get<std::uint32_t>();
        std::vector<double> data(static_cast<std::size_t>(rows) * cols);
        for (auto& v : data) v = in.get<double>();
        params.add(std::move(name), Matrix(rows, cols, std::move(data)));
    }
    if (!in.done()) {
        throw Error(ErrorCode::FormatError, "trailing bytes after checkpoint");
    }
    return params;
}

void save_checkpoint(const std::string& path, const ParamStore& params) {
    detail::write_file_atomic(path, encode_checkpoint(params));
}

ParamStore load_checkpoint(const std::string& path) { return decode_checkpoint(detail::read_file(path)); }

}  // namespace matt
