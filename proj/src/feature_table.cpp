#include "matt/feature_table.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "io_util.hpp"
#include "matt/error.hpp"
#include "text_util.hpp"

namespace matt {

std::string format_float(float value) { return fmt::format("{:.9g}", value); }

FeatureTable::FeatureTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void FeatureTable::insert(const std::string& track_id, std::vector<float> values) {
    if (values.size() != columns_.size()) {
        throw Error(ErrorCode::ShapeError, "feature row for " + track_id + " has " + std::to_string(values.size()) +
                                               " values, expected " + std::to_string(columns_.size()));
    }
    if (track_id.empty()) throw Error(ErrorCode::FormatError, "empty track id in feature table");
    if (!rows_.emplace(track_id, std::move(values)).second) {
        throw Error(ErrorCode::DuplicateTrack, "duplicate feature row for " + track_id);
    }
}

const std::vector<float>& FeatureTable::at(const std::string& track_id) const {
    const auto it = rows_.find(track_id);
    if (it == rows_.end()) {
        throw Error(ErrorCode::MissingFeature, "no cached features for track " + track_id);
    }
    return it->second;
}

Vector FeatureTable::vector_at(const std::string& track_id) const {
    const auto& row = at(track_id);
    return Vector(row.begin(), row.end());
}

std::string FeatureTable::to_csv() const {
    std::string out = "track_id";
    for (const auto& c : columns_) {
        out += ',';
        out += c;
    }
    out += '\n';
    for (const auto& [id, values] : rows_) {
        out += id;
        for (float v : values) {
            out += ',';
            out += format_float(v);
        }
        out += '\n';
    }
    return out;
}

FeatureTable FeatureTable::parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::BadHeader, "feature file is empty");
    auto header = detail::split_csv_line(line);
    if (header.empty() || header.front() != "track_id") {
        throw Error(ErrorCode::BadHeader, "feature file header must start with track_id");
    }
    header.erase(header.begin());
    FeatureTable table(std::move(header));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != table.dim() + 1) {
            throw Error(ErrorCode::FormatError, "feature file line " + std::to_string(line_no) + ": wrong field count");
        }
        std::vector<float> values(table.dim());
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] = detail::parse_float(fields[i + 1], line_no);
        }
        table.insert(fields[0], std::move(values));
    }
    return table;
}

void FeatureTable::write(const std::string& path) const { detail::write_file_atomic(path, to_csv()); }

FeatureTable FeatureTable::read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open feature file " + path);
    return parse_csv(in);
}

}  // namespace matt
