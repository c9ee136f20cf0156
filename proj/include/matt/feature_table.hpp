#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "matt/numeric.hpp"

namespace matt {

/// Per-track feature vectors for one feature set, as stored in the feature
/// cache: header `track_id,<column>,...`, one row per track, values printed
/// with 9 significant digits so that single-precision values round-trip.
class FeatureTable {
public:
    FeatureTable() = default;
    explicit FeatureTable(std::vector<std::string> columns);

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    std::size_t dim() const noexcept { return columns_.size(); }
    std::size_t size() const noexcept { return rows_.size(); }

    void insert(const std::string& track_id, std::vector<float> values);
    bool contains(const std::string& track_id) const { return rows_.count(track_id) != 0; }
    /// Throws MissingFeature when the track has no row.
    const std::vector<float>& at(const std::string& track_id) const;
    Vector vector_at(const std::string& track_id) const;

    const std::map<std::string, std::vector<float>>& rows() const noexcept { return rows_; }

    std::string to_csv() const;
    static FeatureTable parse_csv(std::istream& in);

    void write(const std::string& path) const;
    static FeatureTable read(const std::string& path);

private:
    std::vector<std::string> columns_;
    std::map<std::string, std::vector<float>> rows_;
};

/// Formats a float with 9 significant digits (round-trip exact).
std::string format_float(float value);

}  // namespace matt
