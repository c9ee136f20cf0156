#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "matt/feature_table.hpp"
#include "matt/model.hpp"

namespace matt {

enum class Split { Train, Validation, Test };

Split parse_split(std::string_view token);
std::string_view to_string(Split split);

/// One music segment (track) and its catalogue metadata.
struct SegmentRecord {
    std::string track_id;
    std::string album_id;   ///< empty = unknown
    std::string artist_id;  ///< empty = unknown
    std::size_t genre_id = 0;
    Split split = Split::Train;
};

struct GenreVocabulary {
    std::vector<std::string> names;
    /// Training segments per genre.
    std::vector<std::size_t> train_counts;

    std::size_t size() const noexcept { return names.size(); }
    std::optional<std::size_t> find(std::string_view name) const;
};

class SegmentTable {
public:
    /// Throws DuplicateTrack for a repeated or empty track id.
    void add(SegmentRecord record);

    const std::vector<SegmentRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    const SegmentRecord* find(std::string_view track_id) const;
    const SegmentRecord& at(std::string_view track_id) const;

private:
    std::vector<SegmentRecord> records_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

struct Metadata {
    SegmentTable table;
    GenreVocabulary vocabulary;
};

/// Header must be exactly `track_id,album_id,artist_id,genre,split`.
Metadata parse_metadata(std::istream& in);
Metadata load_metadata(const std::string& path);
std::string format_metadata(const Metadata& metadata);

/// Recounts training segments per genre from the table.
void recount_train(GenreVocabulary& vocabulary, const SegmentTable& table);

struct BagKey {
    std::string artist_id;
    std::string album_id;
    Split split = Split::Train;
};

/// Segments sharing (artist, album, split), with one genre label.
struct Bag {
    BagKey key;
    std::vector<std::string> segment_ids;  ///< sorted ascending
    std::size_t genre_id = 0;
};

struct BagSet {
    std::vector<Bag> bags;
    GenreVocabulary vocabulary;
    std::string provenance;

    std::size_t segment_count() const;
    BagSet with_split(Split split) const;
};

enum class LabelPolicy { Strict, Majority };

LabelPolicy parse_label_policy(std::string_view name);

/// Groups segments into album-artist bags. Segments missing an artist or an
/// album id become singleton bags. Bags are ordered by (split, artist, album,
/// first member).
BagSet build_bags(const SegmentTable& table, const GenreVocabulary& vocabulary,
                  LabelPolicy policy = LabelPolicy::Majority);

/// Every segment as its own bag (segment-level training and evaluation).
BagSet singleton_bags(const SegmentTable& table, const GenreVocabulary& vocabulary);

/// Keeps bags whose genre has fewer than `max_train_count` training segments.
BagSet long_tail_subset(const BagSet& bags, std::size_t max_train_count);

/// Collects a bag's member feature vectors in member order.
BagFeatures gather_features(const Bag& bag, const FeatureTable& features);

/// `bag_index,split,artist_id,album_id,genre,size,track_ids` (ids `;`-joined).
std::string format_bags(const BagSet& bags);

}  // namespace matt
