#include "matt/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include <spdlog/spdlog.h>

#include "matt/error.hpp"
#include "text_util.hpp"

namespace matt {
namespace {

constexpr std::string_view kMetadataHeader = "track_id,album_id,artist_id,genre,split";

bool bag_less(const Bag& a, const Bag& b) {
    return std::tie(a.key.split, a.key.artist_id, a.key.album_id, a.segment_ids.front()) <
           std::tie(b.key.split, b.key.artist_id, b.key.album_id, b.segment_ids.front());
}

}  // namespace

Split parse_split(std::string_view token) {
    if (token == "train" || token == "training") return Split::Train;
    if (token == "validation") return Split::Validation;
    if (token == "test") return Split::Test;
    throw Error(ErrorCode::BadSplit, "unknown split token '" + std::string(token) + "'");
}

std::string_view to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test: return "test";
    }
    return "train";
}

std::optional<std::size_t> GenreVocabulary::find(std::string_view name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

void SegmentTable::add(SegmentRecord record) {
    if (record.track_id.empty()) throw Error(ErrorCode::DuplicateTrack, "empty track id");
    if (index_.count(record.track_id)) {
        throw Error(ErrorCode::DuplicateTrack, "track id '" + record.track_id + "' appears twice");
    }
    index_.emplace(record.track_id, records_.size());
    records_.push_back(std::move(record));
}

const SegmentRecord* SegmentTable::find(std::string_view track_id) const {
    const auto it = index_.find(track_id);
    return it == index_.end() ? nullptr : &records_[it->second];
}

const SegmentRecord& SegmentTable::at(std::string_view track_id) const {
    if (const auto* r = find(track_id)) return *r;
    throw Error(ErrorCode::MissingFeature, "unknown track id '" + std::string(track_id) + "'");
}

void recount_train(GenreVocabulary& vocabulary, const SegmentTable& table) {
    vocabulary.train_counts.assign(vocabulary.size(), 0);
    for (const auto& r : table.records()) {
        if (r.split == Split::Train) ++vocabulary.train_counts.at(r.genre_id);
    }
}

Metadata parse_metadata(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::BadHeader, "metadata file is empty");
    if (!line.empty() && static_cast<unsigned char>(line[0]) == 0xEF) {
        line.erase(0, 3);  // UTF-8 BOM
    }
    const auto header = detail::split_csv_line(line);
    const auto expected = detail::split_csv_line(kMetadataHeader);
    if (header != expected) {
        throw Error(ErrorCode::BadHeader, "metadata header must be '" + std::string(kMetadataHeader) + "'");
    }
    Metadata meta;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != expected.size()) {
            throw Error(ErrorCode::BadHeader, "metadata line " + std::to_string(line_no) + " has " +
                                                  std::to_string(f.size()) + " fields, expected 5");
        }
        SegmentRecord r;
        r.track_id = f[0];
        r.album_id = f[1];
        r.artist_id = f[2];
        if (f[3].empty()) throw Error(ErrorCode::FormatError, "metadata line " + std::to_string(line_no) + ": empty genre");
        if (auto id = meta.vocabulary.find(f[3])) {
            r.genre_id = *id;
        } else {
            r.genre_id = meta.vocabulary.names.size();
            meta.vocabulary.names.push_back(f[3]);
        }
        r.split = parse_split(f[4]);
        meta.table.add(std::move(r));
    }
    recount_train(meta.vocabulary, meta.table);
    return meta;
}

Metadata load_metadata(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open metadata file " + path);
    return parse_metadata(in);
}

std::string format_metadata(const Metadata& metadata) {
    std::string out(kMetadataHeader);
    out += '\n';
    for (const auto& r : metadata.table.records()) {
        out += r.track_id + ',' + r.album_id + ',' + r.artist_id + ',' + metadata.vocabulary.names.at(r.genre_id) +
               ',' + std::string(to_string(r.split)) + '\n';
    }
    return out;
}

LabelPolicy parse_label_policy(std::string_view name) {
    if (name == "strict") return LabelPolicy::Strict;
    if (name == "majority") return LabelPolicy::Majority;
    throw Error(ErrorCode::InvalidConfig, "unknown label policy '" + std::string(name) + "'");
}

std::size_t BagSet::segment_count() const {
    std::size_t n = 0;
    for (const auto& b : bags) n += b.segment_ids.size();
    return n;
}

BagSet BagSet::with_split(Split split) const {
    BagSet out{{}, vocabulary, provenance + " [" + std::string(to_string(split)) + "]"};
    std::copy_if(bags.begin(), bags.end(), std::back_inserter(out.bags),
                 [&](const Bag& b) { return b.key.split == split; });
    return out;
}

BagSet build_bags(const SegmentTable& table, const GenreVocabulary& vocabulary, LabelPolicy policy) {
    std::map<std::tuple<Split, std::string, std::string>, std::vector<const SegmentRecord*>> groups;
    BagSet out;
    out.vocabulary = vocabulary;
    out.provenance = "album-artist bags";
    for (const auto& r : table.records()) {
        if (r.album_id.empty() || r.artist_id.empty()) {
            out.bags.push_back(Bag{{r.artist_id, r.album_id, r.split}, {r.track_id}, r.genre_id});
        } else {
            groups[{r.split, r.artist_id, r.album_id}].push_back(&r);
        }
    }
    for (auto& [key, members] : groups) {
        Bag bag;
        bag.key = BagKey{std::get<1>(key), std::get<2>(key), std::get<0>(key)};
        std::vector<std::size_t> votes(vocabulary.size(), 0);
        for (const auto* r : members) {
            bag.segment_ids.push_back(r->track_id);
            ++votes.at(r->genre_id);
        }
        std::sort(bag.segment_ids.begin(), bag.segment_ids.end());
        // max_element returns the first maximum, i.e. the lowest genre id on ties.
        bag.genre_id = static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
        const auto distinct = std::count_if(votes.begin(), votes.end(), [](std::size_t v) { return v > 0; });
        if (distinct > 1) {
            const std::string where = "bag (" + bag.key.artist_id + ", " + bag.key.album_id + ", " +
                                      std::string(to_string(bag.key.split)) + ")";
            if (policy == LabelPolicy::Strict) {
                throw Error(ErrorCode::InconsistentBagLabel, where + " has members with different genres");
            }
            spdlog::warn("{} has {} genres among {} members; using majority label '{}'", where, distinct,
                         members.size(), vocabulary.names.at(bag.genre_id));
        }
        out.bags.push_back(std::move(bag));
    }
    std::sort(out.bags.begin(), out.bags.end(), bag_less);
    return out;
}

BagSet singleton_bags(const SegmentTable& table, const GenreVocabulary& vocabulary) {
    BagSet out;
    out.vocabulary = vocabulary;
    out.provenance = "singleton bags";
    for (const auto& r : table.records()) {
        out.bags.push_back(Bag{{r.artist_id, r.album_id, r.split}, {r.track_id}, r.genre_id});
    }
    std::sort(out.bags.begin(), out.bags.end(), bag_less);
    return out;
}

BagSet long_tail_subset(const BagSet& bags, std::size_t max_train_count) {
    BagSet out{{}, bags.vocabulary, bags.provenance + " [<" + std::to_string(max_train_count) + " train]"};
    for (const auto& b : bags.bags) {
        if (bags.vocabulary.train_counts.at(b.genre_id) < max_train_count) out.bags.push_back(b);
    }
    return out;
}

BagFeatures gather_features(const Bag& bag, const FeatureTable& features) {
    BagFeatures out;
    out.reserve(bag.segment_ids.size());
    for (const auto& id : bag.segment_ids) out.push_back(features.vector_at(id));
    return out;
}

std::string format_bags(const BagSet& bags) {
    std::string out = "bag_index,split,artist_id,album_id,genre,size,track_ids\n";
    for (std::size_t i = 0; i < bags.bags.size(); ++i) {
        const auto& b = bags.bags[i];
        std::string ids;
        for (const auto& id : b.segment_ids) {
            if (!ids.empty()) ids += ';';
            ids += id;
        }
        out += std::to_string(i) + ',' + std::string(to_string(b.key.split)) + ',' + b.key.artist_id + ',' +
               b.key.album_id + ',' + bags.vocabulary.names.at(b.genre_id) + ',' +
               std::to_string(b.segment_ids.size()) + ',' + ids + '\n';
    }
    return out;
}

}  // namespace matt
