#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace moseg {

/// Point label. Motion labels are 1..d; 0 marks outliers/unclassified points.
/// kMissing is a separate sentinel meaning "no correspondence in this pair" —
/// it never denotes a classification verdict.
using Label = std::uint16_t;

inline constexpr Label kOutlier = 0;
inline constexpr Label kMissing = std::numeric_limits<Label>::max();

inline constexpr bool is_motion(Label l) { return l != kOutlier && l != kMissing; }

/// Ordered image pair, always stored with i < j.
struct ImagePair {
    int i = 0;
    int j = 0;

    friend bool operator==(const ImagePair&, const ImagePair&) = default;
    friend auto operator<=>(const ImagePair&, const ImagePair&) = default;
};

/// One-to-one point matches of an image pair. entries[t] = (index in image i,
/// index in image j).
struct MatchList {
    ImagePair pair;
    std::vector<std::pair<int, int>> entries;

    int size() const { return static_cast<int>(entries.size()); }
};

/// Labels of the matched point pairs of one image pair, under a pair-local
/// motion numbering. labels[t] corresponds to the t-th match entry and is
/// never kMissing: every matched pair received a verdict (possibly outlier).
struct PartialSegmentation {
    ImagePair pair;
    std::vector<Label> labels;
};

/// Per-image label vector of length p_i. Final pipeline outputs contain no
/// kMissing entries; unclassified points carry 0.
struct TotalSegmentation {
    int image = 0;
    std::vector<Label> labels;
};

/// Image-i-length view of one partial segmentation: position r holds the
/// label the pair (image, partner) gave to point r, or kMissing when that
/// point has no correspondence in the pair.
struct EstimateVector {
    int image = 0;
    int partner = 0;
    std::vector<Label> labels;
};

/// A multi-image segmentation problem: n images with point counts p[i],
/// match lists for a subset of pairs and partial segmentations for the same
/// subset. Partial segmentations may be absent while only matches are known
/// (before pairwise segmentation ran).
struct Dataset {
    int n = 0;
    int d = 0;
    std::vector<int> p;
    std::vector<MatchList> matches;
    std::vector<PartialSegmentation> partials;

    const MatchList* find_matches(ImagePair pair) const;
    const PartialSegmentation* find_partial(ImagePair pair) const;

    /// Partners k of image i over pairs that carry a partial segmentation,
    /// ascending.
    std::vector<int> segmented_partners(int image) const;

    long long total_points() const;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

/// Checks every structural invariant of the dataset: index bounds, one-to-one
/// matches, match/segmentation length agreement, label ranges, and
/// connectivity of the pair graph. Returns all violations found.
ValidationReport validate_dataset(const Dataset& dataset);

/// Scatters the partial segmentation of `pair` into two image-length
/// estimate vectors; unmatched positions are kMissing. Throws
/// std::invalid_argument if the pair has no matches or no segmentation.
std::pair<EstimateVector, EstimateVector> restrict_partial(const Dataset& dataset,
                                                           ImagePair pair);

}  // namespace moseg
