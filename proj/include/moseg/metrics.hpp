#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "moseg/assignment.hpp"
#include "moseg/model.hpp"
#include "moseg/synth.hpp"

namespace moseg {

/// Permutation of prediction labels that minimizes misclassification against
/// the ground truth (maximum-agreement assignment). Evaluation is always
/// gauge-invariant through this mapping.
PermutationMap best_label_mapping(std::span<const Label> pred, std::span<const Label> gt, int d);

inline PermutationMap best_label_mapping(const std::vector<Label>& pred,
                                         const std::vector<Label>& gt, int d) {
    return best_label_mapping(std::span<const Label>(pred), std::span<const Label>(gt), d);
}

struct PerImageError {
    int image = 0;
    std::optional<double> error_pct;
    double classified_pct = 0.0;
};

struct PointErrorStats {
    std::optional<double> error_pct;  // empty when no point is classified
    double classified_pct = 0.0;
    long long classified = 0;
    long long misclassified = 0;
    long long total = 0;
    std::vector<PerImageError> images;
};

/// Percentage of misclassified points over the classified (non-zero) points,
/// plus the classified percentage; predictions pass through `mapping` first.
PointErrorStats misclassification_error_points(const std::vector<TotalSegmentation>& pred,
                                               const std::vector<std::vector<Label>>& gt,
                                               const PermutationMap& mapping);

/// Mode label per track over its member points; zero labels are excluded
/// unless the track carries nothing else.
std::vector<Label> label_tracks(const TrackSet& tracks,
                                const std::vector<TotalSegmentation>& segmentations);

/// Percentage of misclassified tracks after optimal label mapping;
/// zero-labeled tracks count as errors.
double misclassification_error_tracks(const std::vector<Label>& pred,
                                      const std::vector<Label>& gt, int d);

/// Misclassification of each pair's partial segmentation against ground
/// truth, each pair under its own optimal mapping: percentage of wrong
/// motion labels among the motion-labeled entries.
struct PairError {
    ImagePair pair;
    std::optional<double> error_pct;
    double classified_pct = 0.0;
};

std::vector<PairError> per_pair_errors(const Dataset& dataset,
                                       const std::vector<std::vector<Label>>& gt);

/// Per-point vote composition for one image: fractions of pairs (among those
/// where the point is matched) voting correctly, wrongly, or outlier.
struct VoteComposition {
    int point = 0;
    double correct = 0.0;
    double wrong = 0.0;
    double outlier = 0.0;
    int observations = 0;
};

std::vector<VoteComposition> vote_composition(const Dataset& dataset, int image,
                                              const std::vector<std::vector<Label>>& gt);

// CSV emission (diagnostics for external plotting).

struct ErrorCurvePoint {
    double epsilon = 0.0;
    double error_pct = 0.0;
    double classified_pct = 0.0;
};

void write_error_curve_csv(const std::filesystem::path& path,
                           const std::vector<ErrorCurvePoint>& points);
void write_pair_error_csv(const std::filesystem::path& path, const std::vector<PairError>& rows);
void write_vote_composition_csv(const std::filesystem::path& path,
                                const std::vector<VoteComposition>& rows);

}  // namespace moseg
