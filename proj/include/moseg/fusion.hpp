#pragma once

#include <optional>
#include <vector>

#include "moseg/assignment.hpp"
#include "moseg/model.hpp"

namespace moseg {

/// All estimate vectors available for one image, one per segmented pair the
/// image participates in (the set B_i).
struct EstimateSet {
    int image = 0;
    std::vector<EstimateVector> members;
};

EstimateSet estimates_for_image(const Dataset& dataset, int image);

/// Vote handling for the zero label. ignore_zeros drops outlier verdicts
/// before voting (the shipped policy); keep_zeros counts them and exists for
/// experiments only.
enum class ZeroPolicy { ignore_zeros, keep_zeros };

struct AlignedEstimates {
    EstimateSet estimates;
    std::vector<PermutationMap> applied;  // relabeling applied to each member
    bool fallback = false;                // sync graph was disconnected
    bool dense_fallback = false;
    int components = 1;
};

/// Brings all members of an estimate set onto one label numbering by
/// synchronizing the pairwise label alignments (edges require at least one
/// co-observed motion-labeled point). A disconnected alignment graph
/// degrades to component-wise alignment and is flagged.
AlignedEstimates align_estimate_set(const EstimateSet& estimates, int d);

/// Per-point mode vote over an aligned estimate set. Points with no
/// remaining votes come out as 0 (unknown); ties go to the smallest motion
/// index.
TotalSegmentation fuse_mode(const EstimateSet& aligned, int d,
                            ZeroPolicy policy = ZeroPolicy::ignore_zeros);

/// estimates_for_image → align_estimate_set → fuse_mode.
TotalSegmentation segment_image(const Dataset& dataset, int image,
                                ZeroPolicy policy = ZeroPolicy::ignore_zeros);

/// Permutation mapping s_j's numbering into s_i's, chained through the
/// pair's local numbering. Empty when either chain link has no co-observed
/// motion-labeled point (such edges are omitted from the global sync graph).
std::optional<PermutationMap> global_pair_permutation(const Dataset& dataset,
                                                      const TotalSegmentation& s_i,
                                                      const TotalSegmentation& s_j,
                                                      ImagePair pair, int d);

struct ImageReport {
    int image = 0;
    double classified_fraction = 0.0;
    bool align_fallback = false;
};

struct RunReport {
    std::vector<ImageReport> images;
    int sync_edges = 0;
    int sync_residual = 0;   // edges whose relation P_ij = P_i ∘ P_j⁻¹ fails
    int omitted_edges = 0;   // segmented pairs without alignment evidence
    bool global_fallback = false;
    bool dense_fallback = false;

    double classified_fraction_overall(const std::vector<int>& point_counts) const;
};

struct SegmentationResult {
    std::vector<TotalSegmentation> segmentations;
    RunReport report;
};

/// Full pipeline: per-image segmentation followed by cross-image
/// synchronization, yielding one global motion numbering. `threads` > 1
/// parallelizes the per-image stage. Throws std::invalid_argument when
/// validate_dataset reports violations.
SegmentationResult segment_all(const Dataset& dataset,
                               ZeroPolicy policy = ZeroPolicy::ignore_zeros, int threads = 1);

}  // namespace moseg
