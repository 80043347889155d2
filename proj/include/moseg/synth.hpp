#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "moseg/model.hpp"
#include "moseg/twoview.hpp"

namespace moseg {

/// Synthetic multi-body scene parameters. Bodies are point blobs on a line,
/// each with its own rigid per-frame motion; cameras sit on an arc looking at
/// the scene center. motion_scale = 0 freezes all bodies (rejected for d ≥ 2:
/// bodies sharing one rigid motion are indistinguishable).
struct SceneConfig {
    int n = 20;
    int d = 2;
    int points_per_body = 100;
    double pixel_noise = 0.5;
    double motion_scale = 1.0;

    double body_spacing = 3.0;
    double body_half_extent = 1.0;
    double camera_radius = 14.0;
    double arc_span_deg = 70.0;
    double focal = 1200.0;
    double principal_x = 640.0;
    double principal_y = 512.0;
};

/// Disjoint multi-image point tracks: tracks[q] lists (image, point index)
/// slots, at most one per image.
struct TrackSet {
    std::vector<std::vector<std::pair<int, int>>> tracks;
};

struct SyntheticScene {
    SceneConfig config;
    int n = 0;
    int d = 0;
    std::vector<int> p;
    std::vector<std::vector<Eigen::Vector2d>> image_points;  // [image][point index]
    std::vector<std::vector<Label>> gt_labels;               // [image][point index]
    std::vector<MatchList> matches;                          // all pairs, exact
    TrackSet tracks;

    /// Match list of `pair` rendered as correspondences with coordinates.
    std::vector<Correspondence> correspondences(const MatchList& pair_matches) const;

    /// n/d/p + the exact match lists; no partial segmentations.
    Dataset clean_dataset() const;
};

/// Deterministic under (config, seed). Throws std::invalid_argument for
/// degenerate configs (bodies moving rigidly together, points behind a
/// camera, n < 2, d < 1).
SyntheticScene generate_scene(const SceneConfig& config, std::uint64_t seed);

/// Switches ⌊ε·m⌋ uniformly chosen entries by shuffling their j-side indices
/// with no fixed point whenever the selected set has ≥ 2 entries. Keeps
/// matches one-to-one; deterministic under seed.
MatchList corrupt_matches(const MatchList& matches, double epsilon, std::uint64_t seed);

/// Controlled pairwise-segmentation noise, independent of any two-view
/// geometry: per pair, ground-truth labels pass through a random label
/// permutation, then each entry is flipped to a different motion with
/// probability `flip`, zeroed with probability `outlier`, and dropped from
/// the match list with probability `missing`.
struct NoiseParams {
    double flip = 0.0;
    double outlier = 0.0;
    double missing = 0.0;
};

Dataset simulate_pairwise(const SyntheticScene& scene, const NoiseParams& noise,
                          std::uint64_t seed);

}  // namespace moseg
