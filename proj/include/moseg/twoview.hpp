#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "moseg/model.hpp"

namespace moseg {

/// A matched point pair: (x,y) in the first image, (xp,yp) in the second.
struct Correspondence {
    double x = 0, y = 0;
    double xp = 0, yp = 0;
};

/// 3×3 rank-2 matrix with unit Frobenius norm encoding x'ᵀ F x = 0.
using FundamentalMatrix = Eigen::Matrix3d;

/// Normalized (Hartley) eight-point fit: isotropic normalization to mean 0 /
/// RMS distance √2 per image, least-squares epipolar solve, rank-2
/// enforcement, denormalization, Frobenius normalization. Throws
/// std::invalid_argument below 8 correspondences or on a degenerate
/// configuration (rank-deficient design).
FundamentalMatrix fit_fundamental(std::span<const Correspondence> correspondences);

/// First-order geometric residual (x'ᵀFx)² / ((Fx)₁² + (Fx)₂² + (Fᵀx')₁² +
/// (Fᵀx')₂²), in squared pixels. Returns +inf when the gradient vanishes
/// (point at an epipole).
double sampson_error(const FundamentalMatrix& f, const Correspondence& c);

struct RansacConfig {
    double inlier_threshold = 2.0;  // pixels; compared against √(Sampson)
    double confidence = 0.999;
    int max_iters = 2000;  // per motion
};

/// Fits d fundamental matrices sequentially: each round runs RANSAC over the
/// still-unlabeled correspondences, refits on the consensus set to a fixed
/// point, and labels its inliers with the round index. A round whose
/// consensus stays below 8 ends the labeling; leftovers get label 0.
/// Deterministic for a fixed seed.
PartialSegmentation sequential_ransac_segment(ImagePair pair,
                                              std::span<const Correspondence> correspondences,
                                              int d, const RansacConfig& config,
                                              std::uint64_t seed);

}  // namespace moseg
