#include "moseg/twoview.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace moseg {

namespace {

struct NormalizedPoints {
    std::vector<Eigen::Vector2d> first;
    std::vector<Eigen::Vector2d> second;
    Eigen::Matrix3d t_first;
    Eigen::Matrix3d t_second;
};

Eigen::Matrix3d isotropic_transform(const std::vector<Eigen::Vector2d>& pts) {
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= static_cast<double>(pts.size());

    double mean_sq = 0.0;
    for (const auto& p : pts) mean_sq += (p - centroid).squaredNorm();
    mean_sq /= static_cast<double>(pts.size());
    const double scale = mean_sq > 0 ? std::sqrt(2.0 / mean_sq) : 1.0;

    Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
    t(0, 0) = scale;
    t(1, 1) = scale;
    t(0, 2) = -scale * centroid.x();
    t(1, 2) = -scale * centroid.y();
    return t;
}

NormalizedPoints normalize(std::span<const Correspondence> corrs) {
    NormalizedPoints np;
    np.first.reserve(corrs.size());
    np.second.reserve(corrs.size());
    for (const auto& c : corrs) {
        np.first.emplace_back(c.x, c.y);
        np.second.emplace_back(c.xp, c.yp);
    }
    np.t_first = isotropic_transform(np.first);
    np.t_second = isotropic_transform(np.second);
    for (auto& p : np.first) p = (np.t_first * p.homogeneous()).hnormalized();
    for (auto& p : np.second) p = (np.t_second * p.homogeneous()).hnormalized();
    return np;
}

Eigen::Matrix<double, 1, 9> design_row(const Eigen::Vector2d& x, const Eigen::Vector2d& xp) {
    Eigen::Matrix<double, 1, 9> row;
    row << xp.x() * x.x(), xp.x() * x.y(), xp.x(), xp.y() * x.x(), xp.y() * x.y(), xp.y(), x.x(),
        x.y(), 1.0;
    return row;
}

Eigen::Matrix3d vector_to_f(const Eigen::Matrix<double, 9, 1>& f) {
    Eigen::Matrix3d m;
    m << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);
    return m;
}

Eigen::Matrix3d enforce_rank2(const Eigen::Matrix3d& f) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector3d sigma = svd.singularValues();
    sigma(2) = 0.0;
    return svd.matrixU() * sigma.asDiagonal() * svd.matrixV().transpose();
}

Eigen::Matrix3d denormalize(const Eigen::Matrix3d& f_hat, const NormalizedPoints& np) {
    Eigen::Matrix3d f = np.t_second.transpose() * f_hat * np.t_first;
    const double norm = f.norm();
    if (norm > 0) f /= norm;
    return f;
}

/// Minimal-sample solve on pre-normalized coordinates. Returns false when the
/// 8 rows are rank-deficient (degenerate sample).
bool solve_minimal(const NormalizedPoints& np, const int idx[8], Eigen::Matrix3d* f_hat) {
    Eigen::Matrix<double, 8, 9> a;
    for (int t = 0; t < 8; ++t) a.row(t) = design_row(np.first[idx[t]], np.second[idx[t]]);

    Eigen::FullPivLU<Eigen::Matrix<double, 8, 9>> lu(a);
    lu.setThreshold(1e-10);
    if (lu.rank() < 8) return false;
    const Eigen::Matrix<double, 9, 1> f = lu.kernel().col(0);
    *f_hat = enforce_rank2(vector_to_f(f));
    return true;
}

}  // namespace

FundamentalMatrix fit_fundamental(std::span<const Correspondence> correspondences) {
    const auto m = correspondences.size();
    if (m < 8)
        throw std::invalid_argument("fit_fundamental: need at least 8 correspondences, got " +
                                    std::to_string(m));

    const NormalizedPoints np = normalize(correspondences);
    Eigen::MatrixXd a(static_cast<long>(m), 9);
    for (std::size_t t = 0; t < m; ++t)
        a.row(static_cast<long>(t)) = design_row(np.first[t], np.second[t]);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    if (sigma(7) <= 1e-10 * sigma(0))
        throw std::invalid_argument("fit_fundamental: degenerate point configuration");

    const Eigen::Matrix<double, 9, 1> f = svd.matrixV().col(svd.matrixV().cols() - 1);
    return denormalize(enforce_rank2(vector_to_f(f)), np);
}

double sampson_error(const FundamentalMatrix& f, const Correspondence& c) {
    const Eigen::Vector3d x(c.x, c.y, 1.0);
    const Eigen::Vector3d xp(c.xp, c.yp, 1.0);
    const Eigen::Vector3d fx = f * x;
    const Eigen::Vector3d ftxp = f.transpose() * xp;
    const double numerator = xp.dot(fx);
    const double denominator = fx(0) * fx(0) + fx(1) * fx(1) + ftxp(0) * ftxp(0) + ftxp(1) * ftxp(1);
    if (denominator <= 0.0) return std::numeric_limits<double>::infinity();
    return numerator * numerator / denominator;
}

PartialSegmentation sequential_ransac_segment(ImagePair pair,
                                              std::span<const Correspondence> correspondences,
                                              int d, const RansacConfig& config,
                                              std::uint64_t seed) {
    if (d < 1) throw std::invalid_argument("sequential_ransac_segment: d must be >= 1");
    const int m = static_cast<int>(correspondences.size());
    PartialSegmentation out{pair, std::vector<Label>(m, kOutlier)};
    if (m < 8) return out;

    const NormalizedPoints np = normalize(correspondences);
    const double threshold_sq = config.inlier_threshold * config.inlier_threshold;

    std::mt19937_64 rng(seed);
    std::vector<int> active(m);
    std::iota(active.begin(), active.end(), 0);
    std::vector<int> scratch;

    for (int motion = 1; motion <= d; ++motion) {
        const int n_active = static_cast<int>(active.size());
        if (n_active < 8) break;

        Eigen::Matrix3d best_f = Eigen::Matrix3d::Zero();
        int best_count = 0;
        double needed = config.max_iters;

        scratch = active;
        int idx[8];
        for (int iter = 0; iter < config.max_iters && iter < needed; ++iter) {
            // Partial Fisher-Yates: 8 distinct active indices.
            for (int t = 0; t < 8; ++t) {
                std::uniform_int_distribution<int> pick(t, n_active - 1);
                std::swap(scratch[t], scratch[pick(rng)]);
                idx[t] = scratch[t];
            }

            Eigen::Matrix3d f_hat;
            if (!solve_minimal(np, idx, &f_hat)) continue;
            const Eigen::Matrix3d f = denormalize(f_hat, np);

            int count = 0;
            for (int t = 0; t < n_active; ++t) {
                if (sampson_error(f, correspondences[active[t]]) < threshold_sq) ++count;
                // No better outcome possible: bail.
                if (count + (n_active - 1 - t) <= best_count) break;
            }
            if (count > best_count) {
                best_count = count;
                best_f = f;
                const double w = static_cast<double>(count) / n_active;
                const double denom = std::log1p(-std::min(std::pow(w, 8), 1.0 - 1e-12));
                needed = denom < 0 ? std::log1p(-config.confidence) / denom : 1.0;
            }
        }
        if (best_count < 8) break;

        // Consensus refit to a fixed point.
        std::vector<int> inliers;
        inliers.reserve(best_count);
        for (int t : active)
            if (sampson_error(best_f, correspondences[t]) < threshold_sq) inliers.push_back(t);
        for (int round = 0; round < 5 && static_cast<int>(inliers.size()) >= 8; ++round) {
            std::vector<Correspondence> subset;
            subset.reserve(inliers.size());
            for (int t : inliers) subset.push_back(correspondences[t]);
            Eigen::Matrix3d refit;
            try {
                refit = fit_fundamental(subset);
            } catch (const std::invalid_argument&) {
                break;
            }
            std::vector<int> next;
            next.reserve(inliers.size());
            for (int t : active)
                if (sampson_error(refit, correspondences[t]) < threshold_sq) next.push_back(t);
            best_f = refit;
            if (next == inliers) break;
            inliers = std::move(next);
        }
        if (static_cast<int>(inliers.size()) < 8) break;

        for (int t : inliers) out.labels[t] = static_cast<Label>(motion);
        std::vector<int> remaining;
        remaining.reserve(active.size() - inliers.size());
        std::set_difference(active.begin(), active.end(), inliers.begin(), inliers.end(),
                            std::back_inserter(remaining));
        active = std::move(remaining);
    }
    return out;
}

}  // namespace moseg
