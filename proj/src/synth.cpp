#include "moseg/synth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace moseg {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct BodyMotion {
    Eigen::Vector3d center;
    Eigen::Vector3d axis;
    double angular_rate = 0.0;
    Eigen::Vector3d velocity;

    Eigen::Affine3d at_frame(int f) const {
        Eigen::Affine3d t = Eigen::Affine3d::Identity();
        t.translate(center + f * velocity);
        t.rotate(Eigen::AngleAxisd(f * angular_rate, axis));
        t.translate(-center);
        return t;
    }
};

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Vector3d v;
    do {
        v = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    } while (v.norm() < 1e-6);
    return v.normalized();
}

/// World→camera rotation looking from `eye` at the origin, y roughly down.
Eigen::Matrix3d look_at_origin(const Eigen::Vector3d& eye) {
    const Eigen::Vector3d forward = (-eye).normalized();
    Eigen::Vector3d right = Eigen::Vector3d(0, 1, 0).cross(forward);
    if (right.norm() < 1e-9) right = Eigen::Vector3d(1, 0, 0);
    right.normalize();
    const Eigen::Vector3d down = forward.cross(right);
    Eigen::Matrix3d rot;
    rot.row(0) = right.transpose();
    rot.row(1) = down.transpose();
    rot.row(2) = forward.transpose();
    return rot;
}

bool same_transform(const Eigen::Affine3d& a, const Eigen::Affine3d& b) {
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff() < 1e-9;
}

}  // namespace

std::vector<Correspondence> SyntheticScene::correspondences(const MatchList& pair_matches) const {
    std::vector<Correspondence> out;
    out.reserve(pair_matches.entries.size());
    for (const auto& [a, b] : pair_matches.entries) {
        const Eigen::Vector2d& pa = image_points[pair_matches.pair.i][a];
        const Eigen::Vector2d& pb = image_points[pair_matches.pair.j][b];
        out.push_back({pa.x(), pa.y(), pb.x(), pb.y()});
    }
    return out;
}

Dataset SyntheticScene::clean_dataset() const {
    return Dataset{n, d, p, matches, {}};
}

SyntheticScene generate_scene(const SceneConfig& config, std::uint64_t seed) {
    if (config.n < 2) throw std::invalid_argument("generate_scene: need n >= 2 images");
    if (config.d < 1) throw std::invalid_argument("generate_scene: need d >= 1 motions");
    if (config.points_per_body < 1)
        throw std::invalid_argument("generate_scene: need at least one point per body");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    std::normal_distribution<double> pixel_jitter(0.0, 1.0);

    const int n = config.n;
    const int d = config.d;
    const int total_points = d * config.points_per_body;

    // Bodies: point blobs centered on the x axis.
    std::vector<std::vector<Eigen::Vector3d>> body_points(d);
    std::vector<BodyMotion> motions(d);
    for (int body = 0; body < d; ++body) {
        const Eigen::Vector3d center(config.body_spacing * (body - (d - 1) / 2.0), 0.0, 0.0);
        body_points[body].reserve(config.points_per_body);
        for (int q = 0; q < config.points_per_body; ++q)
            body_points[body].push_back(center + config.body_half_extent *
                                                     Eigen::Vector3d(unit(rng), unit(rng),
                                                                     unit(rng)));
        BodyMotion motion;
        motion.center = center;
        motion.axis = random_unit(rng);
        motion.angular_rate =
            config.motion_scale * (0.08 + 0.06 * frac(rng)) * (body % 2 == 0 ? 1.0 : -1.0);
        // Velocity directions fan out across the bodies, so every body pair
        // keeps a large relative motion in every frame gap. Too-slow bodies
        // would leave the camera sweep dominating all epipolar geometries.
        const double heading = 2.0 * kPi * body / d + 0.3 * unit(rng);
        const double speed = config.motion_scale * (0.18 + 0.06 * frac(rng));
        motion.velocity = speed * Eigen::Vector3d(std::cos(heading), 0.2 * unit(rng),
                                                  std::sin(heading));
        motions[body] = motion;
    }

    // Bodies moving rigidly together are a single motion; reject.
    for (int a = 0; a < d; ++a) {
        for (int b = a + 1; b < d; ++b) {
            bool constant_relative = true;
            const Eigen::Affine3d base =
                motions[a].at_frame(0) * motions[b].at_frame(0).inverse();
            for (int f = 1; f < n && constant_relative; ++f)
                constant_relative = same_transform(
                    base, motions[a].at_frame(f) * motions[b].at_frame(f).inverse());
            if (constant_relative)
                throw std::invalid_argument("generate_scene: bodies " + std::to_string(a) +
                                            " and " + std::to_string(b) +
                                            " share one rigid motion (degenerate)");
        }
    }

    SyntheticScene scene;
    scene.config = config;
    scene.n = n;
    scene.d = d;
    scene.p.assign(n, total_points);
    scene.image_points.assign(n, {});
    scene.gt_labels.assign(n, {});

    const double span = config.arc_span_deg * kPi / 180.0;
    std::vector<std::vector<int>> position(n);  // position[i][q] = index of track q in image i

    for (int i = 0; i < n; ++i) {
        const double theta = -span / 2.0 + span * i / (n - 1);
        const Eigen::Vector3d eye(config.camera_radius * std::sin(theta),
                                  1.0 * std::sin(2.0 * theta + 0.4),
                                  config.camera_radius * std::cos(theta));
        const Eigen::Matrix3d rot = look_at_origin(eye);

        std::vector<Eigen::Vector2d> pixels(total_points);
        std::vector<Label> labels(total_points);
        int q = 0;
        for (int body = 0; body < d; ++body) {
            const Eigen::Affine3d pose = motions[body].at_frame(i);
            for (const auto& point : body_points[body]) {
                const Eigen::Vector3d camera = rot * (pose * point - eye);
                if (camera.z() < 0.1)
                    throw std::invalid_argument("generate_scene: point behind camera " +
                                                std::to_string(i));
                Eigen::Vector2d pixel(config.focal * camera.x() / camera.z() + config.principal_x,
                                      config.focal * camera.y() / camera.z() + config.principal_y);
                if (config.pixel_noise > 0) {
                    pixel.x() += config.pixel_noise * pixel_jitter(rng);
                    pixel.y() += config.pixel_noise * pixel_jitter(rng);
                }
                pixels[q] = pixel;
                labels[q] = static_cast<Label>(body + 1);
                ++q;
            }
        }

        // Shuffle the per-image point order so indices differ across images.
        std::vector<int> perm(total_points);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);

        scene.image_points[i].resize(total_points);
        scene.gt_labels[i].resize(total_points);
        position[i].resize(total_points);
        for (int t = 0; t < total_points; ++t) {
            scene.image_points[i][perm[t]] = pixels[t];
            scene.gt_labels[i][perm[t]] = labels[t];
            position[i][t] = perm[t];
        }
    }

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            MatchList list{{i, j}, {}};
            list.entries.reserve(total_points);
            for (int t = 0; t < total_points; ++t)
                list.entries.emplace_back(position[i][t], position[j][t]);
            std::sort(list.entries.begin(), list.entries.end());
            scene.matches.push_back(std::move(list));
        }
    }

    scene.tracks.tracks.resize(total_points);
    for (int t = 0; t < total_points; ++t) {
        scene.tracks.tracks[t].reserve(n);
        for (int i = 0; i < n; ++i) scene.tracks.tracks[t].emplace_back(i, position[i][t]);
    }
    return scene;
}

MatchList corrupt_matches(const MatchList& matches, double epsilon, std::uint64_t seed) {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw std::invalid_argument("corrupt_matches: epsilon outside [0,1]");
    MatchList out = matches;
    const int m = out.size();
    const int k = static_cast<int>(std::floor(epsilon * m));
    if (k < 2) return out;

    std::mt19937_64 rng(seed);
    std::vector<int> slots(m);
    std::iota(slots.begin(), slots.end(), 0);
    for (int t = 0; t < k; ++t) {
        std::uniform_int_distribution<int> pick(t, m - 1);
        std::swap(slots[t], slots[pick(rng)]);
    }
    slots.resize(k);

    std::vector<int> original(k);
    for (int t = 0; t < k; ++t) original[t] = out.entries[slots[t]].second;

    // Uniform derangement by rejection; Sattolo's single-cycle shuffle as a
    // guaranteed-terminating fallback.
    std::vector<int> shuffled = original;
    bool deranged = false;
    for (int attempt = 0; attempt < 64 && !deranged; ++attempt) {
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        deranged = true;
        for (int t = 0; t < k; ++t)
            if (shuffled[t] == original[t]) {
                deranged = false;
                break;
            }
    }
    if (!deranged) {
        shuffled = original;
        for (int t = k - 1; t > 0; --t) {
            std::uniform_int_distribution<int> pick(0, t - 1);
            std::swap(shuffled[t], shuffled[pick(rng)]);
        }
    }

    for (int t = 0; t < k; ++t) out.entries[slots[t]].second = shuffled[t];
    return out;
}

Dataset simulate_pairwise(const SyntheticScene& scene, const NoiseParams& noise,
                          std::uint64_t seed) {
    for (double rate : {noise.flip, noise.outlier, noise.missing})
        if (rate < 0.0 || rate > 1.0)
            throw std::invalid_argument("simulate_pairwise: rate outside [0,1]");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> frac(0.0, 1.0);

    Dataset dataset{scene.n, scene.d, scene.p, {}, {}};
    for (const auto& clean : scene.matches) {
        // Independent random relabeling per pair.
        std::vector<Label> mapping(scene.d);
        std::iota(mapping.begin(), mapping.end(), Label{1});
        std::shuffle(mapping.begin(), mapping.end(), rng);

        MatchList matches{clean.pair, {}};
        PartialSegmentation partial{clean.pair, {}};
        for (const auto& entry : clean.entries) {
            const Label truth = scene.gt_labels[clean.pair.i][entry.first];
            Label label = mapping[truth - 1];
            if (frac(rng) < noise.flip && scene.d > 1) {
                std::uniform_int_distribution<int> other(1, scene.d - 1);
                label = static_cast<Label>((label - 1 + other(rng)) % scene.d + 1);
            }
            if (frac(rng) < noise.outlier) label = kOutlier;
            if (frac(rng) < noise.missing) continue;
            matches.entries.push_back(entry);
            partial.labels.push_back(label);
        }
        dataset.matches.push_back(std::move(matches));
        dataset.partials.push_back(std::move(partial));
    }
    return dataset;
}

}  // namespace moseg
