#include "moseg/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace moseg {

PermutationMap best_label_mapping(std::span<const Label> pred, std::span<const Label> gt, int d) {
    return align_labels(gt, pred, d);
}

PointErrorStats misclassification_error_points(const std::vector<TotalSegmentation>& pred,
                                               const std::vector<std::vector<Label>>& gt,
                                               const PermutationMap& mapping) {
    if (pred.size() != gt.size())
        throw std::invalid_argument("misclassification_error_points: image count mismatch");

    PointErrorStats stats;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].labels.size() != gt[i].size())
            throw std::invalid_argument("misclassification_error_points: length mismatch image " +
                                        std::to_string(i));
        long long classified = 0, wrong = 0;
        for (std::size_t r = 0; r < gt[i].size(); ++r) {
            const Label l = pred[i].labels[r];
            if (!is_motion(l)) continue;
            ++classified;
            if (mapping.apply(l) != gt[i][r]) ++wrong;
        }
        const long long total = static_cast<long long>(gt[i].size());
        PerImageError img;
        img.image = pred[i].image;
        img.classified_pct = total == 0 ? 0.0 : 100.0 * classified / static_cast<double>(total);
        if (classified > 0) img.error_pct = 100.0 * wrong / static_cast<double>(classified);
        stats.images.push_back(img);

        stats.classified += classified;
        stats.misclassified += wrong;
        stats.total += total;
    }
    stats.classified_pct =
        stats.total == 0 ? 0.0 : 100.0 * stats.classified / static_cast<double>(stats.total);
    if (stats.classified > 0)
        stats.error_pct = 100.0 * stats.misclassified / static_cast<double>(stats.classified);
    return stats;
}

std::vector<Label> label_tracks(const TrackSet& tracks,
                                const std::vector<TotalSegmentation>& segmentations) {
    std::vector<Label> out;
    out.reserve(tracks.tracks.size());
    std::vector<int> votes;
    for (const auto& track : tracks.tracks) {
        votes.clear();
        Label max_label = 0;
        for (const auto& [image, index] : track) {
            const Label l = segmentations[image].labels[index];
            if (!is_motion(l)) continue;
            max_label = std::max(max_label, l);
            votes.push_back(l);
        }
        if (votes.empty()) {
            out.push_back(kOutlier);
            continue;
        }
        std::vector<int> counts(static_cast<std::size_t>(max_label) + 1, 0);
        for (int v : votes) ++counts[v];
        Label best = 1;
        for (Label l = 1; l <= max_label; ++l)
            if (counts[l] > counts[best]) best = l;
        out.push_back(best);
    }
    return out;
}

double misclassification_error_tracks(const std::vector<Label>& pred,
                                      const std::vector<Label>& gt, int d) {
    if (pred.size() != gt.size())
        throw std::invalid_argument("misclassification_error_tracks: track count mismatch");
    if (pred.empty()) return 0.0;
    const PermutationMap mapping = best_label_mapping(pred, gt, d);
    long long wrong = 0;
    for (std::size_t t = 0; t < pred.size(); ++t)
        if (!is_motion(pred[t]) || mapping.apply(pred[t]) != gt[t]) ++wrong;
    return 100.0 * wrong / static_cast<double>(pred.size());
}

std::vector<PairError> per_pair_errors(const Dataset& dataset,
                                       const std::vector<std::vector<Label>>& gt) {
    std::vector<PairError> out;
    out.reserve(dataset.partials.size());
    for (const auto& partial : dataset.partials) {
        const MatchList* matches = dataset.find_matches(partial.pair);
        std::vector<Label> truth;
        truth.reserve(partial.labels.size());
        for (const auto& entry : matches->entries)
            truth.push_back(gt[partial.pair.i][entry.first]);

        const PermutationMap mapping = best_label_mapping(partial.labels, truth, dataset.d);
        long long classified = 0, wrong = 0;
        for (std::size_t t = 0; t < partial.labels.size(); ++t) {
            if (!is_motion(partial.labels[t])) continue;
            ++classified;
            if (mapping.apply(partial.labels[t]) != truth[t]) ++wrong;
        }
        PairError row;
        row.pair = partial.pair;
        row.classified_pct = partial.labels.empty()
                                 ? 0.0
                                 : 100.0 * classified / static_cast<double>(partial.labels.size());
        if (classified > 0) row.error_pct = 100.0 * wrong / static_cast<double>(classified);
        out.push_back(row);
    }
    return out;
}

std::vector<VoteComposition> vote_composition(const Dataset& dataset, int image,
                                              const std::vector<std::vector<Label>>& gt) {
    std::vector<VoteComposition> rows(gt[image].size());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r].point = static_cast<int>(r);

    for (const auto& partial : dataset.partials) {
        if (partial.pair.i != image && partial.pair.j != image) continue;
        const MatchList* matches = dataset.find_matches(partial.pair);
        std::vector<Label> truth;
        truth.reserve(partial.labels.size());
        for (const auto& entry : matches->entries)
            truth.push_back(gt[partial.pair.i][entry.first]);
        const PermutationMap mapping = best_label_mapping(partial.labels, truth, dataset.d);

        for (std::size_t t = 0; t < partial.labels.size(); ++t) {
            const auto& entry = matches->entries[t];
            const int index = partial.pair.i == image ? entry.first : entry.second;
            VoteComposition& row = rows[index];
            ++row.observations;
            const Label l = partial.labels[t];
            if (!is_motion(l))
                row.outlier += 1.0;
            else if (mapping.apply(l) == gt[image][index])
                row.correct += 1.0;
            else
                row.wrong += 1.0;
        }
    }
    for (auto& row : rows) {
        if (row.observations == 0) continue;
        row.correct /= row.observations;
        row.wrong /= row.observations;
        row.outlier /= row.observations;
    }
    return rows;
}

void write_error_curve_csv(const std::filesystem::path& path,
                           const std::vector<ErrorCurvePoint>& points) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "epsilon,error_pct,classified_pct\n";
    for (const auto& p : points)
        out << p.epsilon << ',' << p.error_pct << ',' << p.classified_pct << '\n';
}

void write_pair_error_csv(const std::filesystem::path& path, const std::vector<PairError>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "i,j,error_pct,classified_pct\n";
    for (const auto& row : rows) {
        out << row.pair.i << ',' << row.pair.j << ',';
        if (row.error_pct)
            out << *row.error_pct;
        else
            out << "nan";
        out << ',' << row.classified_pct << '\n';
    }
}

void write_vote_composition_csv(const std::filesystem::path& path,
                                const std::vector<VoteComposition>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "point,correct,wrong,outlier,observations\n";
    for (const auto& row : rows)
        out << row.point << ',' << row.correct << ',' << row.wrong << ',' << row.outlier << ','
            << row.observations << '\n';
}

}  // namespace moseg
