#include "moseg/fusion.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include "moseg/parallel.hpp"
#include "moseg/permsync.hpp"

namespace moseg {

namespace {

bool has_motion_coobservation(std::span<const Label> a, std::span<const Label> b) {
    for (std::size_t r = 0; r < a.size(); ++r)
        if (is_motion(a[r]) && is_motion(b[r])) return true;
    return false;
}

bool has_coobservation(std::span<const Label> a, std::span<const Label> b) {
    for (std::size_t r = 0; r < a.size(); ++r)
        if (a[r] != kMissing && b[r] != kMissing) return true;
    return false;
}

std::vector<int> component_ids(int node_count, const std::vector<SyncEdge>& edges) {
    std::vector<int> parent(node_count);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : edges) parent[find(e.h)] = find(e.k);

    std::vector<int> id(node_count, -1);
    int next = 0;
    for (int v = 0; v < node_count; ++v) {
        const int root = find(v);
        if (id[root] < 0) id[root] = next++;
        id[v] = id[root];
    }
    return id;
}

/// Synchronizes each connected component independently (anchor = lowest node
/// per component) and returns the relabeling permutation for every node,
/// i.e. the inverse of the recovered absolute permutation.
struct ComponentSync {
    std::vector<PermutationMap> relabeling;
    std::vector<int> component;  // component id per node, 0 = largest
    int component_count = 1;
    bool dense_fallback = false;
};

ComponentSync synchronize_components(int node_count, int d,
                                     const std::vector<SyncEdge>& edges) {
    ComponentSync out;
    std::vector<int> raw_id = component_ids(node_count, edges);
    const int raw_count = *std::max_element(raw_id.begin(), raw_id.end()) + 1;

    // Relabel component ids so that 0 is the largest component (ties: the one
    // containing the lowest node).
    std::vector<int> size(raw_count, 0);
    for (int v = 0; v < node_count; ++v) ++size[raw_id[v]];
    std::vector<int> order(raw_count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return size[a] > size[b]; });
    std::vector<int> rank(raw_count);
    for (int r = 0; r < raw_count; ++r) rank[order[r]] = r;

    out.component.resize(node_count);
    for (int v = 0; v < node_count; ++v) out.component[v] = rank[raw_id[v]];
    out.component_count = raw_count;
    out.relabeling.assign(node_count, PermutationMap::identity(d));

    for (int c = 0; c < raw_count; ++c) {
        std::vector<int> nodes;
        for (int v = 0; v < node_count; ++v)
            if (out.component[v] == c) nodes.push_back(v);
        if (nodes.size() == 1) continue;

        std::vector<int> local(node_count, -1);
        for (std::size_t t = 0; t < nodes.size(); ++t) local[nodes[t]] = static_cast<int>(t);

        SyncProblem sub{static_cast<int>(nodes.size()), d, {}};
        for (const auto& e : edges)
            if (local[e.h] >= 0 && local[e.k] >= 0)
                sub.edges.push_back({local[e.h], local[e.k], e.rel});

        const SyncResult solved = synchronize(sub);
        out.dense_fallback = out.dense_fallback || solved.dense_fallback;
        for (std::size_t t = 0; t < nodes.size(); ++t)
            out.relabeling[nodes[t]] = solved.absolute[t].inverse();
    }
    return out;
}

}  // namespace

EstimateSet estimates_for_image(const Dataset& dataset, int image) {
    const std::vector<int> partners = dataset.segmented_partners(image);
    if (partners.empty())
        throw std::invalid_argument("image " + std::to_string(image) +
                                    " participates in no segmented pair");
    EstimateSet set{image, {}};
    set.members.reserve(partners.size());
    for (int k : partners) {
        const ImagePair pair{std::min(image, k), std::max(image, k)};
        auto [left, right] = restrict_partial(dataset, pair);
        set.members.push_back(image == pair.i ? std::move(left) : std::move(right));
    }
    return set;
}

AlignedEstimates align_estimate_set(const EstimateSet& estimates, int d) {
    const int m = static_cast<int>(estimates.members.size());
    if (m == 0) throw std::invalid_argument("align_estimate_set: empty estimate set");

    AlignedEstimates out{estimates, std::vector<PermutationMap>(m, PermutationMap::identity(d)),
                         false, false, 1};
    if (m == 1) return out;

    std::vector<SyncEdge> edges;
    for (int h = 0; h < m; ++h)
        for (int k = h + 1; k < m; ++k)
            if (has_motion_coobservation(estimates.members[h].labels,
                                         estimates.members[k].labels))
                edges.push_back({h, k,
                                 align_labels(estimates.members[h].labels,
                                              estimates.members[k].labels, d)});

    ComponentSync sync = synchronize_components(m, d, edges);
    for (int v = 0; v < m; ++v)
        out.estimates.members[v].labels =
            relabel(out.estimates.members[v].labels, sync.relabeling[v]);
    out.applied = sync.relabeling;
    out.components = sync.component_count;
    out.dense_fallback = sync.dense_fallback;

    if (sync.component_count > 1) {
        out.fallback = true;
        // Bridge smaller components onto the already-aligned set through any
        // co-observed positions; without evidence the component stays as-is.
        std::vector<int> aligned;
        for (int v = 0; v < m; ++v)
            if (sync.component[v] == 0) aligned.push_back(v);
        for (int c = 1; c < sync.component_count; ++c) {
            std::vector<int> nodes;
            for (int v = 0; v < m; ++v)
                if (sync.component[v] == c) nodes.push_back(v);

            std::optional<PermutationMap> bridge;
            for (int u : aligned) {
                for (int v : nodes) {
                    if (has_coobservation(out.estimates.members[u].labels,
                                          out.estimates.members[v].labels)) {
                        bridge = align_labels(out.estimates.members[u].labels,
                                              out.estimates.members[v].labels, d);
                        break;
                    }
                }
                if (bridge) break;
            }
            if (bridge) {
                for (int v : nodes) {
                    out.estimates.members[v].labels =
                        relabel(out.estimates.members[v].labels, *bridge);
                    out.applied[v] = bridge->compose(out.applied[v]);
                }
            }
            aligned.insert(aligned.end(), nodes.begin(), nodes.end());
        }
    }
    return out;
}

TotalSegmentation fuse_mode(const EstimateSet& aligned, int d, ZeroPolicy policy) {
    if (aligned.members.empty())
        throw std::invalid_argument("fuse_mode: empty estimate set");
    const std::size_t p = aligned.members.front().labels.size();
    TotalSegmentation seg{aligned.image, std::vector<Label>(p, kOutlier)};

    std::vector<int> votes(static_cast<std::size_t>(d) + 1, 0);
    for (std::size_t r = 0; r < p; ++r) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const auto& member : aligned.members) {
            const Label l = member.labels[r];
            if (l == kMissing) continue;
            if (l == kOutlier && policy == ZeroPolicy::ignore_zeros) continue;
            ++votes[l];
        }
        Label best = kOutlier;
        int best_count = 0;
        const Label first = policy == ZeroPolicy::keep_zeros ? 0 : 1;
        for (Label l = first; l <= d; ++l) {
            if (votes[l] > best_count) {
                best_count = votes[l];
                best = l;
            }
        }
        seg.labels[r] = best_count > 0 ? best : kOutlier;
    }
    return seg;
}

TotalSegmentation segment_image(const Dataset& dataset, int image, ZeroPolicy policy) {
    return fuse_mode(align_estimate_set(estimates_for_image(dataset, image), dataset.d).estimates,
                     dataset.d, policy);
}

std::optional<PermutationMap> global_pair_permutation(const Dataset& dataset,
                                                      const TotalSegmentation& s_i,
                                                      const TotalSegmentation& s_j,
                                                      ImagePair pair, int d) {
    auto [est_i, est_j] = restrict_partial(dataset, pair);
    if (!has_motion_coobservation(s_i.labels, est_i.labels) ||
        !has_motion_coobservation(est_j.labels, s_j.labels))
        return std::nullopt;
    const PermutationMap local_to_i = align_labels(s_i.labels, est_i.labels, d);
    const PermutationMap j_to_local = align_labels(est_j.labels, s_j.labels, d);
    return local_to_i.compose(j_to_local);
}

double RunReport::classified_fraction_overall(const std::vector<int>& point_counts) const {
    double classified = 0.0;
    long long total = 0;
    for (const auto& img : images) {
        classified += img.classified_fraction * point_counts[img.image];
        total += point_counts[img.image];
    }
    return total == 0 ? 0.0 : classified / static_cast<double>(total);
}

SegmentationResult segment_all(const Dataset& dataset, ZeroPolicy policy, int threads) {
    const ValidationReport validation = validate_dataset(dataset);
    if (!validation.ok())
        throw std::invalid_argument("invalid dataset: " + validation.violations.front());

    const int n = dataset.n;
    const int d = dataset.d;
    SegmentationResult result;
    result.segmentations.resize(n);
    result.report.images.resize(n);

    std::mutex flag_mutex;
    parallel_for(n, threads, [&](int i) {
        AlignedEstimates aligned = align_estimate_set(estimates_for_image(dataset, i), d);
        result.segmentations[i] = fuse_mode(aligned.estimates, d, policy);
        result.report.images[i] = {i, 0.0, aligned.fallback};
        if (aligned.dense_fallback) {
            std::lock_guard lock(flag_mutex);
            result.report.dense_fallback = true;
        }
    });

    // Cross-image synchronization over the segmented pairs.
    std::vector<SyncEdge> edges;
    for (const auto& partial : dataset.partials) {
        const auto perm = global_pair_permutation(dataset, result.segmentations[partial.pair.i],
                                                  result.segmentations[partial.pair.j],
                                                  partial.pair, d);
        if (perm)
            edges.push_back({partial.pair.i, partial.pair.j, *perm});
        else
            ++result.report.omitted_edges;
    }
    result.report.sync_edges = static_cast<int>(edges.size());

    ComponentSync sync = synchronize_components(n, d, edges);
    result.report.dense_fallback = result.report.dense_fallback || sync.dense_fallback;

    if (sync.component_count > 1) {
        result.report.global_fallback = true;
        // Bridge components through segmented pairs whose evidence was too
        // weak for a sync edge; degenerate chain links align as identity.
        std::vector<char> is_aligned(n, 0);
        for (int v = 0; v < n; ++v) is_aligned[v] = sync.component[v] == 0;
        for (int c = 1; c < sync.component_count; ++c) {
            std::optional<PermutationMap> bridge;
            std::vector<int> nodes;
            for (int v = 0; v < n; ++v)
                if (sync.component[v] == c) nodes.push_back(v);
            for (const auto& partial : dataset.partials) {
                const int i = partial.pair.i;
                const int j = partial.pair.j;
                const bool forward = is_aligned[i] && sync.component[j] == c;
                const bool backward = is_aligned[j] && sync.component[i] == c;
                if (!forward && !backward) continue;
                auto [est_i, est_j] = restrict_partial(dataset, partial.pair);
                const std::vector<Label> ri =
                    relabel(result.segmentations[i].labels, sync.relabeling[i]);
                const std::vector<Label> rj =
                    relabel(result.segmentations[j].labels, sync.relabeling[j]);
                const PermutationMap local_to_i = align_labels(ri, est_i.labels, d);
                const PermutationMap j_to_local = align_labels(est_j.labels, rj, d);
                const PermutationMap j_to_i = local_to_i.compose(j_to_local);
                bridge = forward ? j_to_i : j_to_i.inverse();
                break;
            }
            if (bridge) {
                for (int v : nodes) sync.relabeling[v] = bridge->compose(sync.relabeling[v]);
            }
            for (int v : nodes) is_aligned[v] = 1;
        }
    }

    // Residual: edges whose relative permutation the recovered absolute
    // permutations fail to reproduce.
    for (const auto& edge : edges) {
        const PermutationMap reproduced =
            sync.relabeling[edge.h].inverse().compose(sync.relabeling[edge.k]);
        if (!(reproduced == edge.rel)) ++result.report.sync_residual;
    }

    for (int i = 0; i < n; ++i) {
        result.segmentations[i].labels =
            relabel(result.segmentations[i].labels, sync.relabeling[i]);
        const auto& labels = result.segmentations[i].labels;
        const auto classified =
            std::count_if(labels.begin(), labels.end(), [](Label l) { return is_motion(l); });
        result.report.images[i].classified_fraction =
            labels.empty() ? 0.0
                           : static_cast<double>(classified) / static_cast<double>(labels.size());
    }
    return result;
}

}  // namespace moseg
