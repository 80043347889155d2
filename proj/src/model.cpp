#include "moseg/model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace moseg {

namespace {

std::string pair_str(ImagePair pair) {
    return "(" + std::to_string(pair.i) + "," + std::to_string(pair.j) + ")";
}

/// Union-find over image indices; used for pair-graph connectivity.
struct DisjointSet {
    std::vector<int> parent;

    explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

const MatchList* Dataset::find_matches(ImagePair pair) const {
    for (const auto& m : matches)
        if (m.pair == pair) return &m;
    return nullptr;
}

const PartialSegmentation* Dataset::find_partial(ImagePair pair) const {
    for (const auto& s : partials)
        if (s.pair == pair) return &s;
    return nullptr;
}

std::vector<int> Dataset::segmented_partners(int image) const {
    std::vector<int> partners;
    for (const auto& s : partials) {
        if (s.pair.i == image) partners.push_back(s.pair.j);
        if (s.pair.j == image) partners.push_back(s.pair.i);
    }
    std::sort(partners.begin(), partners.end());
    return partners;
}

long long Dataset::total_points() const {
    return std::accumulate(p.begin(), p.end(), 0LL);
}

ValidationReport validate_dataset(const Dataset& dataset) {
    ValidationReport report;
    auto flag = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

    if (dataset.n < 2) flag("image count " + std::to_string(dataset.n) + " < 2");
    if (dataset.d < 1) flag("motion count " + std::to_string(dataset.d) + " < 1");
    if (static_cast<int>(dataset.p.size()) != dataset.n)
        flag("point-count list has " + std::to_string(dataset.p.size()) + " entries for n=" +
             std::to_string(dataset.n) + " images");

    auto image_ok = [&](int i) { return i >= 0 && i < dataset.n; };

    std::unordered_set<long long> seen_pairs;
    for (const auto& m : dataset.matches) {
        const auto [i, j] = m.pair;
        if (!image_ok(i) || !image_ok(j) || i >= j) {
            flag("malformed pair " + pair_str(m.pair));
            continue;
        }
        if (!seen_pairs.insert(static_cast<long long>(i) * dataset.n + j).second)
            flag("duplicate match list for pair " + pair_str(m.pair));

        std::unordered_set<int> left, right;
        for (const auto& [a, b] : m.entries) {
            if (a < 0 || a >= dataset.p[i])
                flag("match index " + std::to_string(a) + " out of range in image " +
                     std::to_string(i) + " of pair " + pair_str(m.pair));
            else if (!left.insert(a).second)
                flag("point " + std::to_string(a) + " matched twice on side " + std::to_string(i) +
                     " of pair " + pair_str(m.pair));
            if (b < 0 || b >= dataset.p[j])
                flag("match index " + std::to_string(b) + " out of range in image " +
                     std::to_string(j) + " of pair " + pair_str(m.pair));
            else if (!right.insert(b).second)
                flag("point " + std::to_string(b) + " matched twice on side " + std::to_string(j) +
                     " of pair " + pair_str(m.pair));
        }
    }

    seen_pairs.clear();
    for (const auto& s : dataset.partials) {
        const auto [i, j] = s.pair;
        if (!image_ok(i) || !image_ok(j) || i >= j) {
            flag("malformed pair " + pair_str(s.pair));
            continue;
        }
        if (!seen_pairs.insert(static_cast<long long>(i) * dataset.n + j).second)
            flag("duplicate partial segmentation for pair " + pair_str(s.pair));

        const MatchList* m = dataset.find_matches(s.pair);
        if (m == nullptr)
            flag("partial segmentation without match list for pair " + pair_str(s.pair));
        else if (m->entries.size() != s.labels.size())
            flag("length mismatch " + pair_str(s.pair) + ": " + std::to_string(m->entries.size()) +
                 " matches vs " + std::to_string(s.labels.size()) + " labels");

        for (Label l : s.labels) {
            if (l == kMissing || l > dataset.d) {
                flag("label " + std::to_string(l) + " outside {0.." + std::to_string(dataset.d) +
                     "} in pair " + pair_str(s.pair));
                break;
            }
        }
    }

    // Connectivity of the pair graph. Edges are the segmented pairs; when no
    // segmentation exists yet, the match lists define the graph instead.
    if (dataset.n >= 2) {
        DisjointSet components(dataset.n);
        if (!dataset.partials.empty()) {
            for (const auto& s : dataset.partials)
                if (image_ok(s.pair.i) && image_ok(s.pair.j))
                    components.unite(s.pair.i, s.pair.j);
        } else {
            for (const auto& m : dataset.matches)
                if (image_ok(m.pair.i) && image_ok(m.pair.j))
                    components.unite(m.pair.i, m.pair.j);
        }
        const int root = components.find(0);
        for (int i = 1; i < dataset.n; ++i) {
            if (components.find(i) != root) {
                flag("pair graph disconnected (image " + std::to_string(i) +
                     " unreachable from image 0)");
                break;
            }
        }
    }

    return report;
}

std::pair<EstimateVector, EstimateVector> restrict_partial(const Dataset& dataset,
                                                           ImagePair pair) {
    const MatchList* matches = dataset.find_matches(pair);
    const PartialSegmentation* partial = dataset.find_partial(pair);
    if (matches == nullptr || partial == nullptr)
        throw std::invalid_argument("unknown pair " + pair_str(pair));
    if (matches->entries.size() != partial->labels.size())
        throw std::invalid_argument("match/segmentation length mismatch for pair " +
                                    pair_str(pair));

    EstimateVector left{pair.i, pair.j, std::vector<Label>(dataset.p[pair.i], kMissing)};
    EstimateVector right{pair.j, pair.i, std::vector<Label>(dataset.p[pair.j], kMissing)};
    for (std::size_t t = 0; t < matches->entries.size(); ++t) {
        const auto [a, b] = matches->entries[t];
        left.labels[a] = partial->labels[t];
        right.labels[b] = partial->labels[t];
    }
    return {std::move(left), std::move(right)};
}

}  // namespace moseg
