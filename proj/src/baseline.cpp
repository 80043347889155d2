#include "moseg/baseline.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "moseg/assignment.hpp"

namespace moseg {

int inlier_count(const PartialSegmentation& partial) {
    return static_cast<int>(
        std::count_if(partial.labels.begin(), partial.labels.end(),
                      [](Label l) { return is_motion(l); }));
}

PairTree max_spanning_tree(const Dataset& dataset) {
    struct Candidate {
        ImagePair pair;
        int weight;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(dataset.partials.size());
    for (const auto& partial : dataset.partials)
        candidates.push_back({partial.pair, inlier_count(partial)});
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.pair < b.pair;
    });

    std::vector<int> parent(dataset.n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    PairTree tree;
    for (const auto& c : candidates) {
        const int a = find(c.pair.i);
        const int b = find(c.pair.j);
        if (a == b) continue;
        parent[a] = b;
        tree.edges.push_back(c.pair);
        tree.total_weight += c.weight;
    }
    if (static_cast<int>(tree.edges.size()) != dataset.n - 1)
        throw std::invalid_argument("max_spanning_tree: pair graph disconnected");
    return tree;
}

std::vector<TotalSegmentation> propagate_baseline(const Dataset& dataset, const PairTree& tree) {
    const int n = dataset.n;
    const int d = dataset.d;

    std::vector<std::vector<int>> adjacent(n);
    for (const auto& edge : tree.edges) {
        adjacent[edge.i].push_back(edge.j);
        adjacent[edge.j].push_back(edge.i);
    }
    for (auto& list : adjacent) std::sort(list.begin(), list.end());

    auto estimate = [&](int image, int partner) {
        const ImagePair pair{std::min(image, partner), std::max(image, partner)};
        auto [left, right] = restrict_partial(dataset, pair);
        return image == pair.i ? std::move(left) : std::move(right);
    };
    auto edge_weight = [&](int image, int partner) {
        const ImagePair pair{std::min(image, partner), std::max(image, partner)};
        return inlier_count(*dataset.find_partial(pair));
    };

    std::vector<TotalSegmentation> out(n);
    const int root = 0;

    // Root takes its heaviest incident tree edge (ties: lowest partner).
    int root_partner = adjacent[root].front();
    for (int partner : adjacent[root])
        if (edge_weight(root, partner) > edge_weight(root, root_partner)) root_partner = partner;
    out[root].image = root;
    out[root].labels = estimate(root, root_partner).labels;
    for (Label& l : out[root].labels)
        if (l == kMissing) l = kOutlier;

    std::vector<char> visited(n, 0);
    visited[root] = 1;
    std::queue<int> frontier;
    frontier.push(root);
    while (!frontier.empty()) {
        const int i = frontier.front();
        frontier.pop();
        for (int j : adjacent[i]) {
            if (visited[j]) continue;
            visited[j] = 1;

            const ImagePair pair{std::min(i, j), std::max(i, j)};
            auto [left, right] = restrict_partial(dataset, pair);
            const EstimateVector& through_parent = i == pair.i ? left : right;
            const EstimateVector& through_child = i == pair.i ? right : left;

            // Map the pair's local numbering into the parent's, then read the
            // child's labels through it.
            const PermutationMap local_to_parent =
                align_labels(out[i].labels, through_parent.labels, d);
            out[j].image = j;
            out[j].labels = relabel(through_child.labels, local_to_parent);
            for (Label& l : out[j].labels)
                if (l == kMissing) l = kOutlier;

            frontier.push(j);
        }
    }
    return out;
}

}  // namespace moseg
