#include "moseg/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace moseg {

PermutationMap::PermutationMap(std::vector<Label> target) : target_(std::move(target)) {
    std::vector<bool> hit(target_.size(), false);
    for (Label l : target_) {
        if (l < 1 || l > target_.size() || hit[l - 1])
            throw std::invalid_argument("permutation target is not a bijection on {1..d}");
        hit[l - 1] = true;
    }
}

PermutationMap PermutationMap::identity(int d) {
    std::vector<Label> target(d);
    std::iota(target.begin(), target.end(), Label{1});
    return PermutationMap(std::move(target));
}

PermutationMap PermutationMap::compose(const PermutationMap& other) const {
    if (degree() != other.degree())
        throw std::invalid_argument("composing permutations of different degree");
    std::vector<Label> target(target_.size());
    for (std::size_t a = 0; a < target_.size(); ++a) target[a] = apply(other.target_[a]);
    return PermutationMap(std::move(target));
}

PermutationMap PermutationMap::inverse() const {
    std::vector<Label> target(target_.size());
    for (std::size_t a = 0; a < target_.size(); ++a)
        target[target_[a] - 1] = static_cast<Label>(a + 1);
    return PermutationMap(std::move(target));
}

bool PermutationMap::is_identity() const {
    for (std::size_t a = 0; a < target_.size(); ++a)
        if (target_[a] != a + 1) return false;
    return true;
}

Eigen::MatrixXd PermutationMap::to_matrix() const {
    const int d = degree();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (int a = 0; a < d; ++a) m(target_[a] - 1, a) = 1.0;
    return m;
}

AgreementMatrix agreement_matrix(std::span<const Label> a, std::span<const Label> b, int d) {
    if (a.size() != b.size())
        throw std::invalid_argument("agreement_matrix: length mismatch (" +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                                    ")");
    AgreementMatrix counts = AgreementMatrix::Zero(d, d);
    for (std::size_t r = 0; r < a.size(); ++r)
        if (is_motion(a[r]) && is_motion(b[r])) counts(a[r] - 1, b[r] - 1) += 1;
    return counts;
}

namespace {

/// Shortest-augmenting-path minimum-cost assignment with potentials.
/// Returns assignment[row] = column and the optimal total cost.
std::pair<std::vector<int>, double> min_cost_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    constexpr double kInf = std::numeric_limits<double>::infinity();

    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);  // match[col] = row, 1-based

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = match[j0];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> assignment(n, -1);
    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        assignment[match[j] - 1] = j - 1;
        total += cost(match[j] - 1, j - 1);
    }
    return {std::move(assignment), total};
}

/// Maximum total weight over permutations matching `rows` to `cols`
/// (index subsets of `weights`).
double max_weight_on(const Eigen::MatrixXd& weights, const std::vector<int>& rows,
                     const std::vector<int>& cols) {
    const int n = static_cast<int>(rows.size());
    if (n == 0) return 0.0;
    Eigen::MatrixXd cost(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) cost(r, c) = -weights(rows[r], cols[c]);
    return -min_cost_assignment(cost).second;
}

}  // namespace

PermutationMap solve_assignment(const Eigen::MatrixXd& weights) {
    if (weights.rows() != weights.cols())
        throw std::invalid_argument("solve_assignment: matrix is not square");
    if (!weights.allFinite())
        throw std::invalid_argument("solve_assignment: non-finite weight");

    const int d = static_cast<int>(weights.rows());
    if (d == 0) return PermutationMap::identity(0);

    std::vector<int> all_rows(d), all_cols(d);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    std::iota(all_cols.begin(), all_cols.end(), 0);
    const double best_total = max_weight_on(weights, all_rows, all_cols);
    const double tol = 1e-9 * std::max(1.0, std::abs(best_total));

    // Fix π(1), π(2), … greedily to the smallest column that still admits an
    // optimal completion; this realizes the lexicographic tie-break.
    std::vector<Label> target(d, 0);
    std::vector<int> free_cols = all_cols;
    double fixed_weight = 0.0;
    for (int r = 0; r < d; ++r) {
        std::vector<int> rest_rows(all_rows.begin() + r + 1, all_rows.end());
        for (std::size_t ci = 0; ci < free_cols.size(); ++ci) {
            const int c = free_cols[ci];
            std::vector<int> rest_cols = free_cols;
            rest_cols.erase(rest_cols.begin() + static_cast<long>(ci));
            const double achievable =
                fixed_weight + weights(r, c) + max_weight_on(weights, rest_rows, rest_cols);
            if (achievable >= best_total - tol) {
                target[r] = static_cast<Label>(c + 1);
                fixed_weight += weights(r, c);
                free_cols = std::move(rest_cols);
                break;
            }
        }
    }
    return PermutationMap(std::move(target));
}

double assignment_weight(const Eigen::MatrixXd& weights, const PermutationMap& perm) {
    double total = 0.0;
    for (int a = 1; a <= perm.degree(); ++a)
        total += weights(a - 1, perm.apply(static_cast<Label>(a)) - 1);
    return total;
}

PermutationMap align_labels(std::span<const Label> target, std::span<const Label> source, int d) {
    return solve_assignment(agreement_matrix(source, target, d).cast<double>());
}

std::vector<Label> relabel(std::span<const Label> labels, const PermutationMap& perm) {
    std::vector<Label> out(labels.size());
    for (std::size_t r = 0; r < labels.size(); ++r) out[r] = perm.apply(labels[r]);
    return out;
}

}  // namespace moseg
