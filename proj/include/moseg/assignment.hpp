#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "moseg/model.hpp"

namespace moseg {

/// Bijection on the motion labels {1..d}. Outlier (0) and kMissing are fixed
/// points under apply(). Immutable after construction.
class PermutationMap {
public:
    PermutationMap() = default;

    /// target[a-1] = image of motion label a. Throws if not a bijection.
    explicit PermutationMap(std::vector<Label> target);

    static PermutationMap identity(int d);

    int degree() const { return static_cast<int>(target_.size()); }

    Label apply(Label l) const { return is_motion(l) ? target_[l - 1] : l; }

    /// (this ∘ other): other is applied first.
    PermutationMap compose(const PermutationMap& other) const;

    PermutationMap inverse() const;

    bool is_identity() const;

    /// Matrix M with M(apply(a)-1, a-1) = 1, so M * e_a = e_{apply(a)} and
    /// matrices compose like the permutations they represent.
    Eigen::MatrixXd to_matrix() const;

    friend bool operator==(const PermutationMap&, const PermutationMap&) = default;

private:
    std::vector<Label> target_;
};

/// d×d co-occurrence counts: entry (a-1, b-1) is the number of positions
/// where `a` carries Motion(a) and `b` carries Motion(b). Positions with an
/// outlier or missing label on either side contribute nothing.
using AgreementMatrix = Eigen::MatrixXi;

AgreementMatrix agreement_matrix(std::span<const Label> a, std::span<const Label> b, int d);

/// Linear assignment: the permutation π maximizing Σ_a weights(a-1, π(a)-1).
/// Ties are broken toward the lexicographically smallest sequence
/// π(1),…,π(d). Throws on non-square or non-finite input.
PermutationMap solve_assignment(const Eigen::MatrixXd& weights);

double assignment_weight(const Eigen::MatrixXd& weights, const PermutationMap& perm);

/// The permutation π such that relabeling `source` by π best agrees with
/// `target` positionwise over co-observed motion labels. All-zero agreement
/// yields the identity.
PermutationMap align_labels(std::span<const Label> target, std::span<const Label> source, int d);

inline PermutationMap align_labels(const std::vector<Label>& target,
                                   const std::vector<Label>& source, int d) {
    return align_labels(std::span<const Label>(target), std::span<const Label>(source), d);
}

/// Relabels a vector through a permutation (outliers and missing untouched).
std::vector<Label> relabel(std::span<const Label> labels, const PermutationMap& perm);

}  // namespace moseg
