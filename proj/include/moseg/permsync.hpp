#pragma once

#include <Eigen/Dense>
#include <vector>

#include "moseg/assignment.hpp"

namespace moseg {

/// Relative measurement on an edge of the synchronization graph:
/// rel ≈ P_h ∘ P_k⁻¹ for the unknown absolute permutations.
struct SyncEdge {
    int h = 0;
    int k = 0;
    PermutationMap rel;
};

/// Permutation synchronization instance over `node_count` nodes with at most
/// one edge per unordered pair; the reverse direction is implied as the
/// inverse. The edge graph must be connected.
struct SyncProblem {
    int node_count = 0;
    int d = 0;
    std::vector<SyncEdge> edges;
};

/// Symmetric (N·d)×(N·d) matrix with identity diagonal blocks, the matrix
/// form of each edge permutation as block (h,k), its transpose as block
/// (k,h), and zero blocks for absent edges. Throws on duplicate edges or a
/// disconnected graph.
Eigen::MatrixXd build_block_matrix(const SyncProblem& problem);

struct EigenPairs {
    Eigen::MatrixXd vectors;  // orthonormal columns, leading subspace
    Eigen::VectorXd values;   // Ritz values, descending
    bool dense_fallback = false;
    int iterations = 0;
};

/// Leading `count` eigenpairs of a symmetric matrix by subspace iteration.
/// Each returned column v with Ritz value λ satisfies ‖A v − λ v‖ ≤ tol·‖A‖.
/// When the iteration budget (default 10·rows) runs out, a dense
/// eigendecomposition takes over and the result is flagged.
EigenPairs top_eigenvectors(const Eigen::MatrixXd& sym, int count, double tol = 1e-9,
                            int max_iterations = -1);

struct SyncResult {
    std::vector<PermutationMap> absolute;  // P_k per node, P_0 = identity
    bool dense_fallback = false;
};

/// Recovers absolute permutations from the relative edge measurements via the
/// spectral method: leading-eigenvector blocks B_k are compared against the
/// anchor block (lowest-index node) and projected to the nearest permutation
/// by linear assignment. On edge-consistent input the output satisfies
/// rel = P_h ∘ P_k⁻¹ exactly on every edge.
SyncResult synchronize(const SyncProblem& problem);

}  // namespace moseg
