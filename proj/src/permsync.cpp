#include "moseg/permsync.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace moseg {

Eigen::MatrixXd build_block_matrix(const SyncProblem& problem) {
    const int n = problem.node_count;
    const int d = problem.d;

    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(static_cast<long>(n) * d,
                                                  static_cast<long>(n) * d);
    for (int i = 0; i < n; ++i) block.block(i * d, i * d, d, d).setIdentity();

    std::unordered_set<long long> seen;
    for (const auto& edge : problem.edges) {
        if (edge.h == edge.k || edge.h < 0 || edge.k < 0 || edge.h >= n || edge.k >= n)
            throw std::invalid_argument("sync edge endpoints out of range");
        if (edge.rel.degree() != d)
            throw std::invalid_argument("sync edge permutation degree mismatch");
        const long long key = static_cast<long long>(std::min(edge.h, edge.k)) * n +
                              std::max(edge.h, edge.k);
        if (!seen.insert(key).second)
            throw std::invalid_argument("duplicate sync edge");

        const Eigen::MatrixXd rel = edge.rel.to_matrix();
        block.block(edge.h * d, edge.k * d, d, d) = rel;
        block.block(edge.k * d, edge.h * d, d, d) = rel.transpose();
        parent[find(edge.h)] = find(edge.k);
    }

    for (int i = 1; i < n; ++i)
        if (find(i) != find(0)) throw std::invalid_argument("sync graph disconnected");

    return block;
}

EigenPairs top_eigenvectors(const Eigen::MatrixXd& sym, int count, double tol,
                            int max_iterations) {
    const long n = sym.rows();
    if (sym.cols() != n) throw std::invalid_argument("top_eigenvectors: matrix not square");
    if (count < 1 || count > n) throw std::invalid_argument("top_eigenvectors: bad count");
    if (max_iterations < 0) max_iterations = static_cast<int>(10 * n);

    // Fixed-seed start keeps runs reproducible.
    std::mt19937_64 rng(0x5eedULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd basis(n, count);
    for (long r = 0; r < n; ++r)
        for (int c = 0; c < count; ++c) basis(r, c) = gauss(rng);
    basis = Eigen::HouseholderQR<Eigen::MatrixXd>(basis).householderQ() *
            Eigen::MatrixXd::Identity(n, count);

    EigenPairs out;
    Eigen::VectorXd ritz = Eigen::VectorXd::Zero(count);
    for (int iter = 1; iter <= max_iterations; ++iter) {
        Eigen::MatrixXd image = sym * basis;
        basis = Eigen::HouseholderQR<Eigen::MatrixXd>(image).householderQ() *
                Eigen::MatrixXd::Identity(n, count);

        // Rayleigh-Ritz on the current subspace.
        const Eigen::MatrixXd small = basis.transpose() * sym * basis;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small_eig(small);
        // Reorder ascending -> descending.
        Eigen::MatrixXd rotation(count, count);
        for (int c = 0; c < count; ++c) {
            ritz(c) = small_eig.eigenvalues()(count - 1 - c);
            rotation.col(c) = small_eig.eigenvectors().col(count - 1 - c);
        }
        basis = basis * rotation;

        // The block matrices here are elementwise non-negative, so the top
        // Ritz value is a sound estimate of the spectral norm.
        const double norm_estimate = std::max(ritz.cwiseAbs().maxCoeff(), 1e-300);
        double worst = 0.0;
        for (int c = 0; c < count; ++c) {
            const double res = (sym * basis.col(c) - ritz(c) * basis.col(c)).norm();
            worst = std::max(worst, res);
        }
        if (worst <= tol * norm_estimate) {
            out.vectors = std::move(basis);
            out.values = ritz;
            out.iterations = iter;
            return out;
        }
    }

    // Budget exhausted (clustered eigenvalues); a dense solve always succeeds
    // at these sizes.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(sym);
    if (dense.info() != Eigen::Success)
        throw std::runtime_error("top_eigenvectors: dense eigendecomposition failed");
    out.vectors.resize(n, count);
    out.values.resize(count);
    for (int c = 0; c < count; ++c) {
        out.values(c) = dense.eigenvalues()(n - 1 - c);
        out.vectors.col(c) = dense.eigenvectors().col(n - 1 - c);
    }
    out.dense_fallback = true;
    out.iterations = max_iterations;
    return out;
}

SyncResult synchronize(const SyncProblem& problem) {
    const int n = problem.node_count;
    const int d = problem.d;
    if (n < 1) throw std::invalid_argument("synchronize: empty problem");

    SyncResult result;
    if (n == 1 || d == 1) {
        result.absolute.assign(n, PermutationMap::identity(d));
        return result;
    }

    const Eigen::MatrixXd block = build_block_matrix(problem);
    const EigenPairs eig = top_eigenvectors(block, d);
    result.dense_fallback = eig.dense_fallback;

    const Eigen::MatrixXd anchor_block = eig.vectors.topRows(d);
    result.absolute.reserve(n);
    for (int k = 0; k < n; ++k) {
        const Eigen::MatrixXd similarity =
            eig.vectors.middleRows(static_cast<long>(k) * d, d) * anchor_block.transpose();
        // similarity ≈ matrix form of the anchored P_k; entry (P_k(a), a) is
        // large, so assign on the transpose to read the map a → P_k(a).
        result.absolute.push_back(solve_assignment(similarity.transpose()));
    }
    return result;
}

}  // namespace moseg
