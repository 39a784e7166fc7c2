#include "hydrosample/gft.hpp"
#include "hydrosample/errors.hpp"
#include "hydrosample/numeric.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace hydrosample {

namespace {

double sigma_min(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues().tail(1)(0);
}

Eigen::MatrixXd pick_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    }
    return out;
}

/// Orders the nodes of a fixed set by repeated sigma_min-maximizing
/// insertion, so importance scores are defined for exhaustive results too.
SamplingSet rank_within_set(const Eigen::MatrixXd& basis, std::vector<int> pool) {
    SamplingSet out;
    std::vector<int> chosen;
    while (!pool.empty()) {
        int best_pos = -1;
        double best_sigma = -1.0;
        for (std::size_t cand = 0; cand < pool.size(); ++cand) {
            std::vector<int> trial = chosen;
            trial.push_back(pool[cand]);
            const double s = sigma_min(pick_rows(basis, trial));
            if (s > best_sigma) {
                best_sigma = s;
                best_pos = static_cast<int>(cand);
            }
        }
        chosen.push_back(pool[static_cast<std::size_t>(best_pos)]);
        out.scores.push_back(best_sigma);
        pool.erase(pool.begin() + best_pos);
    }
    out.nodes = std::move(chosen);
    return out;
}

} // namespace

GftOperator build_gft_operator(const Eigen::MatrixXd& x, double rank_tol) {
    if (x.size() == 0) throw ValidationError("gft: data matrix is empty");
    if (!x.allFinite()) throw ValidationError("gft: data matrix has non-finite entries");
    if (!(rank_tol > 0.0 && rank_tol < 1.0)) {
        throw ValidationError("gft: rank_tol must be in (0,1)");
    }

    const Eigen::Index n = x.rows();
    const Eigen::Index k = x.cols();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> cpqr(x);
    const Eigen::MatrixXd r_full = cpqr.matrixR();
    const double lead = std::abs(r_full(0, 0));
    if (lead == 0.0) throw ValidationError("gft: data matrix is all zero (rank 0)");

    Eigen::Index rank = 0;
    const Eigen::Index diag_len = std::min(n, k);
    while (rank < diag_len && std::abs(r_full(rank, rank)) >= rank_tol * lead) ++rank;

    std::vector<int> pivots(static_cast<std::size_t>(rank));
    const auto& perm = cpqr.colsPermutation().indices();
    for (Eigen::Index i = 0; i < rank; ++i) {
        pivots[static_cast<std::size_t>(i)] = static_cast<int>(perm(i));
    }
    std::sort(pivots.begin(), pivots.end());

    Eigen::MatrixXd x_vm(n, rank);
    for (Eigen::Index i = 0; i < rank; ++i) {
        x_vm.col(i) = x.col(pivots[static_cast<std::size_t>(i)]);
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x_vm);
    const Eigen::MatrixXd q_full = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);

    GftOperator op;
    op.rank = static_cast<int>(rank);
    op.rank_tol = rank_tol;
    op.pivot_columns = std::move(pivots);
    op.q = q_full.leftCols(rank);
    op.r_factor = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
    op.f_inv = q_full.transpose();
    op.band_support.resize(static_cast<std::size_t>(rank));
    for (int i = 0; i < op.rank; ++i) op.band_support[static_cast<std::size_t>(i)] = i;
    return op;
}

SamplingSet select_sampling_set(const GftOperator& op, SelectionStrategy strategy) {
    const int n = op.n_nodes();
    const int r = op.rank;
    if (r <= 0 || n <= 0) throw ValidationError("gft: operator has no rank");
    const Eigen::MatrixXd& basis = op.q;

    if (strategy == SelectionStrategy::greedy) {
        SamplingSet out;
        std::vector<char> used(static_cast<std::size_t>(n), 0);
        for (int step = 0; step < r; ++step) {
            int best = -1;
            double best_sigma = -1.0;
            std::vector<int> trial = out.nodes;
            trial.push_back(-1);
            for (int v = 0; v < n; ++v) {
                if (used[static_cast<std::size_t>(v)]) continue;
                trial.back() = v;
                const double s = sigma_min(pick_rows(basis, trial));
                if (s > best_sigma) { // strict: ties keep the lowest index
                    best_sigma = s;
                    best = v;
                }
            }
            used[static_cast<std::size_t>(best)] = 1;
            out.nodes.push_back(best);
            out.scores.push_back(best_sigma);
        }
        if (sigma_min(pick_rows(basis, out.nodes)) <= 0.0) {
            throw RuntimeError("gft: greedy selection produced a rank-deficient sampling set");
        }
        return out;
    }

    // Exhaustive: lexicographic scan of all size-r subsets.
    const double count = binomial(n, r);
    if (!(count <= 1e6)) {
        throw ValidationError("gft: exhaustive selection needs C(N,r) <= 1e6, got " +
                              format_double(count));
    }
    std::vector<int> comb(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) comb[static_cast<std::size_t>(i)] = i;
    std::vector<int> best_comb;
    double best_sigma = -1.0;
    while (true) {
        const double s = sigma_min(pick_rows(basis, comb));
        if (s > best_sigma) { // strict: ties keep the lexicographically first subset
            best_sigma = s;
            best_comb = comb;
        }
        int i = r - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - r + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < r; ++j) {
            comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    if (best_sigma <= 0.0) {
        throw RuntimeError("gft: no size-r subset achieves full rank");
    }
    return rank_within_set(basis, best_comb);
}

RecoveryResult recover(const GftOperator& op, const SamplingSet& s,
                       const Eigen::MatrixXd& samples) {
    if (static_cast<int>(s.nodes.size()) != op.rank) {
        throw ValidationError("gft: sampling set size must equal the operator rank");
    }
    if (samples.rows() != static_cast<Eigen::Index>(s.nodes.size())) {
        throw ValidationError("gft: sample row count does not match the sampling set");
    }
    for (int v : s.nodes) {
        if (v < 0 || v >= op.n_nodes()) throw ValidationError("gft: sampling node out of range");
    }

    const Eigen::MatrixXd f_sr = pick_rows(op.q, s.nodes);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(f_sr, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);

    RecoveryResult out;
    // condition of F_SR^T F_SR = (smax/smin)^2
    out.condition = (smin > 0.0) ? (smax / smin) * (smax / smin)
                                 : std::numeric_limits<double>::infinity();
    out.ill_conditioned = !(out.condition <= 1e12);
    // Least-squares solve of F_SR y = samples; identical to the normal
    // equations when F_SR has full rank, and stable when it nearly doesn't.
    const Eigen::MatrixXd y = svd.solve(samples);
    out.x_hat = op.q * y;
    return out;
}

} // namespace hydrosample
