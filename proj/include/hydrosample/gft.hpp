#ifndef HYDROSAMPLE_GFT_HPP
#define HYDROSAMPLE_GFT_HPP

#include <Eigen/Dense>

#include <vector>

namespace hydrosample {

/// Data-driven graph Fourier operator built from the QR factorization of a
/// node-by-time data matrix. `f_inv` maps node signals into a domain where
/// the training data occupies only the first `rank` rows (the band support).
struct GftOperator {
    Eigen::MatrixXd f_inv;    // N x N, inverse of the completed orthonormal basis
    Eigen::MatrixXd q;        // N x r, orthonormal columns spanning the data
    Eigen::MatrixXd r_factor; // r x r, upper triangular
    int rank = 0;
    std::vector<int> band_support;  // row indices of nonzero response; {0..r-1}
    std::vector<int> pivot_columns; // maximally independent columns of X, ascending
    double rank_tol = 0.0;

    int n_nodes() const { return static_cast<int>(f_inv.rows()); }
    /// F restricted to the band columns: the N x r synthesis basis (equals q).
    const Eigen::MatrixXd& basis() const { return q; }
};

/// Ordered node subset sufficient for exact band-limited recovery.
/// `scores[k]` is the smallest singular value of the sampled basis after the
/// k-th node was added; scores are non-increasing (descending importance).
struct SamplingSet {
    std::vector<int> nodes;
    std::vector<double> scores;
};

enum class SelectionStrategy { greedy, exhaustive };

/// Builds the GFT operator: column-pivoted QR picks independent columns of X
/// until the next pivot falls below rank_tol relative to the first, then the
/// orthonormal basis of those columns is completed to an invertible N x N map.
GftOperator build_gft_operator(const Eigen::MatrixXd& x, double rank_tol = 1e-10);

/// Picks `rank` nodes maximizing the smallest singular value of the sampled
/// basis rows. Greedy adds one node per step (ties to the lowest index);
/// exhaustive scans every size-r subset and is restricted to C(N,r) <= 1e6.
SamplingSet select_sampling_set(const GftOperator& op, SelectionStrategy strategy);

/// Recovery output; `ill_conditioned` flags normal-equation condition
/// estimates above 1e12 (the estimate itself is in `condition`).
struct RecoveryResult {
    Eigen::MatrixXd x_hat;
    double condition = 0.0;
    bool ill_conditioned = false;
};

/// Reconstructs the full N x K signal from rows sampled at s.nodes:
/// x_hat = F_VR (F_SR^T F_SR)^-1 F_SR^T samples. Exact whenever the sampled
/// signal is band-limited to the operator.
RecoveryResult recover(const GftOperator& op, const SamplingSet& s,
                       const Eigen::MatrixXd& samples);

} // namespace hydrosample

#endif
