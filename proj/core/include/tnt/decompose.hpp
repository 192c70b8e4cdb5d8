#pragma once

#include <cstdint>
#include <vector>

#include "tnt/dense_tensor.hpp"
#include "tnt/random.hpp"
#include "tnt/tensor.hpp"

namespace tnt {

/**
 * How aggressively to truncate ranks.
 *
 * In relative mode the result satisfies ||x - approx||_F <= eps * ||x||_F;
 * eps = 0 keeps everything above machine precision. In max-ranks mode every
 * internal edge is capped (a single entry caps all edges) and no error bound
 * is promised.
 */
struct TruncationSpec {
    enum class Mode { relative_eps, max_ranks };

    Mode mode = Mode::relative_eps;
    double eps = 0.0;
    std::vector<Index> max_ranks;

    static TruncationSpec relative(double eps);
    static TruncationSpec ranks(std::vector<Index> caps);
    static TruncationSpec rank(Index cap) { return ranks({cap}); }

    /// Rank cap for internal edge e (between nodes e and e+1); -1 means uncapped.
    Index cap(Index edge) const;
    /// Error budget to use, 0 in max-ranks mode.
    double budget_eps() const { return mode == Mode::relative_eps ? eps : 0.0; }
    void validate() const;
};

/// TT-SVD of a dense tensor.
TnTensor tt_svd(const DenseTensor& x, const TruncationSpec& spec);

/// TT-SVD of every element along the leading (batch) mode; ranks are the
/// per-edge maximum over the batch, smaller elements are zero-padded.
TnTensor tt_svd_batched(const DenseTensor& x, const TruncationSpec& spec);

struct CpAlsOptions {
    Index rank = 1;
    Index max_iters = 100;
    double tol = 1e-10;
    std::uint64_t seed = 0;
    Index max_restarts = 3;
};

struct CpAlsResult {
    TnTensor tensor;
    double relative_error = 0.0;
    /// Relative error after every sweep of the returned run.
    std::vector<double> error_history;
    Index restarts = 0;
    std::uint64_t seed = 0;
};

/// CP decomposition by alternating least squares.
CpAlsResult cp_als(const DenseTensor& x, const CpAlsOptions& options);

/// Truncated higher-order SVD; the Tucker core is stored losslessly as a TT
/// chain with the orthonormal factors attached.
TnTensor tucker_hosvd(const DenseTensor& x, const TruncationSpec& spec);

/// Left-orthogonal cores before `mu`, right-orthogonal after it.
TnTensor orthogonalize(const TnTensor& t, Index mu);

/// TT rounding. Ranks never increase.
TnTensor round(const TnTensor& t, const TruncationSpec& spec);

}  // namespace tnt
