#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tnt/dense_tensor.hpp"
#include "tnt/tensor.hpp"

namespace tnt {

struct MaxvolResult {
    /// Selected row indices, one per column of A.
    std::vector<Index> rows;
    /// n x r matrix A * A[rows]^-1.
    DenseTensor coeffs;
    Index swaps = 0;
    /// |det A[rows]| after initialization and after every swap.
    std::vector<double> abs_det_history;
};

/// Greedy maximum-volume row selection. Starts from a row-pivoted LU and swaps
/// rows until max|coeffs| <= 1 + delta (at most 2n swaps).
/// Throws StructuralError if A (n x r, n >= r) is rank deficient.
MaxvolResult maxvol(const DenseTensor& a, double delta = 0.05);

struct CrossConfig {
    double target_eps = 1e-6;
    Index max_iters = 10;
    Index initial_rank = 1;
    Index rank_increment = 2;
    Index validation_size = 100;
    std::uint64_t seed = 0;
    double delta = 0.05;
    /// 0 leaves ranks bounded only by the mode sizes.
    Index max_rank = 0;
    /// Keep sweeping after the validation target is met (until max_iters or
    /// until every rank reaches its feasible maximum).
    bool exhaustive = false;

    void validate() const;
};

struct EvalLog {
    Index total_evaluations = 0;
    std::vector<Index> best_index;
    double best_value = 0.0;
    double validation_error = 0.0;
    Index sweeps = 0;
};

using BlackBox = std::function<double(std::span<const Index>)>;

struct CrossResult {
    TnTensor tensor;
    EvalLog log;
};

/// TT cross-approximation of a black-box function on a grid. f must be
/// deterministic; a throwing or non-finite evaluation raises EvaluationError.
CrossResult cross_approximate(const BlackBox& f, const Shape& shape, const CrossConfig& cfg);

/// g applied entry-wise, learned by cross-approximation. Batch elements are
/// approximated one at a time and rank-padded to a common profile.
TnTensor elementwise(const TnTensor& t, const std::function<double(double)>& g, const CrossConfig& cfg);

enum class Sense { min, max };

struct ArgoptResult {
    std::vector<Index> best_index;
    double best_value = 0.0;
    EvalLog log;
};

/// Best sample seen while cross-approximating f. This is an incumbent tracker,
/// not a certified global optimizer.
ArgoptResult discrete_argopt(const BlackBox& f, const Shape& shape, const CrossConfig& cfg, Sense sense);

}  // namespace tnt
