#pragma once

#include <cstdint>
#include <random>

#include "tnt/dense_tensor.hpp"
#include "tnt/tensor.hpp"

namespace tnt {

using Rng = std::mt19937_64;

/// Default seed, overridable through the TNTZ_SEED environment variable.
std::uint64_t default_seed();

DenseTensor random_dense(const Shape& shape, Rng& rng);

/// TT with standard normal cores, scaled by 1/sqrt(rank) to keep entries O(1).
/// `ranks` lists the N-1 internal ranks.
TnTensor random_tt(const Shape& shape, const std::vector<Index>& ranks, Rng& rng);
TnTensor random_tt(const Shape& shape, Index rank, Rng& rng);

/// B independent random TTs with a common rank profile.
TnTensor random_tt_batched(Index batch, const Shape& shape, Index rank, Rng& rng);

TnTensor random_cp(const Shape& shape, Index rank, Rng& rng);

/// Rank-1 tensor with every entry equal to `value`.
TnTensor constant(const Shape& shape, double value);
TnTensor zeros(const Shape& shape);
TnTensor ones(const Shape& shape);

/// Rank-1 TT built from one vector per mode.
TnTensor outer(const std::vector<std::vector<double>>& vectors);

}  // namespace tnt
