#pragma once

#include <span>
#include <vector>

#include "tnt/dense_tensor.hpp"
#include "tnt/tensor.hpp"

namespace tnt {

// Compressed-domain algebra. Nothing here rounds implicitly: ranks grow as
// the block constructions dictate and callers truncate with round().
//
// Binary operations broadcast size-1 modes and missing leading modes. An
// unbatched operand is replicated across the batch of a batched one.

/// Element-wise sum. Internal ranks add.
TnTensor add(const TnTensor& a, const TnTensor& b);
TnTensor subtract(const TnTensor& a, const TnTensor& b);

/// Element-wise product. Internal ranks multiply; CP times CP stays CP.
TnTensor hadamard(const TnTensor& a, const TnTensor& b);

/// Multiplies the first node by c.
TnTensor scale(const TnTensor& t, double c);
TnTensor negate(const TnTensor& t);
TnTensor add_scalar(const TnTensor& t, double c);

double dot(const TnTensor& a, const TnTensor& b);
std::vector<double> batched_dot(const TnTensor& a, const TnTensor& b);

/// Mode-k product with a matrix of shape (S, J_k). A Tucker factor F on mode
/// k is replaced by M*F; otherwise M is contracted into the core.
TnTensor ttm(const TnTensor& t, const DenseTensor& matrix, Index mode);

/// Contracts a vector into mode k; the mode disappears. The leftover rank
/// matrix goes into the left neighbour (the right one for mode 0). A
/// one-mode tensor contracts to a scalar.
TensorOrDense ttv(const TnTensor& t, std::span<const double> v, Index mode);

/// Sums over the listed modes (highest first).
TensorOrDense sum(const TnTensor& t, std::vector<Index> modes);
/// Sum of all entries.
double sum(const TnTensor& t);
double mean(const TnTensor& t);

/// Concatenation along mode k.
TnTensor concat(const TnTensor& a, const TnTensor& b, Index mode);

/// Mode reordering: result mode p is input mode perm[p]. Realized by adjacent
/// core swaps, each re-split with a truncated SVD; the total relative error is
/// bounded by eps.
TnTensor transpose(const TnTensor& t, std::span<const Index> perm, double eps = 1e-14);

/// Zero padding along one mode. Ranks are unchanged.
TnTensor pad(const TnTensor& t, Index mode, Index before, Index after);

enum class ConvPadding { valid, same };

/// Matrix applying 1-D correlation (no kernel flip) to a length-`size` signal.
/// valid: size-L+1 outputs; same: `size` outputs with (L-1)/2 zeros padded on
/// the left and the remainder on the right.
DenseTensor correlation_matrix(std::span<const double> kernel, Index size, ConvPadding padding);

/// 1-D correlation along mode k: ttm with correlation_matrix().
TnTensor conv_mode(const TnTensor& t, std::span<const double> kernel, Index mode, ConvPadding padding);

inline TnTensor operator+(const TnTensor& a, const TnTensor& b) { return add(a, b); }
inline TnTensor operator-(const TnTensor& a, const TnTensor& b) { return subtract(a, b); }
inline TnTensor operator-(const TnTensor& t) { return negate(t); }
inline TnTensor operator*(const TnTensor& a, const TnTensor& b) { return hadamard(a, b); }
inline TnTensor operator*(double c, const TnTensor& t) { return scale(t, c); }
inline TnTensor operator*(const TnTensor& t, double c) { return scale(t, c); }
inline TnTensor operator+(const TnTensor& t, double c) { return add_scalar(t, c); }

}  // namespace tnt
