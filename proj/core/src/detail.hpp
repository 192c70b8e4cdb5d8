#pragma once

// Internal helpers shared by the core translation units. Not installed.

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "tnt/dense_tensor.hpp"
#include "tnt/errors.hpp"
#include "tnt/tensor.hpp"

namespace tnt::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using Vector = Eigen::VectorXd;

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ContractViolation(what);
}

/// Unbatched TT core as a flat buffer.
struct Core {
    Index rl = 1;
    Index n = 1;
    Index rr = 1;
    std::vector<double> data;

    Core() : data(1, 0.0) {}
    Core(Index rl_, Index n_, Index rr_) : rl(rl_), n(n_), rr(rr_), data(static_cast<std::size_t>(rl_ * n_ * rr_), 0.0) {}

    double& operator()(Index a, Index i, Index c) { return data[static_cast<std::size_t>((a * n + i) * rr + c)]; }
    double operator()(Index a, Index i, Index c) const { return data[static_cast<std::size_t>((a * n + i) * rr + c)]; }

    /// (rl*n) x rr unfolding.
    RowMap left_unfolding() { return RowMap(data.data(), rl * n, rr); }
    ConstRowMap left_unfolding() const { return ConstRowMap(data.data(), rl * n, rr); }
    /// rl x (n*rr) unfolding.
    RowMap right_unfolding() { return RowMap(data.data(), rl, n * rr); }
    ConstRowMap right_unfolding() const { return ConstRowMap(data.data(), rl, n * rr); }

    DenseTensor to_dense() const { return DenseTensor({rl, n, rr}, data); }
};

/// Plain TT chain for one batch element (no factors, no CP nodes).
using Chain = std::vector<Core>;

/// Extracts batch element b of the plain-TT view of t.
Chain plain_chain(const TnTensor& t, Index b);
/// All batch elements of the plain-TT view.
std::vector<Chain> plain_chains(const TnTensor& t);

/// Builds a TnTensor from per-element chains, zero-padding ranks to the per-edge maximum.
/// `batched` decides whether the result carries a batch mode (requires chains.size()==1 otherwise).
TnTensor from_chains(const std::vector<Chain>& chains, bool batched);
TnTensor from_chain(const Chain& chain);

/// Copies a core into a larger zero core with the given ranks.
Core pad_core_ranks(const Core& core, Index rl, Index rr);

std::vector<Index> chain_ranks(const Chain& chain);

/// Thin SVD with deterministic signs: the largest-magnitude entry of each left vector is positive.
struct Svd {
    RowMatrix u;
    Vector s;
    RowMatrix vt;
};
Svd svd(const Eigen::Ref<const RowMatrix>& a);

/// Rank kept when discarding trailing singular values with squared sum <= budget^2.
/// A zero budget keeps every value above the numerical-rank threshold. Values
/// at or below `floor` are always dropped. Result >= 1.
Index truncation_rank(const Vector& s, double budget, Index rows, Index cols, Index cap = -1, double floor = 0.0);

/// Thin QR of a (possibly wide) matrix; q has min(rows, cols) columns.
void thin_qr(const Eigen::Ref<const RowMatrix>& a, RowMatrix& q, RowMatrix& r);

/// Pseudo-inverse with relative singular-value cutoff.
RowMatrix pinv(const Eigen::Ref<const RowMatrix>& a, double rcond);

std::string shape_string(std::span<const Index> shape);

}  // namespace tnt::detail
