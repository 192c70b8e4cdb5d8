#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "tnt/dense_tensor.hpp"

namespace tnt {

enum class NodeKind { tt, cp };

/// Where a CP node sits in the chain; decides which rank edges are closed.
enum class CpPosition { interior, left_boundary, right_boundary, single };

CpPosition cp_position(Index k, Index n);

/**
 * One node of a tensor network chain.
 *
 * A TT node stores a core of shape (r_left, I, r_right). A CP node stores a
 * factor matrix of shape (I, R); it is linked to its neighbours through an
 * implicit copy tensor and is never stored in diagonal form. Either kind may
 * carry a Tucker factor of shape (J, I) mapping the physical index onto the
 * core index. Batched nodes carry an extra leading mode B on core and factor.
 */
class ModeNode {
public:
    static ModeNode tt(DenseTensor core);
    static ModeNode cp(DenseTensor factor);
    static ModeNode tt_batched(DenseTensor core);
    static ModeNode cp_batched(DenseTensor factor);

    /// Returns a copy with a Tucker factor attached (leading batch mode iff the node is batched).
    ModeNode with_factor(DenseTensor factor) const;
    ModeNode without_factor() const;

    NodeKind kind() const noexcept { return kind_; }
    bool is_tt() const noexcept { return kind_ == NodeKind::tt; }
    bool is_cp() const noexcept { return kind_ == NodeKind::cp; }
    bool batched() const noexcept { return batched_; }
    Index batch_count() const noexcept { return batched_ ? core_.dim(0) : 1; }

    /// Size of the core's own physical index (I).
    Index size() const;
    /// Size of the exposed physical index (J with a factor, else I).
    Index physical_size() const;
    /// TT ranks; only valid for TT nodes.
    Index rank_left() const;
    Index rank_right() const;
    /// CP rank; only valid for CP nodes.
    Index cp_rank() const;

    bool has_factor() const noexcept { return factor_.has_value(); }
    Index factor_rows() const;

    const DenseTensor& core() const noexcept { return core_; }
    const DenseTensor& factor() const;

    /// Stored entries per batch element.
    Index parameter_count() const;

    /// Unbatched copy of batch element b.
    ModeNode element(Index b) const;

private:
    ModeNode(NodeKind kind, bool batched, DenseTensor core);

    NodeKind kind_;
    bool batched_;
    DenseTensor core_;
    std::optional<DenseTensor> factor_;
};

/**
 * Blended CP / Tucker / TT tensor: an ordered chain of mode nodes.
 *
 * Consecutive nodes must agree on their shared rank; a CP node exposes its
 * rank R on interior edges and 1 on the outer edges of the chain. Values are
 * immutable once constructed.
 */
class TnTensor {
public:
    explicit TnTensor(std::vector<ModeNode> nodes);

    Index ndim() const noexcept { return static_cast<Index>(nodes_.size()); }
    bool batched() const noexcept { return nodes_.front().batched(); }
    std::optional<Index> batch_size() const;
    Index batch_count() const noexcept { return nodes_.front().batch_count(); }

    const std::vector<ModeNode>& nodes() const noexcept { return nodes_; }
    const ModeNode& node(Index k) const { return nodes_.at(static_cast<std::size_t>(k)); }

    /// Physical shape (no batch mode).
    Shape shape() const;
    /// Chain ranks including the boundary 1s (N + 1 entries).
    std::vector<Index> ranks() const;
    Index rank_left(Index k) const;
    Index rank_right(Index k) const;
    /// Stored parameters, excluding batch replication.
    Index dof() const;
    Index numel() const;

    bool all_tt() const;
    bool any_factor() const;

    TnTensor element(Index b) const;
    /// Batches structurally identical unbatched tensors.
    static TnTensor stack(std::span<const TnTensor> items);

private:
    std::vector<ModeNode> nodes_;
};

/// Diagonal 3D form of a CP node (copy tensor contracted in); keeps the batch mode.
DenseTensor promote_cp_node(const ModeNode& node, CpPosition position);

/// Every CP node promoted to TT form; Tucker factors are kept.
TnTensor promote_cp(const TnTensor& t);
/// Plain TT chain: CP nodes promoted and Tucker factors multiplied into the cores.
TnTensor absorb_factors(const TnTensor& t);
/// TT core of mode k with CP promotion and Tucker factor applied.
DenseTensor effective_core(const TnTensor& t, Index k);

/// Dense contraction. Batched input yields a leading batch mode.
DenseTensor full(const TnTensor& t);

/// Result of operations that may contract every mode away: scalars come back
/// as a 0-dimensional DenseTensor (shape {B} when batched).
using TensorOrDense = std::variant<TnTensor, DenseTensor>;

/// Frobenius norm (unbatched tensors only).
double norm(const TnTensor& t);
std::vector<double> batched_norm(const TnTensor& t);

}  // namespace tnt
