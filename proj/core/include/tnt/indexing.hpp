#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "tnt/dense_tensor.hpp"
#include "tnt/tensor.hpp"

namespace tnt {

/// start:stop:step with Python semantics; missing bounds follow the step's direction.
struct Slice {
    std::optional<Index> start;
    std::optional<Index> stop;
    std::optional<Index> step;

    static Slice all() { return {}; }
    static Slice reversed() { return {std::nullopt, std::nullopt, -1}; }
};

struct NewAxis {};
struct Ellipsis {};

/// Explicit list of positions along one mode.
using IndexList = std::vector<Index>;

using IndexItem = std::variant<Slice, Index, IndexList, NewAxis, Ellipsis>;

/**
 * Multi-mode indexing expression.
 *
 * Item form: slices, integers, index lists, new axes and at most one
 * ellipsis, as in array libraries. Index lists are "fancy" indices: a single
 * list selects positions along its mode; several lists (integers count as
 * fancy once any list is present) must be adjacent, are broadcast together
 * and produce one mode in place of the group. Fancy indices separated by
 * basic ones are rejected with UnsupportedIndexing.
 *
 * Array form: an M x N integer matrix of full multi-indices, gathered into a
 * dense vector of M values.
 */
class IndexSpec {
public:
    IndexSpec() = default;
    IndexSpec(std::initializer_list<IndexItem> items) : items_(items) {}
    explicit IndexSpec(std::vector<IndexItem> items) : items_(std::move(items)) {}

    /// Array form; `rows` holds M multi-indices of length N.
    static IndexSpec array(std::vector<std::vector<Index>> rows);

    bool is_array() const noexcept { return array_.has_value(); }
    const std::vector<IndexItem>& items() const noexcept { return items_; }
    const std::vector<std::vector<Index>>& array_rows() const { return *array_; }

private:
    std::vector<IndexItem> items_;
    std::optional<std::vector<std::vector<Index>>> array_;
};

/// Normalizes a slice against a mode size, returning the selected positions.
std::vector<Index> slice_positions(const Slice& s, Index size);

/**
 * Compressed-domain read. Returns a TnTensor, a 0-dimensional DenseTensor
 * when every mode is fixed by an integer ({B} when batched), or a dense
 * vector of gathered values for the array form ({B, M} when batched).
 */
TensorOrDense getitem(const TnTensor& t, const IndexSpec& spec);

using SetValue = std::variant<TnTensor, double>;

/**
 * Out-of-place write: t with the selected region replaced by `value`
 * (broadcast to the region's shape). Built as t - t*mask + embed(value) from
 * add, hadamard and ttm only. Array form, new axes and multi-list groups are
 * not accepted.
 */
TnTensor setitem(const TnTensor& t, const IndexSpec& spec, const SetValue& value);

/// In-place facades that rebind `t`.
void assign(TnTensor& t, const IndexSpec& spec, const SetValue& value);
void add_assign(TnTensor& t, const IndexSpec& spec, const SetValue& value);

/// Right-aligned broadcast of two shapes; throws BroadcastError.
Shape broadcast_shapes(const Shape& a, const Shape& b);

/// Expands size-1 modes (and missing leading modes) to `shape`.
TnTensor broadcast_to(const TnTensor& t, const Shape& shape);

}  // namespace tnt
