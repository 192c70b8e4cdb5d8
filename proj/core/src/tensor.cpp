#include "tnt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "detail.hpp"

namespace tnt {

using detail::Chain;
using detail::ConstRowMap;
using detail::Core;
using detail::require;
using detail::RowMap;
using detail::RowMatrix;

CpPosition cp_position(Index k, Index n) {
    if (n == 1) return CpPosition::single;
    if (k == 0) return CpPosition::left_boundary;
    if (k == n - 1) return CpPosition::right_boundary;
    return CpPosition::interior;
}

// ---------------------------------------------------------------------------
// ModeNode

ModeNode::ModeNode(NodeKind kind, bool batched, DenseTensor core)
    : kind_(kind), batched_(batched), core_(std::move(core)) {}

ModeNode ModeNode::tt(DenseTensor core) {
    require(core.ndim() == 3, "ModeNode::tt: core must be 3-dimensional (r_left, I, r_right)");
    require(core.dim(0) >= 1 && core.dim(2) >= 1, "ModeNode::tt: ranks must be >= 1");
    return ModeNode(NodeKind::tt, false, std::move(core));
}

ModeNode ModeNode::cp(DenseTensor factor) {
    require(factor.ndim() == 2, "ModeNode::cp: factor must be 2-dimensional (I, R)");
    require(factor.dim(1) >= 1, "ModeNode::cp: rank must be >= 1");
    return ModeNode(NodeKind::cp, false, std::move(factor));
}

ModeNode ModeNode::tt_batched(DenseTensor core) {
    require(core.ndim() == 4, "ModeNode::tt_batched: core must be 4-dimensional (B, r_left, I, r_right)");
    require(core.dim(0) >= 1, "ModeNode::tt_batched: batch size must be >= 1");
    require(core.dim(1) >= 1 && core.dim(3) >= 1, "ModeNode::tt_batched: ranks must be >= 1");
    return ModeNode(NodeKind::tt, true, std::move(core));
}

ModeNode ModeNode::cp_batched(DenseTensor factor) {
    require(factor.ndim() == 3, "ModeNode::cp_batched: factor must be 3-dimensional (B, I, R)");
    require(factor.dim(0) >= 1, "ModeNode::cp_batched: batch size must be >= 1");
    require(factor.dim(2) >= 1, "ModeNode::cp_batched: rank must be >= 1");
    return ModeNode(NodeKind::cp, true, std::move(factor));
}

ModeNode ModeNode::with_factor(DenseTensor factor) const {
    const Index off = batched_ ? 1 : 0;
    require(factor.ndim() == 2 + off, "ModeNode::with_factor: factor must be (J, I) plus the batch mode");
    if (batched_) require(factor.dim(0) == core_.dim(0), "ModeNode::with_factor: batch size mismatch");
    require(factor.dim(1 + off) == size(),
            "ModeNode::with_factor: factor columns (" + std::to_string(factor.dim(1 + off)) +
                ") must equal the core's physical size (" + std::to_string(size()) + ")");
    ModeNode out = *this;
    out.factor_ = std::move(factor);
    return out;
}

ModeNode ModeNode::without_factor() const {
    ModeNode out = *this;
    out.factor_.reset();
    return out;
}

Index ModeNode::size() const {
    const Index off = batched_ ? 1 : 0;
    return is_tt() ? core_.dim(1 + off) : core_.dim(off);
}

Index ModeNode::physical_size() const { return has_factor() ? factor_rows() : size(); }

Index ModeNode::rank_left() const {
    require(is_tt(), "ModeNode::rank_left: CP node ranks depend on chain position");
    return core_.dim(batched_ ? 1 : 0);
}

Index ModeNode::rank_right() const {
    require(is_tt(), "ModeNode::rank_right: CP node ranks depend on chain position");
    return core_.dim(batched_ ? 3 : 2);
}

Index ModeNode::cp_rank() const {
    require(is_cp(), "ModeNode::cp_rank: not a CP node");
    return core_.dim(batched_ ? 2 : 1);
}

Index ModeNode::factor_rows() const { return factor().dim(batched_ ? 1 : 0); }

const DenseTensor& ModeNode::factor() const {
    if (!factor_) throw ContractViolation("ModeNode::factor: node has no Tucker factor");
    return *factor_;
}

Index ModeNode::parameter_count() const {
    Index n = core_.numel();
    if (factor_) n += factor_->numel();
    return n / batch_count();
}

ModeNode ModeNode::element(Index b) const {
    if (!batched_) {
        require(b == 0, "ModeNode::element: unbatched node has a single element");
        return *this;
    }
    ModeNode out(kind_, false, core_.leading_slice(b));
    if (factor_) out.factor_ = factor_->leading_slice(b);
    return out;
}

// ---------------------------------------------------------------------------
// TnTensor

TnTensor::TnTensor(std::vector<ModeNode> nodes) : nodes_(std::move(nodes)) {
    require(!nodes_.empty(), "TnTensor: at least one node is required");
    const bool b = nodes_.front().batched();
    const Index bc = nodes_.front().batch_count();
    for (const auto& node : nodes_) {
        require(node.batched() == b, "TnTensor: nodes mix batched and unbatched storage");
        require(node.batch_count() == bc, "TnTensor: nodes disagree on batch size");
    }
    const Index n = ndim();
    for (Index k = 0; k < n; ++k) {
        const auto& node = nodes_[static_cast<std::size_t>(k)];
        if (k == 0 && node.is_tt() && node.rank_left() != 1)
            throw StructuralError("TnTensor: first node must have left rank 1");
        if (k == n - 1 && node.is_tt() && node.rank_right() != 1)
            throw StructuralError("TnTensor: last node must have right rank 1");
        if (k + 1 < n && rank_right(k) != rank_left(k + 1)) {
            throw StructuralError("TnTensor: rank mismatch between nodes " + std::to_string(k) + " (" +
                                  std::to_string(rank_right(k)) + ") and " + std::to_string(k + 1) + " (" +
                                  std::to_string(rank_left(k + 1)) + ")");
        }
    }
}

std::optional<Index> TnTensor::batch_size() const {
    if (!batched()) return std::nullopt;
    return batch_count();
}

Index TnTensor::rank_left(Index k) const {
    const auto& node = this->node(k);
    if (node.is_tt()) return node.rank_left();
    return k == 0 ? 1 : node.cp_rank();
}

Index TnTensor::rank_right(Index k) const {
    const auto& node = this->node(k);
    if (node.is_tt()) return node.rank_right();
    return k == ndim() - 1 ? 1 : node.cp_rank();
}

Shape TnTensor::shape() const {
    Shape s;
    s.reserve(nodes_.size());
    for (const auto& node : nodes_) s.push_back(node.physical_size());
    return s;
}

std::vector<Index> TnTensor::ranks() const {
    std::vector<Index> r;
    r.reserve(nodes_.size() + 1);
    r.push_back(rank_left(0));
    for (Index k = 0; k < ndim(); ++k) r.push_back(rank_right(k));
    return r;
}

Index TnTensor::dof() const {
    Index total = 0;
    for (const auto& node : nodes_) total += node.parameter_count();
    return total;
}

Index TnTensor::numel() const { return shape_numel(shape()); }

bool TnTensor::all_tt() const {
    return std::all_of(nodes_.begin(), nodes_.end(), [](const ModeNode& n) { return n.is_tt(); });
}

bool TnTensor::any_factor() const {
    return std::any_of(nodes_.begin(), nodes_.end(), [](const ModeNode& n) { return n.has_factor(); });
}

TnTensor TnTensor::element(Index b) const {
    require(b >= 0 && b < batch_count(), "TnTensor::element: batch index out of range");
    std::vector<ModeNode> nodes;
    nodes.reserve(nodes_.size());
    for (const auto& node : nodes_) nodes.push_back(node.element(b));
    return TnTensor(std::move(nodes));
}

TnTensor TnTensor::stack(std::span<const TnTensor> items) {
    require(!items.empty(), "TnTensor::stack: no items");
    const auto& first = items.front();
    std::vector<ModeNode> nodes;
    for (Index k = 0; k < first.ndim(); ++k) {
        std::vector<DenseTensor> cores;
        std::vector<DenseTensor> factors;
        const auto& ref = first.node(k);
        for (const auto& item : items) {
            require(!item.batched(), "TnTensor::stack: items must be unbatched");
            require(item.ndim() == first.ndim(), "TnTensor::stack: dimension mismatch");
            const auto& nd = item.node(k);
            require(nd.kind() == ref.kind() && nd.has_factor() == ref.has_factor(),
                    "TnTensor::stack: node structure mismatch");
            cores.push_back(nd.core());
            if (nd.has_factor()) factors.push_back(nd.factor());
        }
        ModeNode node = ref.is_tt() ? ModeNode::tt_batched(DenseTensor::stack(cores))
                                    : ModeNode::cp_batched(DenseTensor::stack(cores));
        if (ref.has_factor()) node = node.with_factor(DenseTensor::stack(factors));
        nodes.push_back(std::move(node));
    }
    return TnTensor(std::move(nodes));
}

// ---------------------------------------------------------------------------
// Promotion and contraction

namespace {

Core promote_element(const double* u, Index size, Index rank, CpPosition position) {
    switch (position) {
        case CpPosition::interior: {
            Core d(rank, size, rank);
            for (Index i = 0; i < size; ++i)
                for (Index a = 0; a < rank; ++a) d(a, i, a) = u[i * rank + a];
            return d;
        }
        case CpPosition::left_boundary: {
            Core d(1, size, rank);
            for (Index i = 0; i < size; ++i)
                for (Index b = 0; b < rank; ++b) d(0, i, b) = u[i * rank + b];
            return d;
        }
        case CpPosition::right_boundary: {
            Core d(rank, size, 1);
            for (Index i = 0; i < size; ++i)
                for (Index a = 0; a < rank; ++a) d(a, i, 0) = u[i * rank + a];
            return d;
        }
        case CpPosition::single: {
            Core d(1, size, 1);
            for (Index i = 0; i < size; ++i) {
                double s = 0.0;
                for (Index r = 0; r < rank; ++r) s += u[i * rank + r];
                d(0, i, 0) = s;
            }
            return d;
        }
    }
    return {};
}

// TT core of one batch element, CP promoted, factor not applied.
Core raw_core(const ModeNode& node, CpPosition position, Index b) {
    const Index per = node.core().numel() / node.batch_count();
    const double* src = node.core().data().data() + b * per;
    if (node.is_cp()) return promote_element(src, node.size(), node.cp_rank(), position);
    Core c(node.rank_left(), node.size(), node.rank_right());
    std::copy(src, src + per, c.data.begin());
    return c;
}

Core apply_factor(const Core& core, const ModeNode& node, Index b) {
    if (!node.has_factor()) return core;
    const Index j = node.factor_rows();
    const Index per = j * node.size();
    ConstRowMap f(node.factor().data().data() + b * per, j, node.size());
    Core out(core.rl, j, core.rr);
    for (Index a = 0; a < core.rl; ++a) {
        ConstRowMap slab(core.data.data() + a * core.n * core.rr, core.n, core.rr);
        RowMap dst(out.data.data() + a * j * core.rr, j, core.rr);
        dst.noalias() = f * slab;
    }
    return out;
}

Core effective_element(const TnTensor& t, Index k, Index b) {
    const auto& node = t.node(k);
    return apply_factor(raw_core(node, cp_position(k, t.ndim()), b), node, b);
}

}  // namespace

DenseTensor promote_cp_node(const ModeNode& node, CpPosition position) {
    require(node.is_cp(), "promote_cp_node: node is not a CP node");
    std::vector<DenseTensor> parts;
    for (Index b = 0; b < node.batch_count(); ++b) parts.push_back(raw_core(node, position, b).to_dense());
    return node.batched() ? DenseTensor::stack(parts) : parts.front();
}

TnTensor promote_cp(const TnTensor& t) {
    std::vector<ModeNode> nodes;
    for (Index k = 0; k < t.ndim(); ++k) {
        const auto& node = t.node(k);
        if (node.is_tt()) {
            nodes.push_back(node);
            continue;
        }
        const DenseTensor d = promote_cp_node(node, cp_position(k, t.ndim()));
        ModeNode promoted = node.batched() ? ModeNode::tt_batched(d) : ModeNode::tt(d);
        if (node.has_factor()) promoted = promoted.with_factor(node.factor());
        nodes.push_back(std::move(promoted));
    }
    return TnTensor(std::move(nodes));
}

DenseTensor effective_core(const TnTensor& t, Index k) {
    std::vector<DenseTensor> parts;
    for (Index b = 0; b < t.batch_count(); ++b) parts.push_back(effective_element(t, k, b).to_dense());
    return t.batched() ? DenseTensor::stack(parts) : parts.front();
}

TnTensor absorb_factors(const TnTensor& t) {
    if (t.all_tt() && !t.any_factor()) return t;
    std::vector<ModeNode> nodes;
    for (Index k = 0; k < t.ndim(); ++k) {
        const DenseTensor d = effective_core(t, k);
        nodes.push_back(t.batched() ? ModeNode::tt_batched(d) : ModeNode::tt(d));
    }
    return TnTensor(std::move(nodes));
}

DenseTensor full(const TnTensor& t) {
    const Shape shape = t.shape();
    const Index numel = shape_numel(shape);
    Shape out_shape = shape;
    if (t.batched()) out_shape.insert(out_shape.begin(), t.batch_count());
    DenseTensor out(out_shape);

    for (Index b = 0; b < t.batch_count(); ++b) {
        // Left-to-right accumulation of the (prefix x rank) unfolding.
        RowMatrix acc = RowMatrix::Ones(1, 1);
        for (Index k = 0; k < t.ndim(); ++k) {
            const Core g = effective_element(t, k, b);
            RowMatrix next = acc * g.right_unfolding();
            acc = Eigen::Map<RowMatrix>(next.data(), acc.rows() * g.n, g.rr);
        }
        std::copy(acc.data(), acc.data() + numel, out.data().begin() + b * numel);
    }
    return out;
}

// ---------------------------------------------------------------------------
// detail

namespace detail {

Chain plain_chain(const TnTensor& t, Index b) {
    Chain chain;
    chain.reserve(static_cast<std::size_t>(t.ndim()));
    for (Index k = 0; k < t.ndim(); ++k) chain.push_back(effective_element(t, k, b));
    return chain;
}

std::vector<Chain> plain_chains(const TnTensor& t) {
    std::vector<Chain> chains;
    chains.reserve(static_cast<std::size_t>(t.batch_count()));
    for (Index b = 0; b < t.batch_count(); ++b) chains.push_back(plain_chain(t, b));
    return chains;
}

std::vector<Index> chain_ranks(const Chain& chain) {
    std::vector<Index> r{chain.front().rl};
    for (const auto& c : chain) r.push_back(c.rr);
    return r;
}

Core pad_core_ranks(const Core& core, Index rl, Index rr) {
    if (core.rl == rl && core.rr == rr) return core;
    Core out(rl, core.n, rr);
    for (Index a = 0; a < core.rl; ++a)
        for (Index i = 0; i < core.n; ++i)
            for (Index c = 0; c < core.rr; ++c) out(a, i, c) = core(a, i, c);
    return out;
}

TnTensor from_chains(const std::vector<Chain>& chains, bool batched) {
    require(!chains.empty(), "from_chains: no chains");
    require(batched || chains.size() == 1, "from_chains: unbatched result needs exactly one chain");
    const std::size_t n = chains.front().size();
    std::vector<Index> ranks(n + 1, 1);
    for (const auto& chain : chains) {
        require(chain.size() == n, "from_chains: chains differ in length");
        for (std::size_t k = 0; k < n; ++k) {
            ranks[k] = std::max(ranks[k], chain[k].rl);
            ranks[k + 1] = std::max(ranks[k + 1], chain[k].rr);
        }
    }
    std::vector<ModeNode> nodes;
    nodes.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Index size = chains.front()[k].n;
        if (!batched) {
            nodes.push_back(ModeNode::tt(chains.front()[k].to_dense()));
            continue;
        }
        const Index per = ranks[k] * size * ranks[k + 1];
        std::vector<double> data(chains.size() * static_cast<std::size_t>(per));
        for (std::size_t b = 0; b < chains.size(); ++b) {
            require(chains[b][k].n == size, "from_chains: mode sizes differ across batch");
            const Core padded = pad_core_ranks(chains[b][k], ranks[k], ranks[k + 1]);
            std::copy(padded.data.begin(), padded.data.end(), data.begin() + static_cast<std::ptrdiff_t>(b) * per);
        }
        nodes.push_back(ModeNode::tt_batched(
            DenseTensor({static_cast<Index>(chains.size()), ranks[k], size, ranks[k + 1]}, std::move(data))));
    }
    return TnTensor(std::move(nodes));
}

TnTensor from_chain(const Chain& chain) { return from_chains({chain}, false); }

std::string shape_string(std::span<const Index> shape) {
    std::string s = "(";
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (k) s += ", ";
        s += std::to_string(shape[k]);
    }
    return s + ")";
}

}  // namespace detail

}  // namespace tnt
