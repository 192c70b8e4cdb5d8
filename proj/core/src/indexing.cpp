#include "tnt/indexing.hpp"

#include <algorithm>
#include <set>

#include "detail.hpp"
#include "tnt/arithmetic.hpp"
#include "tnt/random.hpp"

namespace tnt {

using detail::ConstRowMap;
using detail::require;
using detail::RowMap;
using detail::RowMatrix;

IndexSpec IndexSpec::array(std::vector<std::vector<Index>> rows) {
    IndexSpec s;
    s.array_ = std::move(rows);
    return s;
}

std::vector<Index> slice_positions(const Slice& s, Index size) {
    const Index step = s.step.value_or(1);
    if (step == 0) throw ContractViolation("slice step must not be zero");
    std::vector<Index> out;
    if (step > 0) {
        auto norm = [size](Index v) { return std::clamp(v < 0 ? v + size : v, Index{0}, size); };
        const Index start = s.start ? norm(*s.start) : 0;
        const Index stop = s.stop ? norm(*s.stop) : size;
        for (Index i = start; i < stop; i += step) out.push_back(i);
    } else {
        auto norm = [size](Index v) { return std::clamp(v < 0 ? v + size : v, Index{-1}, size - 1); };
        const Index start = s.start ? norm(*s.start) : size - 1;
        const Index stop = s.stop ? norm(*s.stop) : -1;
        for (Index i = start; i > stop; i += step) out.push_back(i);
    }
    return out;
}

namespace {

Index normalize_index(Index i, Index size, Index mode) {
    const Index v = i < 0 ? i + size : i;
    if (v < 0 || v >= size) {
        throw IndexError("index " + std::to_string(i) + " is out of bounds for mode " + std::to_string(mode) +
                         " with size " + std::to_string(size));
    }
    return v;
}

bool is_fancy(const IndexItem& item) {
    return std::holds_alternative<IndexList>(item) || std::holds_alternative<Index>(item);
}

bool consumes_mode(const IndexItem& item) {
    return !std::holds_alternative<NewAxis>(item) && !std::holds_alternative<Ellipsis>(item);
}

// Replaces the ellipsis (or the implicit trailing one) with full slices.
std::vector<IndexItem> expand(const std::vector<IndexItem>& items, Index n) {
    const auto ellipses = std::count_if(items.begin(), items.end(),
                                        [](const IndexItem& it) { return std::holds_alternative<Ellipsis>(it); });
    if (ellipses > 1) throw ContractViolation("an index can only have a single ellipsis");
    const auto consumed = std::count_if(items.begin(), items.end(), consumes_mode);
    if (consumed > n) {
        throw IndexError("too many indices: " + std::to_string(consumed) + " for a tensor with " + std::to_string(n) +
                         " modes");
    }
    std::vector<IndexItem> out;
    bool expanded = false;
    for (const auto& it : items) {
        if (std::holds_alternative<Ellipsis>(it)) {
            for (Index k = 0; k < n - consumed; ++k) out.emplace_back(Slice{});
            expanded = true;
        } else {
            out.push_back(it);
        }
    }
    if (!expanded)
        for (Index k = 0; k < n - consumed; ++k) out.emplace_back(Slice{});
    return out;
}

struct FancyGroup {
    std::size_t first = 0;  // item positions [first, last)
    std::size_t last = 0;
    Index length = 0;
    bool active = false;
};

// Locates the fancy group, rejecting fancy indices split by basic ones.
FancyGroup find_fancy(const std::vector<IndexItem>& items) {
    FancyGroup g;
    const bool any_list = std::any_of(items.begin(), items.end(),
                                      [](const IndexItem& it) { return std::holds_alternative<IndexList>(it); });
    if (!any_list) return g;
    std::vector<std::size_t> pos;
    for (std::size_t p = 0; p < items.size(); ++p)
        if (is_fancy(items[p])) pos.push_back(p);
    if (pos.back() - pos.front() + 1 != pos.size()) {
        throw UnsupportedIndexing("interleaving fancy (list) indices with basic indices is not supported");
    }
    g.first = pos.front();
    g.last = pos.back() + 1;
    g.active = true;
    g.length = 1;
    for (std::size_t p = g.first; p < g.last; ++p) {
        if (const auto* l = std::get_if<IndexList>(&items[p])) {
            const auto len = static_cast<Index>(l->size());
            if (len == 1) continue;
            if (g.length != 1 && g.length != len) {
                throw ContractViolation("index lists of lengths " + std::to_string(g.length) + " and " +
                                        std::to_string(len) + " cannot be broadcast together");
            }
            g.length = len;
        }
    }
    return g;
}

ModeNode make_node(const ModeNode& like, DenseTensor core, const DenseTensor* factor) {
    ModeNode out = like.is_tt() ? (like.batched() ? ModeNode::tt_batched(std::move(core)) : ModeNode::tt(std::move(core)))
                                : (like.batched() ? ModeNode::cp_batched(std::move(core)) : ModeNode::cp(std::move(core)));
    if (factor) out = out.with_factor(*factor);
    return out;
}

// Selects `positions` (already normalized) along a node's physical index.
ModeNode subset_node(const ModeNode& node, const std::vector<Index>& positions) {
    const Index batch = node.batch_count();
    const auto count = static_cast<Index>(positions.size());
    auto gather = [&](const DenseTensor& src, Index outer, Index size, Index inner) {
        std::vector<double> out(static_cast<std::size_t>(batch * outer * count * inner));
        for (Index e = 0; e < batch * outer; ++e)
            for (Index l = 0; l < count; ++l)
                std::copy_n(src.data().data() + (e * size + positions[static_cast<std::size_t>(l)]) * inner, inner,
                            out.data() + (e * count + l) * inner);
        return out;
    };
    if (node.has_factor()) {
        const Index i = node.size();
        auto out = gather(node.factor(), 1, node.factor_rows(), i);
        DenseTensor f = node.batched() ? DenseTensor({batch, count, i}, std::move(out)) : DenseTensor({count, i}, std::move(out));
        return node.without_factor().with_factor(std::move(f));
    }
    if (node.is_cp()) {
        const Index r = node.cp_rank();
        auto out = gather(node.core(), 1, node.size(), r);
        DenseTensor c = node.batched() ? DenseTensor({batch, count, r}, std::move(out)) : DenseTensor({count, r}, std::move(out));
        return make_node(node, std::move(c), nullptr);
    }
    const Index rl = node.rank_left(), rr = node.rank_right();
    auto out = gather(node.core(), rl, node.size(), rr);
    DenseTensor c = node.batched() ? DenseTensor({batch, rl, count, rr}, std::move(out))
                                   : DenseTensor({rl, count, rr}, std::move(out));
    return make_node(node, std::move(c), nullptr);
}

using Mats = std::vector<RowMatrix>;  // one rank matrix per batch element

// Slice of the effective core of mode k at physical position i.
Mats position_matrices(const DenseTensor& eff, bool batched, Index i) {
    const Index off = batched ? 1 : 0;
    const Index batch = batched ? eff.dim(0) : 1;
    const Index rl = eff.dim(off), n = eff.dim(off + 1), rr = eff.dim(off + 2);
    Mats out;
    for (Index e = 0; e < batch; ++e) {
        RowMatrix m(rl, rr);
        for (Index a = 0; a < rl; ++a)
            for (Index c = 0; c < rr; ++c) m(a, c) = eff.data()[static_cast<std::size_t>(((e * rl + a) * n + i) * rr + c)];
        out.push_back(std::move(m));
    }
    return out;
}

Mats multiply(const Mats& a, const Mats& b) {
    Mats out;
    for (std::size_t e = 0; e < a.size(); ++e) out.push_back(a[e] * b[e]);
    return out;
}

ModeNode left_multiply(const ModeNode& node, const Mats& m) {
    const Index batch = node.batch_count();
    const Index rl = node.rank_left(), n = node.size(), rr = node.rank_right();
    const Index nl = m.front().rows();
    std::vector<double> out(static_cast<std::size_t>(batch * nl * n * rr));
    for (Index e = 0; e < batch; ++e)
        RowMap(out.data() + e * nl * n * rr, nl, n * rr).noalias() =
            m[static_cast<std::size_t>(e)] * ConstRowMap(node.core().data().data() + e * rl * n * rr, rl, n * rr);
    DenseTensor c = node.batched() ? DenseTensor({batch, nl, n, rr}, std::move(out)) : DenseTensor({nl, n, rr}, std::move(out));
    return make_node(node, std::move(c), node.has_factor() ? &node.factor() : nullptr);
}

ModeNode right_multiply(const ModeNode& node, const Mats& m) {
    const Index batch = node.batch_count();
    const Index rl = node.rank_left(), n = node.size(), rr = node.rank_right();
    const Index nr = m.front().cols();
    std::vector<double> out(static_cast<std::size_t>(batch * rl * n * nr));
    for (Index e = 0; e < batch; ++e)
        RowMap(out.data() + e * rl * n * nr, rl * n, nr).noalias() =
            ConstRowMap(node.core().data().data() + e * rl * n * rr, rl * n, rr) * m[static_cast<std::size_t>(e)];
    DenseTensor c = node.batched() ? DenseTensor({batch, rl, n, nr}, std::move(out)) : DenseTensor({rl, n, nr}, std::move(out));
    return make_node(node, std::move(c), node.has_factor() ? &node.factor() : nullptr);
}

ModeNode axis_node(bool batched, Index batch, Index rank, double value) {
    std::vector<double> data(static_cast<std::size_t>(batch * rank * rank), 0.0);
    for (Index e = 0; e < batch; ++e)
        for (Index a = 0; a < rank; ++a) data[static_cast<std::size_t>((e * rank + a) * rank + a)] = value;
    if (batched) return ModeNode::tt_batched(DenseTensor({batch, rank, 1, rank}, std::move(data)));
    return ModeNode::tt(DenseTensor({rank, 1, rank}, std::move(data)));
}

DenseTensor gather_array(const TnTensor& t, const IndexSpec& spec) {
    const Index n = t.ndim();
    const Shape shape = t.shape();
    const auto& rows = spec.array_rows();
    std::vector<std::vector<Index>> idx;
    idx.reserve(rows.size());
    for (const auto& row : rows) {
        if (static_cast<Index>(row.size()) != n) {
            throw ContractViolation("array index rows must have " + std::to_string(n) + " entries, got " +
                                    std::to_string(row.size()));
        }
        std::vector<Index> r;
        for (Index k = 0; k < n; ++k)
            r.push_back(normalize_index(row[static_cast<std::size_t>(k)], shape[static_cast<std::size_t>(k)], k));
        idx.push_back(std::move(r));
    }
    std::vector<DenseTensor> eff;
    for (Index k = 0; k < n; ++k) eff.push_back(effective_core(t, k));

    const auto m = static_cast<Index>(idx.size());
    const Index batch = t.batch_count();
    DenseTensor out(t.batched() ? Shape{batch, m} : Shape{m});
    for (Index e = 0; e < batch; ++e) {
        for (Index s = 0; s < m; ++s) {
            Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
            for (Index k = 0; k < n; ++k) {
                const Index rl = t.rank_left(k), rr = t.rank_right(k), j = shape[static_cast<std::size_t>(k)];
                const Index i = idx[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
                const double* base = eff[static_cast<std::size_t>(k)].data().data() + e * rl * j * rr;
                Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(rr);
                for (Index a = 0; a < rl; ++a)
                    next += v(a) * Eigen::Map<const Eigen::RowVectorXd>(base + (a * j + i) * rr, rr);
                v = std::move(next);
            }
            out[e * m + s] = v(0);
        }
    }
    return out;
}

}  // namespace

TensorOrDense getitem(const TnTensor& t, const IndexSpec& spec) {
    if (spec.is_array()) return gather_array(t, spec);

    const Index n = t.ndim();
    const auto items = expand(spec.items(), n);
    const FancyGroup group = find_fancy(items);

    const bool multi_group = group.active && group.last - group.first > 1;
    const bool structural = multi_group || std::any_of(items.begin(), items.end(), [](const IndexItem& it) {
                                return std::holds_alternative<Index>(it) || std::holds_alternative<NewAxis>(it);
                            });
    const TnTensor src = structural ? promote_cp(t) : t;
    const Shape shape = src.shape();
    const bool batched = src.batched();
    const Index batch = src.batch_count();

    // Pieces in output order: a node, or a new-axis marker. Rank matrices are
    // folded into `pending` and absorbed into the next node.
    struct Piece {
        std::optional<ModeNode> node;
    };
    std::vector<Piece> pieces;
    std::optional<Mats> pending;
    auto push_node = [&](ModeNode node) {
        if (pending) {
            node = left_multiply(node, *pending);
            pending.reset();
        }
        pieces.push_back({std::move(node)});
    };
    auto push_matrix = [&](Mats m) { pending = pending ? multiply(*pending, m) : std::move(m); };

    Index mode = 0;
    for (std::size_t p = 0; p < items.size();) {
        const auto& item = items[p];
        if (group.active && p == group.first && multi_group) {
            // Zipped fancy group over modes [mode, mode + width).
            const auto width = static_cast<Index>(group.last - group.first);
            std::vector<std::vector<Index>> lists;
            for (Index j = 0; j < width; ++j) {
                const auto& it = items[p + static_cast<std::size_t>(j)];
                const Index size = shape[static_cast<std::size_t>(mode + j)];
                std::vector<Index> l;
                if (const auto* li = std::get_if<IndexList>(&it)) {
                    for (Index v : *li) l.push_back(normalize_index(v, size, mode + j));
                } else {
                    l.push_back(normalize_index(std::get<Index>(it), size, mode + j));
                }
                lists.push_back(std::move(l));
            }
            std::vector<DenseTensor> eff;
            for (Index j = 0; j < width; ++j) eff.push_back(effective_core(src, mode + j));
            const Index rl = src.rank_left(mode), rr = src.rank_right(mode + width - 1);
            std::vector<double> data(static_cast<std::size_t>(batch * rl * group.length * rr));
            for (Index l = 0; l < group.length; ++l) {
                Mats m;
                for (Index j = 0; j < width; ++j) {
                    const auto& li = lists[static_cast<std::size_t>(j)];
                    const Index pos = li.size() == 1 ? li.front() : li[static_cast<std::size_t>(l)];
                    Mats mj = position_matrices(eff[static_cast<std::size_t>(j)], batched, pos);
                    m = m.empty() ? std::move(mj) : multiply(m, mj);
                }
                for (Index e = 0; e < batch; ++e)
                    for (Index a = 0; a < rl; ++a)
                        for (Index c = 0; c < rr; ++c)
                            data[static_cast<std::size_t>(((e * rl + a) * group.length + l) * rr + c)] =
                                m[static_cast<std::size_t>(e)](a, c);
            }
            push_node(batched ? ModeNode::tt_batched(DenseTensor({batch, rl, group.length, rr}, std::move(data)))
                              : ModeNode::tt(DenseTensor({rl, group.length, rr}, std::move(data))));
            mode += width;
            p = group.last;
            continue;
        }
        if (const auto* s = std::get_if<Slice>(&item)) {
            push_node(subset_node(src.node(mode), slice_positions(*s, shape[static_cast<std::size_t>(mode)])));
            ++mode;
        } else if (const auto* l = std::get_if<IndexList>(&item)) {
            std::vector<Index> positions;
            for (Index v : *l) positions.push_back(normalize_index(v, shape[static_cast<std::size_t>(mode)], mode));
            push_node(subset_node(src.node(mode), positions));
            ++mode;
        } else if (const auto* i = std::get_if<Index>(&item)) {
            const Index pos = normalize_index(*i, shape[static_cast<std::size_t>(mode)], mode);
            push_matrix(position_matrices(effective_core(src, mode), batched, pos));
            ++mode;
        } else {
            pieces.push_back({std::nullopt});
        }
        ++p;
    }

    auto last_node = std::find_if(pieces.rbegin(), pieces.rend(), [](const Piece& pc) { return pc.node.has_value(); });
    double scalar_fill = 1.0;
    std::vector<double> scalars;
    if (pending) {
        if (last_node != pieces.rend()) {
            *last_node->node = right_multiply(*last_node->node, *pending);
        } else {
            for (const auto& m : *pending) scalars.push_back(m(0, 0));
        }
        pending.reset();
    }
    if (last_node == pieces.rend()) {
        if (pieces.empty()) {
            if (!batched) return DenseTensor::scalar(scalars.empty() ? 1.0 : scalars.front());
            return DenseTensor({batch}, scalars);
        }
        scalar_fill = 0.0;  // marker: first axis node carries the scalar values
    }

    std::vector<ModeNode> nodes;
    Index edge_rank = 1;
    bool first_axis = true;
    for (auto& pc : pieces) {
        if (pc.node) {
            nodes.push_back(std::move(*pc.node));
            // CP nodes only appear in non-structural results, where no axes exist.
            edge_rank = nodes.back().is_tt() ? nodes.back().rank_right() : 1;
            continue;
        }
        ModeNode ax = axis_node(batched, batch, edge_rank, 1.0);
        if (scalar_fill == 0.0 && first_axis) {
            DenseTensor c = ax.core();
            for (Index e = 0; e < batch; ++e) c[e] = scalars[static_cast<std::size_t>(e)];
            ax = batched ? ModeNode::tt_batched(std::move(c)) : ModeNode::tt(std::move(c));
        }
        first_axis = false;
        nodes.push_back(std::move(ax));
    }
    return TnTensor(std::move(nodes));
}

// ---------------------------------------------------------------------------

Shape broadcast_shapes(const Shape& a, const Shape& b) {
    const std::size_t n = std::max(a.size(), b.size());
    Shape out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Index x = k < n - a.size() ? 1 : a[k - (n - a.size())];
        const Index y = k < n - b.size() ? 1 : b[k - (n - b.size())];
        if (x != y && x != 1 && y != 1) {
            throw BroadcastError("shapes " + detail::shape_string(a) + " and " + detail::shape_string(b) +
                                 " cannot be broadcast together");
        }
        out[k] = x == 1 ? y : x;
    }
    return out;
}

TnTensor broadcast_to(const TnTensor& t, const Shape& shape) {
    const Shape own = t.shape();
    if (own == shape) return t;
    if (broadcast_shapes(own, shape) != shape) {
        throw BroadcastError("cannot broadcast " + detail::shape_string(own) + " to " + detail::shape_string(shape));
    }
    const std::size_t extra = shape.size() - own.size();
    TnTensor cur = t;
    if (extra > 0) {
        const TnTensor base = promote_cp(t);
        std::vector<ModeNode> nodes;
        for (std::size_t k = 0; k < extra; ++k) nodes.push_back(axis_node(t.batched(), t.batch_count(), 1, 1.0));
        for (const auto& node : base.nodes()) nodes.push_back(node);
        cur = TnTensor(std::move(nodes));
    }
    for (std::size_t k = 0; k < shape.size(); ++k) {
        const Index have = cur.node(static_cast<Index>(k)).physical_size();
        if (have == shape[k]) continue;
        cur = ttm(cur, DenseTensor({shape[k], 1}, 1.0), static_cast<Index>(k));
    }
    return cur;
}

// ---------------------------------------------------------------------------

TnTensor setitem(const TnTensor& t, const IndexSpec& spec, const SetValue& value) {
    if (spec.is_array()) throw ContractViolation("setitem: array-form indices cannot be written");
    const Index n = t.ndim();
    for (const auto& it : spec.items())
        if (std::holds_alternative<NewAxis>(it)) throw ContractViolation("setitem: new axes cannot be written");
    const auto items = expand(spec.items(), n);
    find_fancy(items);
    const auto lists = std::count_if(items.begin(), items.end(),
                                     [](const IndexItem& it) { return std::holds_alternative<IndexList>(it); });
    if (lists > 1) throw ContractViolation("setitem: at most one index list is supported in writes");

    const Shape shape = t.shape();
    Shape region;
    std::vector<std::vector<Index>> selected;  // per mode
    std::vector<bool> fixed;
    for (Index k = 0; k < n; ++k) {
        const auto& it = items[static_cast<std::size_t>(k)];
        const Index size = shape[static_cast<std::size_t>(k)];
        std::vector<Index> pos;
        if (const auto* s = std::get_if<Slice>(&it)) {
            pos = slice_positions(*s, size);
        } else if (const auto* l = std::get_if<IndexList>(&it)) {
            for (Index v : *l) pos.push_back(normalize_index(v, size, k));
            if (std::set<Index>(pos.begin(), pos.end()).size() != pos.size())
                throw ContractViolation("setitem: duplicate positions in an index list");
        } else {
            pos.push_back(normalize_index(std::get<Index>(it), size, k));
        }
        const bool is_int = std::holds_alternative<Index>(it);
        if (!is_int) region.push_back(static_cast<Index>(pos.size()));
        fixed.push_back(is_int);
        selected.push_back(std::move(pos));
    }

    // Region-shaped value with unit modes where integers fixed a position.
    TnTensor embedded = [&]() {
        if (region.empty()) {
            double c = 0.0;
            if (const auto* d = std::get_if<double>(&value)) {
                c = *d;
            } else {
                const auto& v = std::get<TnTensor>(value);
                require(v.numel() == 1 && !v.batched(), "setitem: a single-element region needs a scalar value");
                c = full(v)[0];
            }
            return constant(Shape(static_cast<std::size_t>(n), 1), c);
        }
        TnTensor v = std::holds_alternative<double>(value) ? constant(region, std::get<double>(value))
                                                           : broadcast_to(std::get<TnTensor>(value), region);
        std::vector<IndexItem> insert;
        for (Index k = 0; k < n; ++k) {
            if (fixed[static_cast<std::size_t>(k)]) insert.emplace_back(NewAxis{});
            else insert.emplace_back(Slice{});
        }
        if (std::find(fixed.begin(), fixed.end(), true) == fixed.end()) return v;
        return std::get<TnTensor>(getitem(v, IndexSpec(insert)));
    }();

    DenseTensor ind_data;
    std::vector<std::vector<double>> indicators;
    for (Index k = 0; k < n; ++k) {
        const auto& pos = selected[static_cast<std::size_t>(k)];
        const Index size = shape[static_cast<std::size_t>(k)];
        DenseTensor scatter({size, static_cast<Index>(pos.size())});
        std::vector<double> ind(static_cast<std::size_t>(size), 0.0);
        for (std::size_t l = 0; l < pos.size(); ++l) {
            scatter.at({pos[l], static_cast<Index>(l)}) = 1.0;
            ind[static_cast<std::size_t>(pos[l])] = 1.0;
        }
        embedded = ttm(embedded, scatter, k);
        indicators.push_back(std::move(ind));
    }
    const TnTensor mask = outer(indicators);
    return add(subtract(t, hadamard(t, mask)), embedded);
}

void assign(TnTensor& t, const IndexSpec& spec, const SetValue& value) { t = setitem(t, spec, value); }

void add_assign(TnTensor& t, const IndexSpec& spec, const SetValue& value) {
    const TensorOrDense current = getitem(t, spec);
    if (const auto* d = std::get_if<DenseTensor>(&current)) {
        require(!t.batched(), "add_assign: batched single-element regions are not supported");
        const double inc = std::holds_alternative<double>(value) ? std::get<double>(value) : full(std::get<TnTensor>(value))[0];
        t = setitem(t, spec, (*d)[0] + inc);
        return;
    }
    const auto& region = std::get<TnTensor>(current);
    const TnTensor updated = std::holds_alternative<double>(value) ? add_scalar(region, std::get<double>(value))
                                                                   : add(region, std::get<TnTensor>(value));
    t = setitem(t, spec, updated);
}

}  // namespace tnt
