#include "tnt/arithmetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "detail.hpp"
#include "tnt/indexing.hpp"
#include "tnt/random.hpp"

namespace tnt {

using detail::Chain;
using detail::ConstRowMap;
using detail::Core;
using detail::require;
using detail::RowMap;
using detail::RowMatrix;

namespace {

bool is_plain(const TnTensor& t) { return t.all_tt() && !t.any_factor(); }

TnTensor replicate(const TnTensor& t, Index batch) {
    std::vector<TnTensor> items(static_cast<std::size_t>(batch), t);
    return TnTensor::stack(items);
}

// Brings both operands to a common batch layout and a common broadcast shape.
std::pair<TnTensor, TnTensor> align(const TnTensor& a, const TnTensor& b) {
    if (a.batched() && b.batched())
        require(a.batch_count() == b.batch_count(), "batch sizes differ: " + std::to_string(a.batch_count()) +
                                                        " vs " + std::to_string(b.batch_count()));
    const Shape target = broadcast_shapes(a.shape(), b.shape());
    TnTensor ea = a.shape() == target ? a : broadcast_to(a, target);
    TnTensor eb = b.shape() == target ? b : broadcast_to(b, target);
    if (ea.batched() && !eb.batched()) eb = replicate(eb, ea.batch_count());
    if (eb.batched() && !ea.batched()) ea = replicate(ea, eb.batch_count());
    return {std::move(ea), std::move(eb)};
}

ModeNode make_tt_node(bool batched, Index batch, Index rl, Index n, Index rr, std::vector<double> data) {
    if (batched) return ModeNode::tt_batched(DenseTensor({batch, rl, n, rr}, std::move(data)));
    return ModeNode::tt(DenseTensor({rl, n, rr}, std::move(data)));
}

// Both operands plain TT with identical shape and batch.
TnTensor add_plain(const TnTensor& a, const TnTensor& b) {
    const Index n = a.ndim();
    const Index batch = a.batch_count();
    std::vector<ModeNode> nodes;
    nodes.reserve(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
        const auto& na = a.node(k);
        const auto& nb = b.node(k);
        const Index size = na.size();
        const Index al = na.rank_left(), ar = na.rank_right();
        const Index bl = nb.rank_left(), br = nb.rank_right();
        const Index rl = (k == 0) ? 1 : al + bl;
        const Index rr = (k == n - 1) ? 1 : ar + br;
        const Index per = rl * size * rr;
        std::vector<double> out(static_cast<std::size_t>(batch * per), 0.0);
        const double* pa = na.core().data().data();
        const double* pb = nb.core().data().data();
        const Index pera = al * size * ar;
        const Index perb = bl * size * br;
        for (Index e = 0; e < batch; ++e) {
            double* dst = out.data() + e * per;
            const double* sa = pa + e * pera;
            const double* sb = pb + e * perb;
            if (n == 1) {
                for (Index i = 0; i < size; ++i) dst[i] = sa[i] + sb[i];
                continue;
            }
            // Block placement: a occupies the leading rank block, b the trailing one.
            const Index b_row = (k == 0) ? 0 : al;
            const Index b_col = (k == n - 1) ? 0 : ar;
            for (Index x = 0; x < al; ++x)
                for (Index i = 0; i < size; ++i)
                    std::copy_n(sa + (x * size + i) * ar, ar, dst + (x * size + i) * rr);
            for (Index x = 0; x < bl; ++x)
                for (Index i = 0; i < size; ++i)
                    std::copy_n(sb + (x * size + i) * br, br, dst + ((b_row + x) * size + i) * rr + b_col);
        }
        nodes.push_back(make_tt_node(a.batched(), batch, rl, size, rr, std::move(out)));
    }
    return TnTensor(std::move(nodes));
}

TnTensor hadamard_plain(const TnTensor& a, const TnTensor& b) {
    const Index n = a.ndim();
    const Index batch = a.batch_count();
    std::vector<ModeNode> nodes;
    nodes.reserve(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
        const auto& na = a.node(k);
        const auto& nb = b.node(k);
        const Index size = na.size();
        const Index al = na.rank_left(), ar = na.rank_right();
        const Index bl = nb.rank_left(), br = nb.rank_right();
        const Index rl = al * bl, rr = ar * br;
        const Index per = rl * size * rr;
        std::vector<double> out(static_cast<std::size_t>(batch * per));
        const Index pera = al * size * ar;
        const Index perb = bl * size * br;
        for (Index e = 0; e < batch; ++e) {
            const double* sa = na.core().data().data() + e * pera;
            const double* sb = nb.core().data().data() + e * perb;
            double* dst = out.data() + e * per;
            for (Index x = 0; x < al; ++x)
                for (Index y = 0; y < bl; ++y)
                    for (Index i = 0; i < size; ++i) {
                        const double* ra = sa + (x * size + i) * ar;
                        const double* rb = sb + (y * size + i) * br;
                        double* row = dst + ((x * bl + y) * size + i) * rr;
                        for (Index u = 0; u < ar; ++u)
                            for (Index v = 0; v < br; ++v) row[u * br + v] = ra[u] * rb[v];
                    }
        }
        nodes.push_back(make_tt_node(a.batched(), batch, rl, size, rr, std::move(out)));
    }
    return TnTensor(std::move(nodes));
}

bool plain_cp(const TnTensor& t) {
    return std::all_of(t.nodes().begin(), t.nodes().end(),
                       [](const ModeNode& n) { return n.is_cp() && !n.has_factor(); });
}

TnTensor hadamard_cp(const TnTensor& a, const TnTensor& b) {
    std::vector<ModeNode> nodes;
    const Index batch = a.batch_count();
    for (Index k = 0; k < a.ndim(); ++k) {
        const auto& na = a.node(k);
        const auto& nb = b.node(k);
        const Index size = na.size(), ra = na.cp_rank(), rb = nb.cp_rank();
        std::vector<double> out(static_cast<std::size_t>(batch * size * ra * rb));
        for (Index e = 0; e < batch; ++e) {
            const double* ua = na.core().data().data() + e * size * ra;
            const double* ub = nb.core().data().data() + e * size * rb;
            double* dst = out.data() + e * size * ra * rb;
            for (Index i = 0; i < size; ++i)
                for (Index x = 0; x < ra; ++x)
                    for (Index y = 0; y < rb; ++y) dst[(i * ra + x) * rb + y] = ua[i * ra + x] * ub[i * rb + y];
        }
        if (a.batched()) nodes.push_back(ModeNode::cp_batched(DenseTensor({batch, size, ra * rb}, std::move(out))));
        else nodes.push_back(ModeNode::cp(DenseTensor({size, ra * rb}, std::move(out))));
    }
    return TnTensor(std::move(nodes));
}

ModeNode rebuild(const ModeNode& like, DenseTensor core) {
    ModeNode out = like.is_tt() ? (like.batched() ? ModeNode::tt_batched(std::move(core)) : ModeNode::tt(std::move(core)))
                                : (like.batched() ? ModeNode::cp_batched(std::move(core)) : ModeNode::cp(std::move(core)));
    if (like.has_factor()) out = out.with_factor(like.factor());
    return out;
}

std::vector<ModeNode> copy_nodes(const TnTensor& t) { return t.nodes(); }

double chain_dot(const Chain& a, const Chain& b) {
    RowMatrix w = RowMatrix::Ones(1, 1);
    for (std::size_t k = 0; k < a.size(); ++k) {
        const Core& ca = a[k];
        const Core& cb = b[k];
        // m1[a', i, beta] = sum_alpha w[alpha, a'] * A[alpha, i, beta]
        RowMatrix m1 = w.transpose() * ca.right_unfolding();
        const ConstRowMap m1r(m1.data(), cb.rl * ca.n, ca.rr);
        w = m1r.transpose() * cb.left_unfolding();
    }
    return w(0, 0);
}

void check_mode(const TnTensor& t, Index mode, const char* op) {
    require(mode >= 0 && mode < t.ndim(), std::string(op) + ": mode " + std::to_string(mode) + " out of range");
}

}  // namespace

// ---------------------------------------------------------------------------

TnTensor add(const TnTensor& a, const TnTensor& b) {
    auto [ea, eb] = align(a, b);
    require(ea.ndim() == eb.ndim(), "add: dimension mismatch");
    if (!is_plain(ea)) ea = absorb_factors(ea);
    if (!is_plain(eb)) eb = absorb_factors(eb);
    return add_plain(ea, eb);
}

TnTensor subtract(const TnTensor& a, const TnTensor& b) { return add(a, negate(b)); }

TnTensor hadamard(const TnTensor& a, const TnTensor& b) {
    auto [ea, eb] = align(a, b);
    if (plain_cp(ea) && plain_cp(eb)) return hadamard_cp(ea, eb);
    if (!is_plain(ea)) ea = absorb_factors(ea);
    if (!is_plain(eb)) eb = absorb_factors(eb);
    return hadamard_plain(ea, eb);
}

TnTensor scale(const TnTensor& t, double c) {
    auto nodes = copy_nodes(t);
    DenseTensor core = nodes.front().core();
    for (auto& v : core.data()) v *= c;
    nodes.front() = rebuild(nodes.front(), std::move(core));
    return TnTensor(std::move(nodes));
}

TnTensor negate(const TnTensor& t) { return scale(t, -1.0); }

TnTensor add_scalar(const TnTensor& t, double c) { return add(t, constant(t.shape(), c)); }

std::vector<double> batched_dot(const TnTensor& a, const TnTensor& b) {
    require(a.shape() == b.shape(), "dot: shape mismatch " + detail::shape_string(a.shape()) + " vs " +
                                        detail::shape_string(b.shape()));
    require(a.batch_count() == b.batch_count() || !a.batched() || !b.batched(), "dot: batch sizes differ");
    const Index batch = std::max(a.batch_count(), b.batch_count());
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(batch));
    for (Index e = 0; e < batch; ++e) {
        out.push_back(chain_dot(detail::plain_chain(a, a.batched() ? e : 0), detail::plain_chain(b, b.batched() ? e : 0)));
    }
    return out;
}

double dot(const TnTensor& a, const TnTensor& b) {
    require(!a.batched() && !b.batched(), "dot: use batched_dot for batched tensors");
    return batched_dot(a, b).front();
}

double norm(const TnTensor& t) {
    require(!t.batched(), "norm: use batched_norm for batched tensors");
    return batched_norm(t).front();
}

std::vector<double> batched_norm(const TnTensor& t) {
    std::vector<double> out = batched_dot(t, t);
    for (auto& v : out) v = std::sqrt(std::max(v, 0.0));
    return out;
}

// ---------------------------------------------------------------------------

TnTensor ttm(const TnTensor& t, const DenseTensor& matrix, Index mode) {
    check_mode(t, mode, "ttm");
    require(matrix.ndim() == 2, "ttm: matrix must be 2-dimensional");
    const auto& node = t.node(mode);
    require(matrix.dim(1) == node.physical_size(),
            "ttm: matrix has " + std::to_string(matrix.dim(1)) + " columns, mode " + std::to_string(mode) +
                " has size " + std::to_string(node.physical_size()));
    const ConstRowMap m(matrix.data().data(), matrix.dim(0), matrix.dim(1));
    const Index s = matrix.dim(0);
    const Index batch = t.batch_count();
    auto nodes = copy_nodes(t);

    if (node.has_factor()) {
        const Index j = node.factor_rows(), i = node.size();
        std::vector<double> out(static_cast<std::size_t>(batch * s * i));
        for (Index e = 0; e < batch; ++e) {
            RowMap(out.data() + e * s * i, s, i).noalias() = m * ConstRowMap(node.factor().data().data() + e * j * i, j, i);
        }
        DenseTensor f = node.batched() ? DenseTensor({batch, s, i}, std::move(out)) : DenseTensor({s, i}, std::move(out));
        nodes[static_cast<std::size_t>(mode)] = node.without_factor().with_factor(std::move(f));
        return TnTensor(std::move(nodes));
    }

    const Index size = node.size();
    if (node.is_cp()) {
        const Index r = node.cp_rank();
        std::vector<double> out(static_cast<std::size_t>(batch * s * r));
        for (Index e = 0; e < batch; ++e)
            RowMap(out.data() + e * s * r, s, r).noalias() = m * ConstRowMap(node.core().data().data() + e * size * r, size, r);
        DenseTensor c = node.batched() ? DenseTensor({batch, s, r}, std::move(out)) : DenseTensor({s, r}, std::move(out));
        nodes[static_cast<std::size_t>(mode)] = rebuild(node, std::move(c));
        return TnTensor(std::move(nodes));
    }

    const Index rl = node.rank_left(), rr = node.rank_right();
    std::vector<double> out(static_cast<std::size_t>(batch * rl * s * rr));
    for (Index e = 0; e < batch; ++e)
        for (Index a = 0; a < rl; ++a) {
            const double* src = node.core().data().data() + (e * rl + a) * size * rr;
            RowMap(out.data() + (e * rl + a) * s * rr, s, rr).noalias() = m * ConstRowMap(src, size, rr);
        }
    DenseTensor c = node.batched() ? DenseTensor({batch, rl, s, rr}, std::move(out)) : DenseTensor({rl, s, rr}, std::move(out));
    nodes[static_cast<std::size_t>(mode)] = rebuild(node, std::move(c));
    return TnTensor(std::move(nodes));
}

TensorOrDense ttv(const TnTensor& t, std::span<const double> v, Index mode) {
    check_mode(t, mode, "ttv");
    const Index n = t.ndim();
    require(static_cast<Index>(v.size()) == t.node(mode).physical_size(),
            "ttv: vector length " + std::to_string(v.size()) + " does not match mode size " +
                std::to_string(t.node(mode).physical_size()));
    const Index batch = t.batch_count();
    const Eigen::Map<const Eigen::VectorXd> vec(v.data(), static_cast<Index>(v.size()));

    // Per batch element: the rank matrix left after contracting mode `mode`.
    const DenseTensor eff = effective_core(t, mode);
    std::vector<RowMatrix> w;
    const Index rl = t.rank_left(mode), rr = t.rank_right(mode), j = t.node(mode).physical_size();
    for (Index e = 0; e < batch; ++e) {
        RowMatrix m = RowMatrix::Zero(rl, rr);
        const double* g = eff.data().data() + e * rl * j * rr;
        for (Index a = 0; a < rl; ++a) m.row(a) = vec.transpose() * ConstRowMap(g + a * j * rr, j, rr);
        w.push_back(std::move(m));
    }

    if (n == 1) {
        if (!t.batched()) return DenseTensor::scalar(w.front()(0, 0));
        DenseTensor out({batch});
        for (Index e = 0; e < batch; ++e) out[e] = w[static_cast<std::size_t>(e)](0, 0);
        return out;
    }

    // Absorb into a neighbour, promoted to TT form (its Tucker factor is kept).
    const Index nb = mode > 0 ? mode - 1 : 1;
    const auto& neighbour = t.node(nb);
    DenseTensor ncore = neighbour.is_tt() ? neighbour.core() : promote_cp_node(neighbour, cp_position(nb, n));
    const Index size = neighbour.size();
    const Index nl = t.rank_left(nb), nr = t.rank_right(nb);
    const Index out_l = mode > 0 ? nl : rl;
    const Index out_r = mode > 0 ? rr : nr;
    std::vector<double> out(static_cast<std::size_t>(batch * out_l * size * out_r));
    for (Index e = 0; e < batch; ++e) {
        const double* src = ncore.data().data() + e * nl * size * nr;
        const auto& m = w[static_cast<std::size_t>(e)];
        if (mode > 0) {
            RowMap(out.data() + e * out_l * size * out_r, nl * size, rr).noalias() = ConstRowMap(src, nl * size, nr) * m;
        } else {
            RowMap(out.data() + e * out_l * size * out_r, rl, size * nr).noalias() = m * ConstRowMap(src, nl, size * nr);
        }
    }
    ModeNode merged = t.batched() ? ModeNode::tt_batched(DenseTensor({batch, out_l, size, out_r}, std::move(out)))
                                  : ModeNode::tt(DenseTensor({out_l, size, out_r}, std::move(out)));
    if (neighbour.has_factor()) merged = merged.with_factor(neighbour.factor());

    std::vector<ModeNode> nodes;
    for (Index k = 0; k < n; ++k) {
        if (k == mode) continue;
        nodes.push_back(k == nb ? merged : t.node(k));
    }
    return TnTensor(std::move(nodes));
}

TensorOrDense sum(const TnTensor& t, std::vector<Index> modes) {
    std::sort(modes.begin(), modes.end(), std::greater<>());
    require(std::adjacent_find(modes.begin(), modes.end()) == modes.end(), "sum: modes must be distinct");
    for (Index m : modes) check_mode(t, m, "sum");
    TensorOrDense cur = t;
    for (Index m : modes) {
        const TnTensor& tt = std::get<TnTensor>(cur);
        const std::vector<double> ones_v(static_cast<std::size_t>(tt.node(m).physical_size()), 1.0);
        cur = ttv(tt, ones_v, m);
    }
    return cur;
}

double sum(const TnTensor& t) {
    require(!t.batched(), "sum: batched tensors reduce to one value per element; use sum(t, modes)");
    std::vector<Index> all(static_cast<std::size_t>(t.ndim()));
    std::iota(all.begin(), all.end(), Index{0});
    return std::get<DenseTensor>(sum(t, all))[0];
}

double mean(const TnTensor& t) {
    const Index count = t.numel();
    require(count > 0, "mean: empty tensor");
    return sum(t) / static_cast<double>(count);
}

// ---------------------------------------------------------------------------

TnTensor pad(const TnTensor& t, Index mode, Index before, Index after) {
    check_mode(t, mode, "pad");
    require(before >= 0 && after >= 0, "pad: counts must be >= 0");
    if (before == 0 && after == 0) return t;
    const auto& node = t.node(mode);
    const Index batch = t.batch_count();
    auto nodes = copy_nodes(t);

    // Pads axis `axis` of a (per-element) row-major block [outer, size, inner].
    auto pad_axis = [&](const DenseTensor& src, Index outer, Index size, Index inner) {
        const Index ns = size + before + after;
        std::vector<double> out(static_cast<std::size_t>(batch * outer * ns * inner), 0.0);
        for (Index e = 0; e < batch * outer; ++e)
            std::copy_n(src.data().data() + e * size * inner, size * inner, out.data() + (e * ns + before) * inner);
        return std::pair{ns, std::move(out)};
    };

    if (node.has_factor()) {
        const Index i = node.size();
        auto [ns, out] = pad_axis(node.factor(), 1, node.factor_rows(), i);
        DenseTensor f = node.batched() ? DenseTensor({batch, ns, i}, std::move(out)) : DenseTensor({ns, i}, std::move(out));
        nodes[static_cast<std::size_t>(mode)] = node.without_factor().with_factor(std::move(f));
    } else if (node.is_cp()) {
        const Index r = node.cp_rank();
        auto [ns, out] = pad_axis(node.core(), 1, node.size(), r);
        DenseTensor c = node.batched() ? DenseTensor({batch, ns, r}, std::move(out)) : DenseTensor({ns, r}, std::move(out));
        nodes[static_cast<std::size_t>(mode)] = rebuild(node, std::move(c));
    } else {
        const Index rl = node.rank_left(), rr = node.rank_right();
        auto [ns, out] = pad_axis(node.core(), rl, node.size(), rr);
        DenseTensor c = node.batched() ? DenseTensor({batch, rl, ns, rr}, std::move(out))
                                       : DenseTensor({rl, ns, rr}, std::move(out));
        nodes[static_cast<std::size_t>(mode)] = rebuild(node, std::move(c));
    }
    return TnTensor(std::move(nodes));
}

TnTensor concat(const TnTensor& a, const TnTensor& b, Index mode) {
    check_mode(a, mode, "concat");
    require(a.ndim() == b.ndim(), "concat: dimension mismatch");
    Shape sa = a.shape(), sb = b.shape();
    const Index ia = sa[static_cast<std::size_t>(mode)], ib = sb[static_cast<std::size_t>(mode)];
    sa[static_cast<std::size_t>(mode)] = sb[static_cast<std::size_t>(mode)] = 0;
    require(sa == sb, "concat: shapes differ outside mode " + std::to_string(mode));
    return add(pad(a, mode, 0, ib), pad(b, mode, ia, 0));
}

namespace {

// Exchanges the physical indices of cores k and k+1; the new middle rank is
// truncated with an absolute Frobenius budget.
void swap_adjacent(Chain& chain, std::size_t k, double budget) {
    const Core& a = chain[k];
    const Core& b = chain[k + 1];
    const RowMatrix merged = a.left_unfolding() * b.right_unfolding();  // (rl*I) x (J*rr)
    const Index rl = a.rl, ni = a.n, nj = b.n, rr = b.rr;
    RowMatrix swapped(rl * nj, ni * rr);
    for (Index x = 0; x < rl; ++x)
        for (Index i = 0; i < ni; ++i)
            for (Index j = 0; j < nj; ++j)
                for (Index c = 0; c < rr; ++c) swapped(x * nj + j, i * rr + c) = merged(x * ni + i, j * rr + c);
    const detail::Svd d = detail::svd(swapped);
    const Index r = detail::truncation_rank(d.s, budget, swapped.rows(), swapped.cols());
    Core left(rl, nj, r);
    left.left_unfolding() = d.u.leftCols(r);
    Core right(r, ni, rr);
    right.right_unfolding() = d.s.head(r).asDiagonal() * d.vt.topRows(r);
    chain[k] = std::move(left);
    chain[k + 1] = std::move(right);
}

}  // namespace

TnTensor transpose(const TnTensor& t, std::span<const Index> perm, double eps) {
    const Index n = t.ndim();
    require(static_cast<Index>(perm.size()) == n, "transpose: permutation length must equal N");
    require(eps >= 0.0, "transpose: eps must be >= 0");
    std::vector<Index> target(static_cast<std::size_t>(n), -1);
    for (Index p = 0; p < n; ++p) {
        const Index m = perm[static_cast<std::size_t>(p)];
        require(m >= 0 && m < n && target[static_cast<std::size_t>(m)] == -1, "transpose: invalid permutation");
        target[static_cast<std::size_t>(m)] = p;
    }
    // Bubble sort on target positions gives the minimal adjacent swap sequence.
    std::vector<Index> keys = target;
    std::vector<std::size_t> swaps;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t k = 0; k + 1 < keys.size(); ++k) {
            if (keys[k] > keys[k + 1]) {
                std::swap(keys[k], keys[k + 1]);
                swaps.push_back(k);
                changed = true;
            }
        }
    }
    if (swaps.empty()) return t;

    std::vector<Chain> chains = detail::plain_chains(t);
    for (auto& chain : chains) {
        const double nrm = std::sqrt(std::max(chain_dot(chain, chain), 0.0));
        const double budget = eps * nrm / static_cast<double>(swaps.size());
        for (std::size_t k : swaps) swap_adjacent(chain, k, budget);
    }
    return detail::from_chains(chains, t.batched());
}

DenseTensor correlation_matrix(std::span<const double> kernel, Index size, ConvPadding padding) {
    const auto len = static_cast<Index>(kernel.size());
    require(len >= 1, "conv_mode: kernel must not be empty");
    if (padding == ConvPadding::valid) {
        require(len <= size, "conv_mode: kernel longer than the mode under valid padding");
        const Index out = size - len + 1;
        DenseTensor m({out, size});
        for (Index s = 0; s < out; ++s)
            for (Index l = 0; l < len; ++l) m.at({s, s + l}) = kernel[static_cast<std::size_t>(l)];
        return m;
    }
    const Index left = (len - 1) / 2;
    DenseTensor m({size, size});
    for (Index s = 0; s < size; ++s)
        for (Index l = 0; l < len; ++l) {
            const Index col = s + l - left;
            if (col >= 0 && col < size) m.at({s, col}) = kernel[static_cast<std::size_t>(l)];
        }
    return m;
}

TnTensor conv_mode(const TnTensor& t, std::span<const double> kernel, Index mode, ConvPadding padding) {
    check_mode(t, mode, "conv_mode");
    return ttm(t, correlation_matrix(kernel, t.node(mode).physical_size(), padding), mode);
}

}  // namespace tnt
