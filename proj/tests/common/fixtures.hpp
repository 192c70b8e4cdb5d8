#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tnt/tnt.hpp"

namespace fixtures {

using tnt::DenseTensor;
using tnt::Index;
using tnt::ModeNode;
using tnt::Rng;
using tnt::Shape;
using tnt::TnTensor;

inline Index uniform(Rng& rng, Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); }

inline DenseTensor normal(const Shape& shape, Rng& rng) {
    std::normal_distribution<double> dist;
    DenseTensor out(shape);
    for (Index i = 0; i < out.numel(); ++i) out[i] = dist(rng);
    return out;
}

/// Random chain mixing TT and CP nodes, some with Tucker factors.
/// `batch` > 0 adds a batch mode.
inline TnTensor random_blended_shape(Rng& rng, const Shape& phys, Index batch = 0, Index max_rank = 3) {
    const auto n = static_cast<Index>(phys.size());
    std::vector<bool> cp(static_cast<std::size_t>(n));
    for (auto&& c : cp) c = uniform(rng, 0, 2) == 0;
    const Index r_cp = uniform(rng, 1, max_rank);
    std::vector<Index> edge(static_cast<std::size_t>(n + 1), 1);
    for (Index e = 1; e < n; ++e) {
        const bool touches_cp = cp[static_cast<std::size_t>(e - 1)] || cp[static_cast<std::size_t>(e)];
        edge[static_cast<std::size_t>(e)] = touches_cp ? r_cp : uniform(rng, 1, max_rank);
    }
    std::vector<ModeNode> nodes;
    for (Index k = 0; k < n; ++k) {
        const Index j = phys[static_cast<std::size_t>(k)];
        const bool factor = uniform(rng, 0, 2) == 0;
        const Index inner = factor ? uniform(rng, 1, std::max<Index>(1, j)) : j;
        const Index rl = edge[static_cast<std::size_t>(k)], rr = edge[static_cast<std::size_t>(k + 1)];
        Shape core_shape = cp[static_cast<std::size_t>(k)] ? Shape{inner, r_cp} : Shape{rl, inner, rr};
        if (batch > 0) core_shape.insert(core_shape.begin(), batch);
        DenseTensor core = normal(core_shape, rng);
        ModeNode node = cp[static_cast<std::size_t>(k)]
                            ? (batch > 0 ? ModeNode::cp_batched(std::move(core)) : ModeNode::cp(std::move(core)))
                            : (batch > 0 ? ModeNode::tt_batched(std::move(core)) : ModeNode::tt(std::move(core)));
        if (factor) {
            Shape fs{j, inner};
            if (batch > 0) fs.insert(fs.begin(), batch);
            node = node.with_factor(normal(fs, rng));
        }
        nodes.push_back(std::move(node));
    }
    return TnTensor(std::move(nodes));
}

/// Same as random_blended_shape with a random shape.
inline TnTensor random_blended(Rng& rng, Index max_modes = 5, Index max_numel = 100000, Index batch = 0,
                               Index max_rank = 3) {
    const Index n = uniform(rng, 1, max_modes);
    Shape phys;
    Index total = 1;
    for (Index k = 0; k < n; ++k) {
        Index s = uniform(rng, 1, 6);
        if (total * s > max_numel) s = 1;
        phys.push_back(s);
        total *= s;
    }
    return random_blended_shape(rng, phys, batch, max_rank);
}

/// Random shape with `n` modes of sizes in [lo, hi].
inline Shape random_shape(Rng& rng, Index n, Index lo, Index hi) {
    Shape s;
    for (Index k = 0; k < n; ++k) s.push_back(uniform(rng, lo, hi));
    return s;
}

inline TnTensor random_tt_ranks(Rng& rng, const Shape& shape, Index max_rank) {
    std::vector<Index> ranks;
    for (std::size_t k = 1; k < shape.size(); ++k) ranks.push_back(uniform(rng, 1, max_rank));
    return tnt::random_tt(shape, ranks, rng);
}

inline double rel(const DenseTensor& a, const DenseTensor& b) { return tnt::relative_error(a, b); }

inline DenseTensor as_dense(const tnt::TensorOrDense& r) {
    if (const auto* t = std::get_if<TnTensor>(&r)) return tnt::full(*t);
    return std::get<DenseTensor>(r);
}

/// Internal ranks (edges 1..N-1).
inline std::vector<Index> internal_ranks(const TnTensor& t) {
    auto r = t.ranks();
    return {r.begin() + 1, r.end() - 1};
}

}  // namespace fixtures
