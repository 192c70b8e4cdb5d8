#include "tnt/random.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "detail.hpp"

namespace tnt {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("TNTZ_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ContractViolation(std::string("TNTZ_SEED is not an unsigned integer: ") + env);
        }
    }
    return 0;
}

DenseTensor random_dense(const Shape& shape, Rng& rng) {
    std::normal_distribution<double> normal;
    DenseTensor out(shape);
    for (auto& v : out.data()) v = normal(rng);
    return out;
}

TnTensor random_tt(const Shape& shape, const std::vector<Index>& ranks, Rng& rng) {
    detail::require(!shape.empty(), "random_tt: empty shape");
    detail::require(ranks.size() + 1 == shape.size(), "random_tt: need N-1 internal ranks");
    std::vector<ModeNode> nodes;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        const Index rl = k == 0 ? 1 : ranks[k - 1];
        const Index rr = k + 1 == shape.size() ? 1 : ranks[k];
        DenseTensor core = random_dense({rl, shape[k], rr}, rng);
        const double scale = 1.0 / std::sqrt(static_cast<double>(rl));
        for (auto& v : core.data()) v *= scale;
        nodes.push_back(ModeNode::tt(std::move(core)));
    }
    return TnTensor(std::move(nodes));
}

TnTensor random_tt(const Shape& shape, Index rank, Rng& rng) {
    return random_tt(shape, std::vector<Index>(shape.empty() ? 0 : shape.size() - 1, rank), rng);
}

TnTensor random_tt_batched(Index batch, const Shape& shape, Index rank, Rng& rng) {
    std::vector<TnTensor> items;
    for (Index b = 0; b < batch; ++b) items.push_back(random_tt(shape, rank, rng));
    return TnTensor::stack(items);
}

TnTensor random_cp(const Shape& shape, Index rank, Rng& rng) {
    std::vector<ModeNode> nodes;
    for (Index size : shape) nodes.push_back(ModeNode::cp(random_dense({size, rank}, rng)));
    return TnTensor(std::move(nodes));
}

TnTensor constant(const Shape& shape, double value) {
    detail::require(!shape.empty(), "constant: empty shape");
    std::vector<ModeNode> nodes;
    for (std::size_t k = 0; k < shape.size(); ++k)
        nodes.push_back(ModeNode::tt(DenseTensor({1, shape[k], 1}, k == 0 ? value : 1.0)));
    return TnTensor(std::move(nodes));
}

TnTensor zeros(const Shape& shape) { return constant(shape, 0.0); }
TnTensor ones(const Shape& shape) { return constant(shape, 1.0); }

TnTensor outer(const std::vector<std::vector<double>>& vectors) {
    std::vector<ModeNode> nodes;
    for (const auto& v : vectors) {
        nodes.push_back(ModeNode::tt(DenseTensor({1, static_cast<Index>(v.size()), 1}, v)));
    }
    return TnTensor(std::move(nodes));
}

}  // namespace tnt
