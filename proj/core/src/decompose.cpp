#include "tnt/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "detail.hpp"

namespace tnt {

using detail::Chain;
using detail::ConstRowMap;
using detail::Core;
using detail::require;
using detail::RowMap;
using detail::RowMatrix;

TruncationSpec TruncationSpec::relative(double eps) {
    TruncationSpec s;
    s.mode = Mode::relative_eps;
    s.eps = eps;
    s.validate();
    return s;
}

TruncationSpec TruncationSpec::ranks(std::vector<Index> caps) {
    TruncationSpec s;
    s.mode = Mode::max_ranks;
    s.max_ranks = std::move(caps);
    s.validate();
    return s;
}

Index TruncationSpec::cap(Index edge) const {
    if (mode != Mode::max_ranks || max_ranks.empty()) return -1;
    if (max_ranks.size() == 1) return max_ranks.front();
    require(edge >= 0 && edge < static_cast<Index>(max_ranks.size()), "TruncationSpec: no cap for edge");
    return max_ranks[static_cast<std::size_t>(edge)];
}

void TruncationSpec::validate() const {
    if (mode == Mode::relative_eps) {
        require(eps >= 0.0 && std::isfinite(eps), "TruncationSpec: eps must be finite and >= 0");
    } else {
        require(!max_ranks.empty(), "TruncationSpec: max_ranks mode needs at least one cap");
        for (Index c : max_ranks) require(c >= 1, "TruncationSpec: rank caps must be >= 1");
    }
}

namespace {

void check_edge_caps(const TruncationSpec& spec, Index n) {
    if (spec.mode == TruncationSpec::Mode::max_ranks && spec.max_ranks.size() > 1) {
        require(static_cast<Index>(spec.max_ranks.size()) == n - 1,
                "TruncationSpec: per-edge caps must list N-1 entries");
    }
}

Chain zero_chain(const Shape& shape) {
    Chain chain;
    for (Index s : shape) chain.emplace_back(1, s, 1);
    return chain;
}

Chain tt_svd_chain(const DenseTensor& x, const TruncationSpec& spec) {
    const Shape& shape = x.shape();
    const Index n = x.ndim();
    const double nrm = x.frobenius_norm();
    if (nrm == 0.0) return zero_chain(shape);

    const double delta = n > 1 ? spec.budget_eps() * nrm / std::sqrt(static_cast<double>(n - 1)) : 0.0;
    Chain chain;
    RowMatrix rem = ConstRowMap(x.data().data(), 1, x.numel());
    Index r = 1;
    for (Index k = 0; k + 1 < n; ++k) {
        const Index rows = r * shape[static_cast<std::size_t>(k)];
        const Index cols = rem.size() / rows;
        const ConstRowMap a(rem.data(), rows, cols);
        const detail::Svd d = detail::svd(a);
        const Index rk = detail::truncation_rank(d.s, delta, rows, cols, spec.cap(k));
        Core core(r, shape[static_cast<std::size_t>(k)], rk);
        core.left_unfolding() = d.u.leftCols(rk);
        chain.push_back(std::move(core));
        rem = d.s.head(rk).asDiagonal() * d.vt.topRows(rk);
        r = rk;
    }
    Core last(r, shape.back(), 1);
    std::copy(rem.data(), rem.data() + rem.size(), last.data.begin());
    chain.push_back(std::move(last));
    return chain;
}

}  // namespace

TnTensor tt_svd(const DenseTensor& x, const TruncationSpec& spec) {
    spec.validate();
    require(x.ndim() >= 1, "tt_svd: tensor must have at least one mode");
    check_edge_caps(spec, x.ndim());
    return detail::from_chain(tt_svd_chain(x, spec));
}

TnTensor tt_svd_batched(const DenseTensor& x, const TruncationSpec& spec) {
    spec.validate();
    require(x.ndim() >= 2, "tt_svd_batched: need a leading batch mode plus at least one mode");
    require(x.dim(0) >= 1, "tt_svd_batched: batch size must be >= 1");
    check_edge_caps(spec, x.ndim() - 1);
    std::vector<Chain> chains;
    chains.reserve(static_cast<std::size_t>(x.dim(0)));
    for (Index b = 0; b < x.dim(0); ++b) chains.push_back(tt_svd_chain(x.leading_slice(b), spec));
    return detail::from_chains(chains, true);
}

// ---------------------------------------------------------------------------
// CP-ALS

namespace {

using Factors = std::vector<RowMatrix>;

// Visits every multi-index of `shape` in row-major order.
template <typename Fn>
void for_each_index(const Shape& shape, Fn&& fn) {
    const Index total = shape_numel(shape);
    std::vector<Index> idx(shape.size(), 0);
    for (Index flat = 0; flat < total; ++flat) {
        fn(flat, idx);
        for (std::size_t k = shape.size(); k-- > 0;) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
}

RowMatrix mttkrp(const DenseTensor& x, const Factors& u, std::size_t mode, Index rank) {
    RowMatrix m = RowMatrix::Zero(x.dim(static_cast<Index>(mode)), rank);
    Eigen::RowVectorXd prod(rank);
    for_each_index(x.shape(), [&](Index flat, const std::vector<Index>& idx) {
        const double v = x[flat];
        if (v == 0.0) return;
        prod.setConstant(v);
        for (std::size_t j = 0; j < u.size(); ++j) {
            if (j != mode) prod.array() *= u[j].row(idx[j]).array();
        }
        m.row(idx[mode]) += prod;
    });
    return m;
}

double cp_relative_error(const DenseTensor& x, const Factors& u, Index rank, double xnorm) {
    double err = 0.0;
    Eigen::RowVectorXd prod(rank);
    for_each_index(x.shape(), [&](Index flat, const std::vector<Index>& idx) {
        prod.setOnes();
        for (std::size_t j = 0; j < u.size(); ++j) prod.array() *= u[j].row(idx[j]).array();
        const double d = x[flat] - prod.sum();
        err += d * d;
    });
    return xnorm > 0.0 ? std::sqrt(err) / xnorm : std::sqrt(err);
}

struct AlsRun {
    Factors factors;
    double error = 0.0;
    std::vector<double> history;
    bool converged = false;
};

AlsRun als_run(const DenseTensor& x, const CpAlsOptions& opt, std::uint64_t seed, double xnorm) {
    const auto n = static_cast<std::size_t>(x.ndim());
    Rng rng(seed);
    std::normal_distribution<double> normal;
    AlsRun run;
    for (std::size_t k = 0; k < n; ++k) {
        RowMatrix f(x.dim(static_cast<Index>(k)), opt.rank);
        for (Index i = 0; i < f.size(); ++i) f.data()[i] = normal(rng);
        run.factors.push_back(std::move(f));
    }

    double previous = std::numeric_limits<double>::infinity();
    for (Index it = 0; it < opt.max_iters; ++it) {
        for (std::size_t k = 0; k < n; ++k) {
            RowMatrix gram = RowMatrix::Ones(opt.rank, opt.rank);
            for (std::size_t j = 0; j < n; ++j) {
                if (j != k) gram.array() *= (run.factors[j].transpose() * run.factors[j]).array();
            }
            const RowMatrix m = mttkrp(x, run.factors, k, opt.rank);
            run.factors[k] = m * detail::pinv(gram, 1e-12);
            if (k + 1 < n) {
                // Unit columns everywhere but the last factor, which carries the scale.
                for (Index r = 0; r < opt.rank; ++r) {
                    const double cn = run.factors[k].col(r).norm();
                    if (cn > 0.0) {
                        run.factors[k].col(r) /= cn;
                        run.factors[k + 1].col(r) *= cn;
                    }
                }
            }
        }
        run.error = cp_relative_error(x, run.factors, opt.rank, xnorm);
        run.history.push_back(run.error);
        if (previous - run.error < opt.tol) {
            run.converged = true;
            break;
        }
        previous = run.error;
    }
    return run;
}

}  // namespace

CpAlsResult cp_als(const DenseTensor& x, const CpAlsOptions& options) {
    require(options.rank >= 1, "cp_als: rank must be >= 1");
    require(options.max_iters >= 1, "cp_als: max_iters must be >= 1");
    require(options.tol >= 0.0, "cp_als: tol must be >= 0");
    require(options.max_restarts >= 0, "cp_als: max_restarts must be >= 0");
    require(x.ndim() >= 1 && x.numel() > 0, "cp_als: tensor must be non-empty");

    const double xnorm = x.frobenius_norm();
    AlsRun best;
    std::uint64_t best_seed = options.seed;
    Index restarts = 0;
    for (Index attempt = 0; attempt <= options.max_restarts; ++attempt) {
        const std::uint64_t seed = options.seed + static_cast<std::uint64_t>(attempt);
        AlsRun run = als_run(x, options, seed, xnorm);
        if (attempt == 0 || run.error < best.error) {
            best = std::move(run);
            best_seed = seed;
        }
        restarts = attempt;
        // Restart only when the run stalled well above the tolerance.
        if (best.error <= 10.0 * options.tol) break;
    }

    std::vector<ModeNode> nodes;
    for (const auto& f : best.factors) {
        nodes.push_back(ModeNode::cp(DenseTensor({f.rows(), f.cols()}, std::vector<double>(f.data(), f.data() + f.size()))));
    }
    CpAlsResult result{TnTensor(std::move(nodes)), best.error, std::move(best.history), restarts, best_seed};
    return result;
}

// ---------------------------------------------------------------------------
// Tucker

namespace {

// out = x  x_k  m, with m of shape (s, x.dim(k)).
DenseTensor dense_mode_product(const DenseTensor& x, const RowMatrix& m, Index k) {
    const Shape& shape = x.shape();
    const Index p = shape_numel(std::span(shape.data(), static_cast<std::size_t>(k)));
    const Index i = shape[static_cast<std::size_t>(k)];
    const Index q = x.numel() / std::max<Index>(p * i, 1);
    Shape out_shape = shape;
    out_shape[static_cast<std::size_t>(k)] = m.rows();
    DenseTensor out(out_shape);
    for (Index a = 0; a < p; ++a) {
        ConstRowMap src(x.data().data() + a * i * q, i, q);
        RowMap dst(out.data().data() + a * m.rows() * q, m.rows(), q);
        dst.noalias() = m * src;
    }
    return out;
}

}  // namespace

TnTensor tucker_hosvd(const DenseTensor& x, const TruncationSpec& spec) {
    spec.validate();
    const Index n = x.ndim();
    require(n >= 1, "tucker_hosvd: tensor must have at least one mode");
    if (spec.mode == TruncationSpec::Mode::max_ranks && spec.max_ranks.size() > 1) {
        require(static_cast<Index>(spec.max_ranks.size()) == n, "tucker_hosvd: per-mode caps must list N entries");
    }
    const double nrm = x.frobenius_norm();
    const double delta = spec.budget_eps() * nrm / std::sqrt(static_cast<double>(n));

    std::vector<RowMatrix> factors;
    DenseTensor core = x;
    for (Index k = 0; k < n; ++k) {
        std::vector<Index> perm{k};
        for (Index j = 0; j < n; ++j)
            if (j != k) perm.push_back(j);
        const DenseTensor moved = x.permuted(perm);
        const Index rows = x.dim(k);
        const Index cols = rows > 0 ? x.numel() / rows : 0;
        const detail::Svd d = detail::svd(ConstRowMap(moved.data().data(), rows, cols));
        Index rk = 1;
        RowMatrix f;
        if (nrm == 0.0 || d.s.size() == 0) {
            f = RowMatrix::Zero(rows, 1);
            if (rows > 0) f(0, 0) = 1.0;
        } else {
            rk = detail::truncation_rank(d.s, delta, rows, cols, spec.cap(k));
            f = d.u.leftCols(rk);
        }
        factors.push_back(f);
        core = dense_mode_product(core, f.transpose(), k);
    }

    const TnTensor chain = tt_svd(core, TruncationSpec::relative(0.0));
    std::vector<ModeNode> nodes;
    for (Index k = 0; k < n; ++k) {
        const RowMatrix& f = factors[static_cast<std::size_t>(k)];
        nodes.push_back(chain.node(k).with_factor(
            DenseTensor({f.rows(), f.cols()}, std::vector<double>(f.data(), f.data() + f.size()))));
    }
    return TnTensor(std::move(nodes));
}

// ---------------------------------------------------------------------------
// Orthogonalization and rounding

namespace {

void left_orthogonalize(Chain& chain, Index k) {
    Core& c = chain[static_cast<std::size_t>(k)];
    Core& next = chain[static_cast<std::size_t>(k + 1)];
    RowMatrix q, r;
    detail::thin_qr(c.left_unfolding(), q, r);
    Core nc(c.rl, c.n, q.cols());
    nc.left_unfolding() = q;
    Core nn(q.cols(), next.n, next.rr);
    nn.right_unfolding().noalias() = r * next.right_unfolding();
    c = std::move(nc);
    next = std::move(nn);
}

void right_orthogonalize(Chain& chain, Index k) {
    Core& c = chain[static_cast<std::size_t>(k)];
    Core& prev = chain[static_cast<std::size_t>(k - 1)];
    RowMatrix q, r;
    detail::thin_qr(c.right_unfolding().transpose(), q, r);
    Core nc(q.cols(), c.n, c.rr);
    nc.right_unfolding() = q.transpose();
    Core np(prev.rl, prev.n, q.cols());
    np.left_unfolding().noalias() = prev.left_unfolding() * r.transpose();
    c = std::move(nc);
    prev = std::move(np);
}

void orthogonalize_chain(Chain& chain, Index mu) {
    const auto n = static_cast<Index>(chain.size());
    for (Index k = 0; k < mu; ++k) left_orthogonalize(chain, k);
    for (Index k = n - 1; k > mu; --k) right_orthogonalize(chain, k);
}

void round_chain(Chain& chain, const TruncationSpec& spec) {
    const auto n = static_cast<Index>(chain.size());
    if (n == 1) return;
    // Product of core norms bounds the entries' magnitude; singular values
    // below its rounding level are cancellation noise.
    double scale = 1.0;
    for (const auto& c : chain) scale *= ConstRowMap(c.data.data(), 1, static_cast<Index>(c.data.size())).norm();
    orthogonalize_chain(chain, n - 1);
    const Core& last = chain.back();
    const double nrm = ConstRowMap(last.data.data(), 1, static_cast<Index>(last.data.size())).norm();
    const double delta = spec.budget_eps() * nrm / std::sqrt(static_cast<double>(n - 1));
    for (Index k = n - 1; k >= 1; --k) {
        Core& c = chain[static_cast<std::size_t>(k)];
        Core& prev = chain[static_cast<std::size_t>(k - 1)];
        const detail::Svd d = detail::svd(c.right_unfolding());
        const double floor =
            static_cast<double>(std::max(c.rl, c.n * c.rr)) * std::numeric_limits<double>::epsilon() * scale;
        const Index r = detail::truncation_rank(d.s, delta, c.rl, c.n * c.rr, spec.cap(k - 1), floor);
        Core nc(r, c.n, c.rr);
        nc.right_unfolding() = d.vt.topRows(r);
        Core np(prev.rl, prev.n, r);
        np.left_unfolding().noalias() = prev.left_unfolding() * (d.u.leftCols(r) * d.s.head(r).asDiagonal());
        c = std::move(nc);
        prev = std::move(np);
    }
}

}  // namespace

TnTensor orthogonalize(const TnTensor& t, Index mu) {
    require(mu >= 0 && mu < t.ndim(), "orthogonalize: mode index out of range");
    std::vector<Chain> chains = detail::plain_chains(t);
    for (auto& chain : chains) orthogonalize_chain(chain, mu);
    return detail::from_chains(chains, t.batched());
}

TnTensor round(const TnTensor& t, const TruncationSpec& spec) {
    spec.validate();
    check_edge_caps(spec, t.ndim());
    std::vector<Chain> chains = detail::plain_chains(t);
    for (auto& chain : chains) round_chain(chain, spec);
    return detail::from_chains(chains, t.batched());
}

}  // namespace tnt
