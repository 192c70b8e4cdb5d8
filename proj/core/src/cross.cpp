#include "tnt/cross.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "detail.hpp"
#include "tnt/random.hpp"

namespace tnt {

using detail::Chain;
using detail::Core;
using detail::require;
using detail::RowMatrix;

namespace {

struct MaxvolRows {
    std::vector<Index> rows;
    RowMatrix coeffs;
    Index swaps = 0;
    std::vector<double> abs_det_history;
};

// Row-pivoted elimination picks the initial rows.
std::vector<Index> pivot_rows(const RowMatrix& a) {
    const Index n = a.rows(), r = a.cols();
    RowMatrix w = a;
    std::vector<Index> perm(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    Index deficient = 0;
    Index row = 0;
    for (Index j = 0; j < r; ++j) {
        Index best = row;
        for (Index i = row; i < n; ++i)
            if (std::abs(w(i, j)) > std::abs(w(best, j))) best = i;
        if (row >= n || std::abs(w(best, j)) <= 1e-12 * scale) {
            ++deficient;
            continue;
        }
        w.row(row).swap(w.row(best));
        std::swap(perm[static_cast<std::size_t>(row)], perm[static_cast<std::size_t>(best)]);
        for (Index i = row + 1; i < n; ++i) {
            const double m = w(i, j) / w(row, j);
            if (m != 0.0) w.row(i) -= m * w.row(row);
        }
        ++row;
    }
    if (deficient > 0) {
        throw StructuralError("maxvol: matrix is rank deficient (" + std::to_string(deficient) + " of " +
                              std::to_string(r) + " columns have no pivot)");
    }
    return {perm.begin(), perm.begin() + r};
}

RowMatrix interpolation(const RowMatrix& a, const std::vector<Index>& rows) {
    const Index r = a.cols();
    RowMatrix sel(r, r);
    for (Index j = 0; j < r; ++j) sel.row(j) = a.row(rows[static_cast<std::size_t>(j)]);
    // B = A sel^-1  <=>  sel^T B^T = A^T
    return sel.transpose().partialPivLu().solve(a.transpose()).transpose();
}

MaxvolRows maxvol_rows(const RowMatrix& a, double delta) {
    const Index n = a.rows(), r = a.cols();
    require(r >= 1 && n >= r, "maxvol: need n >= r >= 1, got " + std::to_string(n) + " x " + std::to_string(r));
    require(delta >= 0.0, "maxvol: delta must be non-negative");
    MaxvolRows out;
    out.rows = pivot_rows(a);
    RowMatrix sel(r, r);
    for (Index j = 0; j < r; ++j) sel.row(j) = a.row(out.rows[static_cast<std::size_t>(j)]);
    double det = std::abs(sel.partialPivLu().determinant());
    out.abs_det_history.push_back(det);

    RowMatrix b = interpolation(a, out.rows);
    for (Index it = 0; it < 2 * n; ++it) {
        Index i = 0, j = 0;
        const double peak = b.cwiseAbs().maxCoeff(&i, &j);
        if (peak <= 1.0 + delta) break;
        const double pivot = b(i, j);
        Eigen::RowVectorXd row = b.row(i);
        row(j) -= 1.0;
        const Eigen::VectorXd col = b.col(j);
        b.noalias() -= col * row / pivot;
        out.rows[static_cast<std::size_t>(j)] = i;
        det *= std::abs(pivot);
        out.abs_det_history.push_back(det);
        ++out.swaps;
    }
    out.coeffs = interpolation(a, out.rows);
    return out;
}

Index saturating_product(std::span<const Index> dims) {
    constexpr Index limit = Index{1} << 40;
    Index p = 1;
    for (Index d : dims) p = std::min(limit, p * d);
    return p;
}

std::string index_string(std::span<const Index> idx) {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < idx.size(); ++k) os << (k ? ", " : "") << idx[k];
    os << ')';
    return os.str();
}

using Tuple = std::vector<Index>;

class Evaluator {
public:
    Evaluator(const BlackBox& f) : f_(f) {}

    double operator()(const Tuple& idx) {
        if (auto it = cache_.find(idx); it != cache_.end()) return it->second;
        double v = 0.0;
        try {
            v = f_(idx);
        } catch (const EvaluationError&) {
            throw;
        } catch (const std::exception& e) {
            throw EvaluationError(idx, "black-box evaluation failed at " + index_string(idx) + ": " + e.what());
        }
        if (!std::isfinite(v)) {
            throw EvaluationError(idx, "black-box returned a non-finite value at " + index_string(idx));
        }
        cache_.emplace(idx, v);
        ++log.total_evaluations;
        if (log.best_index.empty() || v > log.best_value) {
            log.best_index = idx;
            log.best_value = v;
        }
        return v;
    }

    EvalLog log;

private:
    const BlackBox& f_;
    std::map<Tuple, double> cache_;
};

double chain_entry(const Chain& chain, std::span<const Index> idx) {
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (std::size_t k = 0; k < chain.size(); ++k) {
        const Core& c = chain[k];
        Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(c.rr);
        for (Index a = 0; a < c.rl; ++a)
            next += v(a) * Eigen::Map<const Eigen::RowVectorXd>(c.data.data() + (a * c.n + idx[k]) * c.rr, c.rr);
        v = std::move(next);
    }
    return v(0);
}

class Cross {
public:
    Cross(const BlackBox& f, const Shape& shape, const CrossConfig& cfg)
        : eval_(f), shape_(shape), cfg_(cfg), n_(static_cast<Index>(shape.size())), rng_(cfg.seed) {
        caps_.assign(static_cast<std::size_t>(n_ + 1), 1);
        for (Index k = 1; k < n_; ++k) {
            Index c = std::min(saturating_product(std::span(shape_).first(static_cast<std::size_t>(k))),
                               saturating_product(std::span(shape_).subspan(static_cast<std::size_t>(k))));
            if (cfg_.max_rank > 0) c = std::min(c, cfg_.max_rank);
            caps_[static_cast<std::size_t>(k)] = c;
        }
        left_.assign(static_cast<std::size_t>(n_ + 1), {});
        right_.assign(static_cast<std::size_t>(n_ + 1), {});
        left_[0] = {Tuple{}};
        right_[static_cast<std::size_t>(n_)] = {Tuple{}};
        for (Index k = 1; k < n_; ++k) right_[static_cast<std::size_t>(k)] = random_tuples(k, std::min(cfg_.initial_rank, caps_[static_cast<std::size_t>(k)]));
        build_validation();
    }

    CrossResult run() {
        Index kick = 0;
        std::optional<TnTensor> result;
        for (Index it = 0; it < cfg_.max_iters; ++it) {
            const bool full = saturated();
            result = left_to_right(kick);
            ++eval_.log.sweeps;
            eval_.log.validation_error = validation_error(*result);
            const bool met = eval_.log.validation_error <= cfg_.target_eps;
            if ((met && !cfg_.exhaustive) || full) break;
            result = right_to_left();
            eval_.log.validation_error = validation_error(*result);
            if (eval_.log.validation_error <= cfg_.target_eps && !cfg_.exhaustive) break;
            kick = cfg_.rank_increment;
        }
        return {std::move(*result), eval_.log};
    }

private:
    // `count` distinct random tuples over modes [k, N).
    std::vector<Tuple> random_tuples(Index k, Index count) {
        std::vector<Tuple> out;
        std::set<Tuple> seen;
        for (Index attempt = 0; static_cast<Index>(out.size()) < count && attempt < 100 * count; ++attempt) {
            Tuple t;
            for (Index j = k; j < n_; ++j) t.push_back(uniform(shape_[static_cast<std::size_t>(j)]));
            if (seen.insert(t).second) out.push_back(std::move(t));
        }
        while (static_cast<Index>(out.size()) < count) out.push_back(out.front());
        return out;
    }

    Index uniform(Index size) { return std::uniform_int_distribution<Index>(0, size - 1)(rng_); }

    void build_validation() {
        double total = 1.0;
        for (Index s : shape_) total *= static_cast<double>(s);
        const auto count = static_cast<Index>(
            std::min<double>(static_cast<double>(cfg_.validation_size), std::max(10.0, std::floor(total / 10.0))));
        Rng vrng(cfg_.seed ^ 0x9e3779b97f4a7c15ULL);
        for (Index s = 0; s < count; ++s) {
            Tuple t;
            for (Index j = 0; j < n_; ++j)
                t.push_back(std::uniform_int_distribution<Index>(0, shape_[static_cast<std::size_t>(j)] - 1)(vrng));
            validation_values_.push_back(eval_(t));
            validation_.push_back(std::move(t));
        }
    }

    double validation_error(const TnTensor& t) const {
        const Chain chain = detail::plain_chain(t, 0);
        double num = 0.0, den = 0.0;
        for (std::size_t s = 0; s < validation_.size(); ++s) {
            const double d = chain_entry(chain, validation_[s]) - validation_values_[s];
            num += d * d;
            den += validation_values_[s] * validation_values_[s];
        }
        return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }

    // Right index sets come from sampled fibers only, so a full set means the next sweep adds no random columns.
    bool saturated() const {
        for (Index k = 1; k < n_; ++k)
            if (static_cast<Index>(right_[static_cast<std::size_t>(k)].size()) < caps_[static_cast<std::size_t>(k)]) return false;
        return true;
    }

    // Rows (a, i) over left_[k] x mode k, columns over right_[k+1].
    RowMatrix fiber(Index k) {
        const auto& l = left_[static_cast<std::size_t>(k)];
        const auto& r = right_[static_cast<std::size_t>(k + 1)];
        const Index n = shape_[static_cast<std::size_t>(k)];
        RowMatrix out(static_cast<Index>(l.size()) * n, static_cast<Index>(r.size()));
        Tuple idx;
        for (std::size_t a = 0; a < l.size(); ++a)
            for (Index i = 0; i < n; ++i)
                for (std::size_t b = 0; b < r.size(); ++b) {
                    idx = l[a];
                    idx.push_back(i);
                    idx.insert(idx.end(), r[b].begin(), r[b].end());
                    out(static_cast<Index>(a) * n + i, static_cast<Index>(b)) = eval_(idx);
                }
        return out;
    }

    TnTensor left_to_right(Index kick) {
        Chain chain;
        for (Index k = 0; k < n_; ++k) {
            const Index n = shape_[static_cast<std::size_t>(k)];
            const auto& l = left_[static_cast<std::size_t>(k)];
            RowMatrix f = fiber(k);
            const auto rl = static_cast<Index>(l.size());
            if (k == n_ - 1) {
                Core c(rl, n, 1);
                c.left_unfolding() = f;
                chain.push_back(std::move(c));
                break;
            }
            const Index extra = std::max<Index>(0, std::min(kick, caps_[static_cast<std::size_t>(k + 1)] - f.cols()));
            if (extra > 0) {
                RowMatrix wide(f.rows(), f.cols() + extra);
                wide.leftCols(f.cols()) = f;
                std::normal_distribution<double> normal;
                for (Index i = 0; i < f.rows(); ++i)
                    for (Index j = 0; j < extra; ++j) wide(i, f.cols() + j) = normal(rng_);
                f = std::move(wide);
            }
            RowMatrix q, r;
            detail::thin_qr(f, q, r);
            const MaxvolRows mv = maxvol_rows(q, cfg_.delta);
            Core c(rl, n, q.cols());
            c.left_unfolding() = mv.coeffs;
            chain.push_back(std::move(c));
            std::vector<Tuple> next;
            for (Index s : mv.rows) {
                Tuple t = l[static_cast<std::size_t>(s / n)];
                t.push_back(s % n);
                next.push_back(std::move(t));
            }
            left_[static_cast<std::size_t>(k + 1)] = std::move(next);
        }
        return detail::from_chain(chain);
    }

    TnTensor right_to_left() {
        Chain chain(static_cast<std::size_t>(n_));
        for (Index k = n_ - 1; k >= 0; --k) {
            const Index n = shape_[static_cast<std::size_t>(k)];
            const auto& r = right_[static_cast<std::size_t>(k + 1)];
            const RowMatrix f = fiber(k);
            const Index rl = f.rows() / n;
            const auto rr = static_cast<Index>(r.size());
            if (k == 0) {
                Core c(1, n, rr);
                c.left_unfolding() = f;
                chain[0] = std::move(c);
                break;
            }
            // Rows (i, b), columns a.
            RowMatrix m(n * rr, rl);
            for (Index a = 0; a < rl; ++a)
                for (Index i = 0; i < n; ++i)
                    for (Index b = 0; b < rr; ++b) m(i * rr + b, a) = f(a * n + i, b);
            RowMatrix q, rf;
            detail::thin_qr(m, q, rf);
            const MaxvolRows mv = maxvol_rows(q, cfg_.delta);
            const Index c_rank = q.cols();
            Core c(c_rank, n, rr);
            for (Index a = 0; a < c_rank; ++a)
                for (Index i = 0; i < n; ++i)
                    for (Index b = 0; b < rr; ++b) c(a, i, b) = mv.coeffs(i * rr + b, a);
            chain[static_cast<std::size_t>(k)] = std::move(c);
            std::vector<Tuple> next;
            for (Index s : mv.rows) {
                Tuple t{s / rr};
                const auto& tail = r[static_cast<std::size_t>(s % rr)];
                t.insert(t.end(), tail.begin(), tail.end());
                next.push_back(std::move(t));
            }
            right_[static_cast<std::size_t>(k)] = std::move(next);
        }
        return detail::from_chain(chain);
    }

    Evaluator eval_;
    Shape shape_;
    CrossConfig cfg_;
    Index n_;
    Rng rng_;
    std::vector<Index> caps_;
    std::vector<std::vector<Tuple>> left_;
    std::vector<std::vector<Tuple>> right_;
    std::vector<Tuple> validation_;
    std::vector<double> validation_values_;
};

}  // namespace

MaxvolResult maxvol(const DenseTensor& a, double delta) {
    require(a.ndim() == 2, "maxvol: expected a matrix");
    const detail::ConstRowMap m(a.data().data(), a.dim(0), a.dim(1));
    MaxvolRows mv = maxvol_rows(m, delta);
    MaxvolResult out;
    out.rows = std::move(mv.rows);
    out.coeffs = DenseTensor({a.dim(0), a.dim(1)}, std::vector<double>(mv.coeffs.data(), mv.coeffs.data() + mv.coeffs.size()));
    out.swaps = mv.swaps;
    out.abs_det_history = std::move(mv.abs_det_history);
    return out;
}

void CrossConfig::validate() const {
    require(target_eps > 0.0 && target_eps < 1.0, "cross: target_eps must lie in (0, 1)");
    require(max_iters >= 1, "cross: max_iters must be positive");
    require(initial_rank >= 1, "cross: initial_rank must be positive");
    require(rank_increment >= 1, "cross: rank_increment must be positive");
    require(validation_size >= 1, "cross: validation_size must be positive");
    require(delta >= 0.0, "cross: delta must be non-negative");
    require(max_rank >= 0, "cross: max_rank must be non-negative");
}

CrossResult cross_approximate(const BlackBox& f, const Shape& shape, const CrossConfig& cfg) {
    cfg.validate();
    require(!shape.empty(), "cross: shape needs at least one mode");
    for (Index s : shape) require(s >= 1, "cross: mode sizes must be positive");
    return Cross(f, shape, cfg).run();
}

TnTensor elementwise(const TnTensor& t, const std::function<double(double)>& g, const CrossConfig& cfg) {
    if (t.batched()) {
        std::vector<Chain> chains;
        for (Index b = 0; b < t.batch_count(); ++b)
            chains.push_back(detail::plain_chain(elementwise(t.element(b), g, cfg), 0));
        return detail::from_chains(chains, true);
    }
    const Chain chain = detail::plain_chain(t, 0);
    const BlackBox f = [&](std::span<const Index> idx) { return g(chain_entry(chain, idx)); };
    return cross_approximate(f, t.shape(), cfg).tensor;
}

ArgoptResult discrete_argopt(const BlackBox& f, const Shape& shape, const CrossConfig& cfg, Sense sense) {
    CrossConfig c = cfg;
    c.exhaustive = true;
    const double sign = sense == Sense::max ? 1.0 : -1.0;
    const BlackBox g = [&](std::span<const Index> idx) { return sign * f(idx); };
    CrossResult r = cross_approximate(g, shape, c);
    r.log.best_value *= sign;
    return {r.log.best_index, r.log.best_value, r.log};
}

}  // namespace tnt
