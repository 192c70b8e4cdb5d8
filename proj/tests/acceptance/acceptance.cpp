#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "common/fixtures.hpp"
#include "oracle/oracle.hpp"

using namespace tnt;
using fixtures::as_dense;
using fixtures::rel;
using fixtures::uniform;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

class Tally {
public:
    void check(bool ok, const std::string& what) {
        ++checks_;
        if (!ok) {
            ++failures_;
            if (first_.empty()) first_ = what;
        }
    }
    void worst(double v) { worst_ = std::max(worst_, v); }
    bool ok() const { return failures_ == 0; }
    std::string summary() const {
        std::ostringstream os;
        os << checks_ - failures_ << "/" << checks_ << " checks";
        if (worst_ > 0.0) os << ", worst " << worst_;
        if (!first_.empty()) os << ", first failure: " << first_;
        return os.str();
    }

private:
    int checks_ = 0;
    int failures_ = 0;
    double worst_ = 0.0;
    std::string first_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string str(const std::vector<Index>& v) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ']';
    return os.str();
}

// Random TT with r_k <= r_{k-1} n_k and r_k <= n_{k+1} r_{k+1}, so its ranks are generically minimal.
TnTensor minimal_tt(Rng& rng, const Shape& shape, Index max_rank) {
    const std::size_t n = shape.size();
    std::vector<Index> r(n + 1, 1);
    for (std::size_t e = 1; e < n; ++e) r[e] = uniform(rng, 1, max_rank);
    for (std::size_t e = 1; e < n; ++e) r[e] = std::min(r[e], r[e - 1] * shape[e - 1]);
    for (std::size_t e = n - 1; e >= 1; --e) r[e] = std::min(r[e], r[e + 1] * shape[e]);
    return random_tt(shape, std::vector<Index>(r.begin() + 1, r.end() - 1), rng);
}

DenseTensor identity(Index n) {
    DenseTensor out({n, n});
    for (Index i = 0; i < n; ++i) out.at({i, i}) = 1.0;
    return out;
}

DenseTensor random_invertible(Index n, Rng& rng) {
    DenseTensor a = fixtures::normal({n, n}, rng);
    for (Index i = 0; i < n; ++i) a.at({i, i}) += 3.0;
    return a;
}

TTMatrix kron_ttm(const std::vector<DenseTensor>& factors) {
    std::vector<DenseTensor> cores;
    for (const auto& f : factors) cores.push_back(f.reshaped({1, f.dim(0), f.dim(1), 1}));
    return TTMatrix(std::move(cores));
}

TTMatrix random_ttm(const Shape& rows, const Shape& cols, Index rank, Rng& rng) {
    std::vector<DenseTensor> cores;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const Index rl = k == 0 ? 1 : rank, rr = k + 1 == rows.size() ? 1 : rank;
        cores.push_back(fixtures::normal({rl, rows[k], cols[k], rr}, rng));
    }
    return TTMatrix(std::move(cores));
}

double largest_difference(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) return INFINITY;
    double m = 0.0;
    for (Index i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// 1. TT-SVD error contract.
Verdict tt_svd_contract() {
    Tally tally;
    Rng rng(101);
    double worst_ratio = 0.0;
    const auto start = std::chrono::steady_clock::now();
    for (int rep = 0; rep < 100; ++rep) {
        const Shape shape = fixtures::random_shape(rng, 4, 10, 15);
        DenseTensor x = full(minimal_tt(rng, shape, 6));
        const double noise = std::pow(10.0, -static_cast<double>(uniform(rng, 1, 10))) * x.frobenius_norm() /
                             std::sqrt(static_cast<double>(x.numel()));
        std::normal_distribution<double> dist;
        for (Index i = 0; i < x.numel(); ++i) x[i] += noise * dist(rng);
        for (double eps : {1e-2, 1e-4, 1e-8}) {
            const TnTensor t = tt_svd(x, TruncationSpec::relative(eps));
            const double err = rel(oracle::dense_full_reference(t), x);
            worst_ratio = std::max(worst_ratio, err / eps);
            tally.check(err <= eps, "fixture " + std::to_string(rep) + " eps " + std::to_string(eps));
        }
    }
    const double elapsed = seconds_since(start);
    tally.check(elapsed < 60.0, "runtime");
    std::ostringstream os;
    os << tally.summary() << ", max error/eps " << worst_ratio << ", " << elapsed << " s";
    return {tally.ok(), os.str()};
}

// 2. Representation equivalence.
Verdict representation_equivalence() {
    Tally tally;
    Rng rng(202);
    for (int rep = 0; rep < 100; ++rep) {
        const TnTensor t = fixtures::random_blended(rng, 5, 100000);
        const double err = rel(full(t), oracle::dense_full_reference(t));
        tally.worst(err);
        tally.check(err <= 1e-12, "fixture " + std::to_string(rep));
    }
    return {tally.ok(), tally.summary()};
}

// 3. Arithmetic oracle suite and rank laws.
Verdict arithmetic_suite() {
    Rng rng(303);
    std::map<std::string, Tally> per_op;
    Tally laws;
    auto compare = [&](const std::string& op, const DenseTensor& got, const DenseTensor& want, int rep) {
        const double err = rel(got, want);
        per_op[op].worst(err);
        per_op[op].check(err <= 1e-10, "case " + std::to_string(rep));
    };
    auto shape_for = [&](Index min_modes) {
        return fixtures::random_shape(rng, uniform(rng, min_modes, 4), 1, 5);
    };
    for (int rep = 0; rep < 200; ++rep) {
        {
            const Shape s = shape_for(1);
            const TnTensor a = fixtures::random_blended_shape(rng, s), b = fixtures::random_blended_shape(rng, s);
            compare("add", full(add(a, b)), oracle::add(full(a), full(b)), rep);
            compare("hadamard", full(hadamard(a, b)), oracle::multiply(full(a), full(b)), rep);
            const double d = dot(a, b), ref = oracle::dot(full(a), full(b));
            const double scale_ab = full(a).frobenius_norm() * full(b).frobenius_norm();
            const double err = scale_ab > 0.0 ? std::abs(d - ref) / scale_ab : std::abs(d - ref);
            per_op["dot"].worst(err);
            per_op["dot"].check(err <= 1e-10, "case " + std::to_string(rep));

            const TnTensor x = fixtures::random_tt_ranks(rng, s, 4), y = fixtures::random_tt_ranks(rng, s, 4);
            const auto rx = x.ranks(), ry = y.ranks(), rs = add(x, y).ranks(), rh = hadamard(x, y).ranks();
            bool sum_ok = true, prod_ok = true;
            for (std::size_t e = 1; e + 1 < rx.size(); ++e) {
                sum_ok = sum_ok && rs[e] == rx[e] + ry[e];
                prod_ok = prod_ok && rh[e] == rx[e] * ry[e];
            }
            laws.check(sum_ok, "add ranks " + str(rs) + " from " + str(rx) + " + " + str(ry));
            laws.check(prod_ok, "hadamard ranks " + str(rh) + " from " + str(rx) + " * " + str(ry));
        }
        {
            const TnTensor t = fixtures::random_blended(rng, 4, 3000);
            const Index k = uniform(rng, 0, t.ndim() - 1);
            const Index n = t.shape()[static_cast<std::size_t>(k)];
            const DenseTensor m = fixtures::normal({uniform(rng, 1, 4), n}, rng);
            compare("ttm", full(ttm(t, m, k)), oracle::mode_product(full(t), m, k), rep);
            const DenseTensor v = fixtures::normal({n}, rng);
            compare("ttv", as_dense(ttv(t, v.values(), k)), oracle::mode_vector(full(t), v.values(), k), rep);
        }
        {
            const TnTensor t = fixtures::random_blended(rng, 4, 3000);
            std::vector<Index> modes;
            for (Index k = 0; k < t.ndim(); ++k)
                if (uniform(rng, 0, 1)) modes.push_back(k);
            if (modes.empty()) modes.push_back(uniform(rng, 0, t.ndim() - 1));
            compare("sum", as_dense(sum(t, modes)), oracle::sum_modes(full(t), modes), rep);
        }
        {
            Shape s = shape_for(1);
            const Index k = uniform(rng, 0, static_cast<Index>(s.size()) - 1);
            const TnTensor a = fixtures::random_blended_shape(rng, s);
            s[static_cast<std::size_t>(k)] = uniform(rng, 1, 5);
            const TnTensor b = fixtures::random_blended_shape(rng, s);
            compare("concat", full(concat(a, b, k)), oracle::concat(full(a), full(b), k), rep);
        }
        {
            const TnTensor t = fixtures::random_blended(rng, 4, 3000);
            std::vector<Index> perm(static_cast<std::size_t>(t.ndim()));
            std::iota(perm.begin(), perm.end(), Index{0});
            std::shuffle(perm.begin(), perm.end(), rng);
            compare("transpose", full(transpose(t, perm)), oracle::transpose(full(t), perm), rep);
        }
        {
            const TnTensor t = fixtures::random_blended(rng, 4, 3000);
            const Index k = uniform(rng, 0, t.ndim() - 1), before = uniform(rng, 0, 3), after = uniform(rng, 0, 3);
            compare("pad", full(pad(t, k, before, after)), oracle::pad(full(t), k, before, after), rep);
        }
        {
            const TnTensor t = fixtures::random_blended_shape(rng, fixtures::random_shape(rng, uniform(rng, 1, 4), 2, 6));
            const Index k = uniform(rng, 0, t.ndim() - 1);
            const Index n = t.shape()[static_cast<std::size_t>(k)];
            const DenseTensor kernel = fixtures::normal({uniform(rng, 1, std::min<Index>(n, 4))}, rng);
            const bool same = uniform(rng, 0, 1) == 1;
            compare("conv_mode", full(conv_mode(t, kernel.values(), k, same ? ConvPadding::same : ConvPadding::valid)),
                    oracle::correlate(full(t), kernel.values(), k, same), rep);
        }
    }
    bool ok = laws.ok();
    std::ostringstream os;
    for (const auto& [op, tally] : per_op) {
        ok = ok && tally.ok();
        if (!tally.ok()) os << op << " failed (" << tally.summary() << "); ";
    }
    os << per_op.size() << " ops x 200 cases";
    os << ", rank laws " << laws.summary();
    return {ok, os.str()};
}

// 4. Rounding.
Verdict rounding() {
    Tally ranks, errors;
    Rng rng(404);
    for (int rep = 0; rep < 50; ++rep) {
        const TnTensor t = minimal_tt(rng, fixtures::random_shape(rng, uniform(rng, 2, 5), 2, 6), 5);
        const TnTensor r = round(add(t, t), TruncationSpec::relative(1e-12));
        ranks.check(r.ranks() == t.ranks(), "fixture " + std::to_string(rep) + ": " + str(r.ranks()) + " vs " + str(t.ranks()));
    }
    for (int rep = 0; rep < 100; ++rep) {
        const Shape s = fixtures::random_shape(rng, uniform(rng, 2, 5), 2, 6);
        const double eps = rep % 2 == 0 ? 1e-3 : 1e-6;
        const TnTensor t = add(minimal_tt(rng, s, 3), scale(fixtures::random_tt_ranks(rng, s, 3), std::pow(10.0, -uniform(rng, 2, 8))));
        const double err = rel(full(round(t, TruncationSpec::relative(eps))), full(t));
        errors.worst(err / eps);
        errors.check(err <= eps, "fixture " + std::to_string(rep));
    }
    return {ranks.ok() && errors.ok(), "t+t ranks " + ranks.summary() + "; error/eps " + errors.summary()};
}

IndexItem basic_slice(Rng& rng, Index n, bool negative) {
    Slice s;
    if (uniform(rng, 0, 3) > 0) s.start = uniform(rng, -n, n);
    if (uniform(rng, 0, 3) > 0) s.stop = uniform(rng, -n - 1, n + 1);
    const Index step = uniform(rng, 1, 3);
    if (negative) s.step = -step;
    else if (uniform(rng, 0, 1)) s.step = step;
    return s;
}

// 5. Indexing equivalence.
Verdict indexing_suite() {
    Rng rng(505);
    std::map<std::string, Tally> family;
    double worst_read = 0.0;
    int reads = 0, bit_exact = 0;
    auto read = [&](const std::string& name, const TnTensor& x, const IndexSpec& spec) {
        const DenseTensor want = oracle::dense_getitem(full(x), spec);
        const DenseTensor got = as_dense(getitem(x, spec));
        const double d = largest_difference(got, want);
        const double scale = std::max(1.0, full(x).frobenius_norm());
        worst_read = std::max(worst_read, d / scale);
        ++reads;
        if (d == 0.0) ++bit_exact;
        family[name].check(got.shape() == want.shape() && d <= 1e-14 * scale, name);
    };
    for (int rep = 0; rep < 200; ++rep) {
        {
            const TnTensor x = fixtures::random_blended(rng, 4, 3000);
            std::vector<IndexItem> items;
            for (Index s : x.shape()) {
                if (uniform(rng, 0, 3) == 0) items.push_back(Index{uniform(rng, -s, s - 1)});
                else items.push_back(basic_slice(rng, s, false));
            }
            read("basic slice", x, IndexSpec(items));
        }
        {
            const TnTensor x = fixtures::random_blended(rng, 4, 3000);
            std::vector<IndexItem> items;
            for (Index s : x.shape()) items.push_back(basic_slice(rng, s, uniform(rng, 0, 1) == 0));
            const auto k = static_cast<std::size_t>(uniform(rng, 0, x.ndim() - 1));
            items[k] = basic_slice(rng, x.shape()[k], true);
            read("negative step", x, IndexSpec(items));
        }
        {
            const TnTensor x = fixtures::random_blended(rng, 4, 3000);
            std::vector<IndexItem> items;
            for (Index s : x.shape()) items.push_back(basic_slice(rng, s, false));
            const Index k = uniform(rng, 0, x.ndim() - 1);
            const Index width = uniform(rng, 1, std::min<Index>(2, x.ndim() - k));
            const Index m = uniform(rng, 1, 5);
            for (Index j = k; j < k + width; ++j) {
                IndexList l;
                const Index s = x.shape()[static_cast<std::size_t>(j)];
                for (Index i = 0; i < m; ++i) l.push_back(uniform(rng, -s, s - 1));
                items[static_cast<std::size_t>(j)] = l;
            }
            read("fancy list", x, IndexSpec(items));
        }
        {
            const TnTensor x = fixtures::random_blended(rng, 4, 3000);
            std::vector<std::vector<Index>> rows;
            for (Index m = 0, count = uniform(rng, 1, 10); m < count; ++m) {
                std::vector<Index> row;
                for (Index s : x.shape()) row.push_back(uniform(rng, 0, s - 1));
                rows.push_back(row);
            }
            read("array form", x, IndexSpec::array(rows));
        }
        {
            const TnTensor x = fixtures::random_blended(rng, 4, 3000);
            std::vector<IndexItem> items;
            for (Index s : x.shape()) items.push_back(uniform(rng, 0, 2) == 0 ? IndexItem{Index{uniform(rng, 0, s - 1)}} : basic_slice(rng, s, false));
            for (Index a = 0, count = uniform(rng, 1, 2); a < count; ++a)
                items.insert(items.begin() + uniform(rng, 0, static_cast<Index>(items.size())), NewAxis{});
            read("new axis", x, IndexSpec(items));
        }
        {
            const TnTensor x = fixtures::random_blended(rng, 4, 3000);
            const Index keep = uniform(rng, 0, x.ndim());
            const Index head = uniform(rng, 0, keep);
            std::vector<IndexItem> items;
            for (Index k = 0; k < head; ++k) items.push_back(basic_slice(rng, x.shape()[static_cast<std::size_t>(k)], false));
            items.push_back(Ellipsis{});
            for (Index k = x.ndim() - (keep - head); k < x.ndim(); ++k)
                items.push_back(Index{uniform(rng, 0, x.shape()[static_cast<std::size_t>(k)] - 1)});
            read("ellipsis", x, IndexSpec(items));
        }
        {
            const Shape base = fixtures::random_shape(rng, uniform(rng, 1, 4), 2, 5);
            Shape sa = base, sb = base;
            for (std::size_t k = 0; k < base.size(); ++k) {
                if (uniform(rng, 0, 2) == 0) sa[k] = 1;
                else if (uniform(rng, 0, 2) == 0) sb[k] = 1;
            }
            if (sb.size() > 1 && uniform(rng, 0, 2) == 0) sb.erase(sb.begin());
            const TnTensor a = fixtures::random_blended_shape(rng, sa), b = fixtures::random_blended_shape(rng, sb);
            const double e1 = rel(full(add(a, b)), oracle::add(full(a), full(b)));
            const double e2 = rel(full(hadamard(a, b)), oracle::multiply(full(a), full(b)));
            family["broadcast binary op"].check(e1 <= 1e-12 && e2 <= 1e-12, "broadcast " + str(sa) + " " + str(sb));
        }
        {
            const TnTensor t = fixtures::random_blended(rng, 4, 3000);
            std::vector<IndexItem> items;
            for (Index s : t.shape()) {
                if (uniform(rng, 0, 3) == 0) items.push_back(Index{uniform(rng, -s, s - 1)});
                else items.push_back(basic_slice(rng, s, uniform(rng, 0, 3) == 0));
            }
            const IndexSpec spec(items);
            const Shape region = oracle::dense_getitem(full(t), spec).shape();
            DenseTensor value({}, static_cast<double>(rep) * 0.25 - 7.0);
            std::optional<TnTensor> r;
            if (region.empty() || uniform(rng, 0, 1) == 0) {
                r = setitem(t, spec, value[0]);
            } else {
                Shape vs = region;
                for (auto& s : vs)
                    if (uniform(rng, 0, 3) == 0) s = 1;
                const TnTensor v = fixtures::random_blended_shape(rng, vs);
                value = full(v);
                r = setitem(t, spec, v);
            }
            const double err = rel(full(*r), oracle::dense_setitem(full(t), spec, value));
            family["setitem"].check(err <= 1e-12, "setitem case " + std::to_string(rep));
        }
    }
    bool rejected = true;
    {
        Rng r2(5);
        const TnTensor x = random_tt({3, 4, 5}, 2, r2);
        for (const IndexSpec& spec : {IndexSpec{IndexList{0, 1}, Slice{}, IndexList{1, 2}},
                                      IndexSpec{Index{0}, Slice{}, IndexList{1, 2}},
                                      IndexSpec{IndexList{2}, Slice{1, 3, std::nullopt}, Index{-1}}}) {
            try {
                (void)getitem(x, spec);
                rejected = false;
            } catch (const UnsupportedIndexing&) {
            } catch (...) {
                rejected = false;
            }
        }
    }
    bool ok = rejected;
    std::ostringstream os;
    for (const auto& [name, tally] : family) {
        ok = ok && tally.ok();
        if (!tally.ok()) os << name << " failed (" << tally.summary() << "); ";
    }
    os << family.size() << " families x 200 cases, reads bit-identical " << bit_exact << "/" << reads << " (worst " << worst_read << " of the norm)"
       << ", interleaved fancy " << (rejected ? "rejected" : "NOT rejected");
    return {ok, os.str()};
}

// 6. Batch consistency.
Verdict batch_consistency() {
    Tally tally;
    Rng rng(606);
    constexpr Index B = 32;
    for (int rep = 0; rep < 5; ++rep) {
        const Shape s = fixtures::random_shape(rng, 4, 4, 8);
        const TnTensor a = random_tt_batched(B, s, uniform(rng, 1, 5), rng);
        const TnTensor b = random_tt_batched(B, s, uniform(rng, 1, 5), rng);
        const DenseTensor xa = full(a);
        const double eps = rep % 2 == 0 ? 0.0 : 1e-6;
        const TnTensor svd = tt_svd_batched(xa, TruncationSpec::relative(eps));
        const TnTensor sum = add(a, b), prod = hadamard(a, b);
        for (Index e = 0; e < B; ++e) {
            const std::string tag = "fixture " + std::to_string(rep) + " item " + std::to_string(e);
            const double e1 = rel(full(svd.element(e)), full(tt_svd(xa.leading_slice(e), TruncationSpec::relative(eps))));
            const double e2 = rel(full(sum.element(e)), full(add(a.element(e), b.element(e))));
            const double e3 = rel(full(prod.element(e)), full(hadamard(a.element(e), b.element(e))));
            tally.worst(std::max({e1, e2, e3}));
            tally.check(e1 <= 1e-12, "tt_svd " + tag);
            tally.check(e2 <= 1e-12, "add " + tag);
            tally.check(e3 <= 1e-12, "hadamard " + tag);
        }
    }
    return {tally.ok(), "B=32, " + tally.summary()};
}

// 7. Maxvol.
Verdict maxvol_suite() {
    Tally post, greedy;
    Rng rng(707);
    constexpr double delta = 0.05;
    double worst_peak = 0.0;
    for (int rep = 0; rep < 500; ++rep) {
        const Index r = uniform(rng, 1, 10);
        const Index n = uniform(rng, r, 120);
        const DenseTensor a = fixtures::normal({n, r}, rng);
        const MaxvolResult mv = maxvol(a, delta);
        DenseTensor sel({r, r});
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < r; ++j) sel.at({i, j}) = a.at({mv.rows[static_cast<std::size_t>(i)], j});
        const DenseTensor coeffs = oracle::matmul(a, oracle::inverse(sel));
        double peak = 0.0;
        for (double v : coeffs.values()) peak = std::max(peak, std::abs(v));
        worst_peak = std::max(worst_peak, peak);
        post.check(peak <= 1.0 + delta + 1e-12, "matrix " + std::to_string(rep));
    }
    double worst_ratio = 1.0;
    for (Index r = 1; r <= 3; ++r)
        for (Index n = r; n <= 10; ++n)
            for (int rep = 0; rep < 20; ++rep) {
                const DenseTensor a = fixtures::normal({n, r}, rng);
                const double best = oracle::brute_force_maxvol(a).abs_det;
                const double got = oracle::subset_abs_det(a, maxvol(a, delta).rows);
                worst_ratio = std::min(worst_ratio, got / best);
                greedy.check(got >= 0.5 * best, "n=" + std::to_string(n) + " r=" + std::to_string(r));
            }
    std::ostringstream os;
    os << "postcondition " << post.summary() << " (max coefficient " << worst_peak << "); greedy/optimum "
       << greedy.summary() << " (min ratio " << worst_ratio << ")";
    return {post.ok() && greedy.ok(), os.str()};
}

// 8. Cross-approximation.
Verdict cross_suite() {
    Tally tally;
    std::ostringstream os;
    {
        const Shape shape{12, 12, 12, 12};
        CrossConfig cfg;
        cfg.target_eps = 1e-10;
        cfg.seed = 8;
        const BlackBox f = [](std::span<const Index> idx) {
            return static_cast<double>(std::accumulate(idx.begin(), idx.end(), Index{0}));
        };
        const CrossResult r = cross_approximate(f, shape, cfg);
        DenseTensor want(shape);
        for (Index i = 0; i < want.numel(); ++i) {
            Index rest = i, s = 0;
            for (Index k = 3; k >= 0; --k) {
                s += rest % 12;
                rest /= 12;
            }
            want[i] = static_cast<double>(s);
        }
        const double dense_err = rel(full(r.tensor), want);
        tally.check(r.log.validation_error <= 1e-10, "index_sum validation");
        tally.check(r.log.total_evaluations <= 8000, "index_sum budget");
        os << "index_sum 12^4: validation " << r.log.validation_error << ", dense " << dense_err << ", "
           << r.log.total_evaluations << " evaluations";
    }
    {
        Rng rng(808);
        const TnTensor t = add_scalar(scale(random_tt({6, 6, 6}, 2, rng), 0.2), 2.0);
        const DenseTensor x = full(t);
        double lo = INFINITY;
        for (double v : x.values()) lo = std::min(lo, v);
        CrossConfig cfg;
        cfg.target_eps = 1e-8;
        cfg.seed = 9;
        const TnTensor inv = elementwise(t, [](double v) { return 1.0 / v; }, cfg);
        DenseTensor want = x;
        for (Index i = 0; i < want.numel(); ++i) want[i] = 1.0 / x[i];
        const double err = rel(oracle::dense_full_reference(inv), want);
        tally.check(lo > 0.0, "reciprocal fixture positive");
        tally.check(err <= 1e-6, "reciprocal dense error");
        os << "; reciprocal 6^3 (min entry " << lo << "): dense error " << err;
    }
    return {tally.ok(), os.str()};
}

// 9. TT/CP matrices.
Verdict matrices_suite() {
    Tally trip, tt_mv, cp_mv, rank1;
    Rng rng(909);
    for (int rep = 0; rep < 100; ++rep) {
        const Index n = uniform(rng, 1, 3);
        const Shape rows = fixtures::random_shape(rng, n, 1, 4), cols = fixtures::random_shape(rng, n, 1, 4);
        Index m = 1, k = 1;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            m *= rows[i];
            k *= cols[i];
        }
        const DenseTensor x = fixtures::normal({m, k}, rng);
        const double e = rel(ttm_to_dense(ttm_from_dense(x, rows, cols, TruncationSpec::relative(0.0))), x);
        trip.worst(e);
        trip.check(e <= 1e-12, "tt matrix " + std::to_string(rep));

        const TTMatrix a = random_ttm(rows, cols, uniform(rng, 1, 3), rng);
        const DenseTensor v = fixtures::normal({k}, rng);
        const double e1 = rel(tt_multiply(a, v), oracle::matvec(ttm_to_dense(a), v));
        tt_mv.worst(e1);
        tt_mv.check(e1 <= 1e-11, "tt_multiply " + std::to_string(rep));

        const Index rank = uniform(rng, 1, 3);
        std::vector<DenseTensor> factors;
        for (std::size_t i = 0; i < rows.size(); ++i) factors.push_back(fixtures::normal({rows[i] * cols[i], rank}, rng));
        const CPMatrix c(factors, rows, cols);
        DenseTensor dense({m, k});
        for (Index q = 0; q < rank; ++q) {
            DenseTensor term({1, 1}, 1.0);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                DenseTensor f({rows[i], cols[i]});
                for (Index j = 0; j < f.numel(); ++j) f[j] = factors[i].at({j, q});
                term = oracle::kron(term, f);
            }
            for (Index j = 0; j < dense.numel(); ++j) dense[j] += term[j];
        }
        const double e2 = rel(cp_multiply(c, v), oracle::matvec(dense, v));
        cp_mv.worst(e2);
        cp_mv.check(e2 <= 1e-11, "cp_multiply " + std::to_string(rep));
    }
    for (Index n : {2, 3})
        for (int rep = 0; rep < 50; ++rep) {
            const TTMatrix m = kron_ttm({random_invertible(n, rng), random_invertible(n, rng)});
            const DenseTensor d = ttm_to_dense(m);
            const double det = oracle::determinant(d);
            const double e1 = std::abs(rank1_determinant(m) - det) / std::abs(det);
            const double e2 = rel(ttm_to_dense(rank1_inverse(m)), oracle::inverse(d));
            rank1.worst(std::max(e1, e2));
            rank1.check(e1 <= 1e-10 && e2 <= 1e-10, std::to_string(n * n) + "x" + std::to_string(n * n));
        }
    const bool ok = trip.ok() && tt_mv.ok() && cp_mv.ok() && rank1.ok();
    return {ok, "round-trip " + trip.summary() + "; tt_multiply " + tt_mv.summary() + "; cp_multiply " +
                    cp_mv.summary() + "; rank-1 " + rank1.summary()};
}

struct Outcome {
    int code = -1;
    std::string out;
};

Outcome tntz(const std::string& args) {
    const std::string cmd = std::string(TNTZ_PATH) + " " + args + " 2>&1";
    Outcome r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

bool bit_equal(const Container& a, const Container& b) {
    if (a.index() != b.index()) return false;
    if (const auto* m = std::get_if<TTMatrix>(&a)) return *m == std::get<TTMatrix>(b);
    if (const auto* m = std::get_if<CPMatrix>(&a)) return *m == std::get<CPMatrix>(b);
    const TnTensor &x = std::get<TnTensor>(a), &y = std::get<TnTensor>(b);
    if (x.ndim() != y.ndim()) return false;
    for (Index k = 0; k < x.ndim(); ++k) {
        const ModeNode &p = x.node(k), &q = y.node(k);
        if (p.kind() != q.kind() || p.batched() != q.batched() || !(p.core() == q.core()) ||
            p.has_factor() != q.has_factor())
            return false;
        if (p.has_factor() && !(p.factor() == q.factor())) return false;
    }
    return true;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
    return out;
}

// 10. CLI and container format.
Verdict cli_suite() {
    Tally format, round_trip, grid;
    const fs::path dir = fs::temp_directory_path() / ("tnt_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    Rng rng(1010);
    for (int rep = 0; rep < 20; ++rep) {
        const auto make = [&]() -> Container {
            switch (rep % 4) {
                case 0: return fixtures::random_blended(rng, 5, 5000);
                case 1: return fixtures::random_blended(rng, 4, 2000, uniform(rng, 1, 4));
                case 2: return random_ttm({2, 3}, {3, 2}, uniform(rng, 1, 3), rng);
                default: {
                    const Index rank = uniform(rng, 1, 3);
                    return CPMatrix({fixtures::normal({6, rank}, rng), fixtures::normal({4, rank}, rng)}, {2, 2}, {3, 2});
                }
            }
        };
        const Container c = make();
        const fs::path p = dir / ("fixture" + std::to_string(rep) + ".tntz");
        save(c, p);
        format.check(bit_equal(load(p), c), "fixture " + std::to_string(rep));
    }

    const DenseTensor x = fixtures::normal({6, 5, 7, 4}, rng);
    write_dense(x, dir / "in.bin");
    const Outcome dec = tntz("decompose --input " + (dir / "in.bin").string() + " --shape 6,5,7,4 --eps 0 --output " +
                             (dir / "in.tntz").string());
    const Outcome rec = tntz("reconstruct " + (dir / "in.tntz").string() + " --output " + (dir / "out.bin").string());
    double trip_err = INFINITY;
    if (dec.code == 0 && rec.code == 0) trip_err = rel(read_dense(dir / "out.bin", {6, 5, 7, 4}), x);
    round_trip.check(trip_err <= 1e-12, "decompose/reconstruct");

    // Batch size, repeats and warmup per operation keep memory and runtime bounded.
    const std::vector<std::pair<std::string, std::string>> plans{
        {"sum", "--batch 32 --repeats 10 --warmup 2"},
        {"product", "--batch 4 --repeats 3 --warmup 1 --memory-limit-gb 3"},
        {"ttsvd", "--batch 8 --repeats 2 --warmup 1 --memory-limit-gb 3"},
        {"cross", "--batch 32 --repeats 2 --warmup 1"},
    };
    std::map<std::string, std::vector<std::pair<Index, double>>> series;
    std::ostringstream times;
    int rows = 0;
    for (const auto& [op, flags] : plans) {
        const fs::path csv = dir / (op + ".csv");
        const auto start = std::chrono::steady_clock::now();
        const Outcome r = tntz("benchmark --op " + op + " --sizes 15,25,35,45 --rank 20 --dims 8 --ttsvd-dims 4 " +
                               flags + " --output " + csv.string());
        times << op << " " << static_cast<int>(seconds_since(start)) << " s ";
        grid.check(r.code == 0, op + " exit " + std::to_string(r.code) + ": " + r.out.substr(r.out.rfind('\n', r.out.size() - 2) + 1));
        std::ifstream in(csv);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            const auto f = split(line, ',');
            if (f.size() != 8) continue;
            ++rows;
            const Index n = std::stoll(f[2]);
            grid.check(f[3] == "20" && n == (op == "ttsvd" ? 4 : 8), "grid parameters " + line);
            series[f[0] + "/" + f[5]].emplace_back(std::stoll(f[1]), std::stod(f[6]));
        }
    }
    grid.check(rows == 32, "row count " + std::to_string(rows));
    std::ostringstream trend;
    for (auto& [key, points] : series) {
        std::sort(points.begin(), points.end());
        bool monotone = points.size() == 4;
        for (std::size_t i = 1; i < points.size(); ++i) monotone = monotone && points[i].second >= points[i - 1].second;
        grid.check(monotone, "per-item time not non-decreasing for " + key);
        if (!monotone) {
            trend << key << ":";
            for (const auto& [size, t] : points) trend << " " << size << "=" << t;
            trend << "; ";
        }
    }
    fs::remove_all(dir);
    const bool ok = format.ok() && round_trip.ok() && grid.ok();
    std::ostringstream os;
    os << "save/load " << format.summary() << "; decompose/reconstruct error " << trip_err << "; benchmark " << rows
       << " rows, " << grid.summary() << " (" << times.str() << ")" << trend.str();
    return {ok, os.str()};
}

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
    std::set<std::size_t> only;
    for (int i = 1; i < argc; ++i) only.insert(static_cast<std::size_t>(std::stoul(argv[i])));
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"tt-svd error contract", tt_svd_contract},
        {"representation equivalence", representation_equivalence},
        {"arithmetic oracle suite", arithmetic_suite},
        {"rounding", rounding},
        {"indexing equivalence", indexing_suite},
        {"batch consistency", batch_consistency},
        {"maxvol", maxvol_suite},
        {"cross-approximation", cross_suite},
        {"tt/cp matrices", matrices_suite},
        {"cli and format", cli_suite},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && !only.count(i + 1)) continue;
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failures;
        std::cout << (v.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << v.detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
