#include <gtest/gtest.h>

#include "common/fixtures.hpp"
#include "oracle/oracle.hpp"

using namespace tnt;
using fixtures::as_dense;
using fixtures::rel;

namespace {

// Random basic/fancy item for a mode of size n.
IndexItem random_item(Rng& rng, Index n, bool allow_list) {
    switch (fixtures::uniform(rng, 0, allow_list ? 4 : 3)) {
        case 0: return Slice{};
        case 1: return Index{fixtures::uniform(rng, -n, n - 1)};
        case 2: {
            Slice s;
            s.start = fixtures::uniform(rng, -n, n);
            s.stop = fixtures::uniform(rng, -n - 1, n + 1);
            Index step = fixtures::uniform(rng, 1, 3);
            s.step = fixtures::uniform(rng, 0, 1) ? step : -step;
            return s;
        }
        case 3: return Slice::reversed();
        default: {
            IndexList l;
            for (Index i = 0, m = fixtures::uniform(rng, 1, 4); i < m; ++i) l.push_back(fixtures::uniform(rng, -n, n - 1));
            return l;
        }
    }
}

}  // namespace

TEST(SlicePositions, PythonSemantics) {
    EXPECT_EQ(slice_positions(Slice{}, 4), (std::vector<Index>{0, 1, 2, 3}));
    EXPECT_EQ(slice_positions(Slice::reversed(), 3), (std::vector<Index>{2, 1, 0}));
    EXPECT_EQ(slice_positions(Slice{1, std::nullopt, 2}, 6), (std::vector<Index>{1, 3, 5}));
    EXPECT_EQ(slice_positions(Slice{-2, std::nullopt, std::nullopt}, 5), (std::vector<Index>{3, 4}));
    EXPECT_TRUE(slice_positions(Slice{3, 1, std::nullopt}, 5).empty());
    EXPECT_THROW(slice_positions(Slice{std::nullopt, std::nullopt, 0}, 5), ContractViolation);
}

TEST(Getitem, FullSliceIsIdentity) {
    Rng rng(1);
    const TnTensor t = fixtures::random_blended(rng, 4, 2000);
    std::vector<IndexItem> items(static_cast<std::size_t>(t.ndim()), Slice{});
    const auto r = getitem(t, IndexSpec(items));
    ASSERT_TRUE(std::holds_alternative<TnTensor>(r));
    EXPECT_LE(rel(full(std::get<TnTensor>(r)), full(t)), 1e-14);
}

TEST(Getitem, AllIntegersGiveScalar) {
    Rng rng(2);
    const TnTensor t = random_tt({3, 4, 5}, 3, rng);
    const auto r = getitem(t, IndexSpec{Index{1}, Index{-1}, Index{2}});
    ASSERT_TRUE(std::holds_alternative<DenseTensor>(r));
    const DenseTensor& d = std::get<DenseTensor>(r);
    EXPECT_EQ(d.ndim(), 0);
    EXPECT_NEAR(d[0], full(t).at({1, 3, 2}), 1e-13);
}

TEST(Getitem, RangeAndDimensionChecks) {
    Rng rng(3);
    const TnTensor t = random_tt({3, 4}, 2, rng);
    EXPECT_THROW(getitem(t, IndexSpec{Index{3}}), IndexError);
    EXPECT_THROW(getitem(t, IndexSpec{Index{-4}}), IndexError);
    EXPECT_THROW(getitem(t, IndexSpec{Index{0}, Index{0}, Index{0}}), IndexError);
    EXPECT_THROW(getitem(t, IndexSpec{Ellipsis{}, Ellipsis{}}), ContractViolation);
    EXPECT_THROW(getitem(t, IndexSpec{IndexList{0, 1}, Slice{}, IndexList{0}}), IndexError);
}

TEST(Getitem, SeparatedFancyIsUnsupported) {
    Rng rng(4);
    const TnTensor t = random_tt({3, 4, 5}, 2, rng);
    EXPECT_THROW(getitem(t, IndexSpec{IndexList{0, 1}, Slice{}, IndexList{1, 2}}), UnsupportedIndexing);
    EXPECT_THROW(getitem(t, IndexSpec{Index{0}, Slice{}, IndexList{1, 2}}), UnsupportedIndexing);
}

TEST(Getitem, ListOnCpKeepsCpForm) {
    Rng rng(5);
    const TnTensor t = random_cp({4, 5, 6}, 3, rng);
    const auto r = getitem(t, IndexSpec{Slice{}, IndexList{4, 0, 0}, Slice{}});
    const TnTensor& s = std::get<TnTensor>(r);
    for (const auto& node : s.nodes()) EXPECT_TRUE(node.is_cp());
    EXPECT_EQ(s.shape(), (Shape{4, 3, 6}));
}

TEST(Getitem, ZippedGroupMatchesOracle) {
    Rng rng(6);
    const TnTensor x = random_tt({3, 4, 5, 2}, 3, rng);
    const IndexSpec spec{Slice{}, IndexList{0, 3, 1}, IndexList{4, 4, 0}, Slice{}};
    const DenseTensor got = as_dense(getitem(x, spec));
    EXPECT_EQ(got.shape(), (Shape{3, 3, 2}));
    EXPECT_LE(rel(got, oracle::dense_getitem(full(x), spec)), 1e-12);
}

TEST(Getitem, ArrayFormGathers) {
    Rng rng(7);
    const TnTensor x = fixtures::random_blended(rng, 4, 2000);
    const DenseTensor dx = full(x);
    std::vector<std::vector<Index>> rows;
    for (int m = 0; m < 12; ++m) {
        std::vector<Index> row;
        for (Index s : x.shape()) row.push_back(fixtures::uniform(rng, 0, s - 1));
        rows.push_back(row);
    }
    const IndexSpec spec = IndexSpec::array(rows);
    const DenseTensor got = std::get<DenseTensor>(getitem(x, spec));
    ASSERT_EQ(got.shape(), (Shape{12}));
    for (std::size_t m = 0; m < rows.size(); ++m)
        EXPECT_NEAR(got[static_cast<Index>(m)], dx.at(rows[m]), 1e-12 * (1.0 + dx.frobenius_norm()));
}

TEST(Getitem, NewAxisAndEllipsis) {
    Rng rng(8);
    const TnTensor x = random_tt({3, 4, 5}, 2, rng);
    const IndexSpec spec{NewAxis{}, Ellipsis{}, Index{1}, NewAxis{}};
    const DenseTensor got = as_dense(getitem(x, spec));
    EXPECT_EQ(got.shape(), (Shape{1, 3, 4, 1}));
    EXPECT_LE(rel(got, oracle::dense_getitem(full(x), spec)), 1e-12);
}

TEST(Getitem, RandomSpecsMatchOracle) {
    Rng rng(9);
    int checked = 0;
    for (int rep = 0; rep < 300; ++rep) {
        const TnTensor x = fixtures::random_blended(rng, 4, 3000);
        const Shape shape = x.shape();
        std::vector<IndexItem> items;
        const bool fancy = fixtures::uniform(rng, 0, 2) == 0;
        const Index fancy_at = fixtures::uniform(rng, 0, x.ndim() - 1);
        for (Index k = 0; k < x.ndim(); ++k) {
            if (fancy && k == fancy_at) {
                IndexList l;
                for (Index i = 0, m = fixtures::uniform(rng, 1, 4); i < m; ++i)
                    l.push_back(fixtures::uniform(rng, 0, shape[static_cast<std::size_t>(k)] - 1));
                items.push_back(l);
            } else {
                IndexItem it = random_item(rng, shape[static_cast<std::size_t>(k)], false);
                if (fancy && std::holds_alternative<Index>(it)) it = Slice{};
                items.push_back(it);
            }
        }
        if (fixtures::uniform(rng, 0, 4) == 0) items.insert(items.begin(), NewAxis{});
        const IndexSpec spec(items);
        const DenseTensor want = oracle::dense_getitem(full(x), spec);
        const DenseTensor got = as_dense(getitem(x, spec));
        ASSERT_EQ(got.shape(), want.shape());
        if (want.numel() > 0) {
            EXPECT_LE(rel(got, want), 1e-12);
            ++checked;
        }
    }
    EXPECT_GT(checked, 200);
}

TEST(Getitem, BatchedMatchesElementwise) {
    Rng rng(10);
    const TnTensor x = random_tt_batched(3, {4, 5, 3}, 2, rng);
    const IndexSpec spec{Slice{1, std::nullopt, std::nullopt}, Index{2}, IndexList{2, 0}};
    const DenseTensor got = as_dense(getitem(x, spec));
    for (Index b = 0; b < 3; ++b) EXPECT_LE(rel(got.leading_slice(b), as_dense(getitem(x.element(b), spec))), 1e-13);
}

TEST(Setitem, SubtensorMatchesOracle) {
    Rng rng(11);
    const TnTensor t = random_tt({4, 5, 6}, 3, rng);
    const TnTensor v = random_tt({2, 5, 3}, 2, rng);
    const IndexSpec spec{Slice{1, 3, std::nullopt}, Slice{}, Slice{0, std::nullopt, 2}};
    const TnTensor r = setitem(t, spec, v);
    EXPECT_LE(rel(full(r), oracle::dense_setitem(full(t), spec, full(v))), 1e-12);
    const auto rt = t.ranks(), rv = v.ranks(), rr = r.ranks();
    for (std::size_t e = 1; e + 1 < rr.size(); ++e) EXPECT_LE(rr[e] - rt[e], rt[e] + rv[e] + 1);
}

TEST(Setitem, ScalarFill) {
    Rng rng(12);
    const TnTensor t = random_tt({3, 4, 5}, 2, rng);
    const IndexSpec spec{Ellipsis{}, Index{2}};
    const TnTensor r = setitem(t, spec, 7.5);
    EXPECT_LE(rel(full(r), oracle::dense_setitem(full(t), spec, DenseTensor({}, 7.5))), 1e-12);
    const DenseTensor region = as_dense(getitem(r, spec));
    for (double v : region.values()) EXPECT_NEAR(v, 7.5, 1e-11);
}

TEST(Setitem, ListAndBroadcastValue) {
    Rng rng(13);
    const TnTensor t = random_cp({4, 5, 3}, 2, rng);
    const TnTensor v = random_tt({1, 2, 3}, 1, rng);
    const IndexSpec spec{Slice{}, IndexList{4, 1}, Slice{}};
    const TnTensor r = setitem(t, spec, v);
    EXPECT_LE(rel(full(r), oracle::dense_setitem(full(t), spec, full(v))), 1e-12);
}

TEST(Setitem, RandomRegions) {
    Rng rng(14);
    for (int rep = 0; rep < 60; ++rep) {
        const TnTensor t = fixtures::random_blended(rng, 4, 2000);
        std::vector<IndexItem> items;
        for (Index s : t.shape()) items.push_back(random_item(rng, s, false));
        const IndexSpec spec(items);
        const double value = static_cast<double>(rep) - 30.0;
        const TnTensor r = setitem(t, spec, value);
        EXPECT_LE(rel(full(r), oracle::dense_setitem(full(t), spec, DenseTensor({}, value))), 1e-11)
            << "rep " << rep;
    }
}

TEST(Setitem, RejectsUnsupportedForms) {
    Rng rng(15);
    const TnTensor t = random_tt({3, 4}, 2, rng);
    EXPECT_THROW(setitem(t, IndexSpec::array({{0, 0}}), 1.0), ContractViolation);
    EXPECT_THROW(setitem(t, IndexSpec{NewAxis{}, Slice{}}, 1.0), ContractViolation);
    EXPECT_THROW(setitem(t, IndexSpec{IndexList{0, 0}, Slice{}}, 1.0), ContractViolation);
    EXPECT_THROW(setitem(t, IndexSpec{Slice{}, Slice{}}, random_tt({2, 4}, 1, rng)), BroadcastError);
}

TEST(Setitem, InPlaceFacades) {
    Rng rng(16);
    TnTensor t = random_tt({3, 4}, 2, rng);
    const DenseTensor before = full(t);
    add_assign(t, IndexSpec{Index{1}, Slice{}}, 2.0);
    DenseTensor want = before;
    for (Index j = 0; j < 4; ++j) want.at({1, j}) += 2.0;
    EXPECT_LE(rel(full(t), want), 1e-12);
    assign(t, IndexSpec{Slice{}, Index{0}}, 0.0);
    for (Index i = 0; i < 3; ++i) want.at({i, 0}) = 0.0;
    EXPECT_LE(rel(full(t), want), 1e-12);
}

TEST(Broadcast, ShapesAndErrors) {
    EXPECT_EQ(broadcast_shapes({3, 1}, {1, 4}), (Shape{3, 4}));
    EXPECT_EQ(broadcast_shapes({5}, {2, 1, 5}), (Shape{2, 1, 5}));
    EXPECT_EQ(broadcast_shapes({2, 3}, {2, 3}), (Shape{2, 3}));
    EXPECT_THROW(broadcast_shapes({2, 3}, {3, 3}), BroadcastError);
    Rng rng(17);
    for (int rep = 0; rep < 50; ++rep) {
        Shape a = fixtures::random_shape(rng, fixtures::uniform(rng, 1, 4), 1, 3);
        Shape b = fixtures::random_shape(rng, fixtures::uniform(rng, 1, 4), 1, 3);
        bool ok = true;
        Shape want;
        try {
            want = oracle::broadcast_shapes(a, b);
        } catch (const BroadcastError&) {
            ok = false;
        }
        if (ok) EXPECT_EQ(broadcast_shapes(a, b), want);
        else EXPECT_THROW(broadcast_shapes(a, b), BroadcastError);
    }
}

TEST(Broadcast, ToShapeMatchesOracle) {
    Rng rng(18);
    const TnTensor t = random_tt({3, 1, 2}, 2, rng);
    const Shape target{2, 3, 4, 2};
    EXPECT_LE(rel(full(broadcast_to(t, target)), oracle::broadcast_to(full(t), target)), 1e-13);
    EXPECT_THROW(broadcast_to(t, {3, 3, 3}), BroadcastError);
}
