#include "tnt/matrices.hpp"

#include <cmath>

#include "detail.hpp"

namespace tnt {

using detail::require;
using detail::RowMatrix;

namespace {

Index product(const Shape& s) { return shape_numel(s); }

// M x N matrix -> (m_1 n_1, ..., m_k n_k) tensor.
DenseTensor interleave(const DenseTensor& matrix, const Shape& row_dims, const Shape& col_dims) {
    require(matrix.ndim() == 2, "expected a matrix");
    require(row_dims.size() == col_dims.size() && !row_dims.empty(),
            "row and column dimension lists must be non-empty and of equal length");
    require(product(row_dims) == matrix.dim(0), "row dimensions " + detail::shape_string(row_dims) +
                                                    " do not multiply to " + std::to_string(matrix.dim(0)));
    require(product(col_dims) == matrix.dim(1), "column dimensions " + detail::shape_string(col_dims) +
                                                    " do not multiply to " + std::to_string(matrix.dim(1)));
    const std::size_t k = row_dims.size();
    Shape split(row_dims);
    split.insert(split.end(), col_dims.begin(), col_dims.end());
    std::vector<Index> perm;
    Shape merged;
    for (std::size_t i = 0; i < k; ++i) {
        perm.push_back(static_cast<Index>(i));
        perm.push_back(static_cast<Index>(k + i));
        merged.push_back(row_dims[i] * col_dims[i]);
    }
    return matrix.reshaped(split).permuted(perm).reshaped(merged);
}

DenseTensor deinterleave(const DenseTensor& merged, const Shape& row_dims, const Shape& col_dims) {
    const std::size_t k = row_dims.size();
    Shape pairs;
    for (std::size_t i = 0; i < k; ++i) {
        pairs.push_back(row_dims[i]);
        pairs.push_back(col_dims[i]);
    }
    std::vector<Index> perm;
    for (std::size_t i = 0; i < k; ++i) perm.push_back(static_cast<Index>(2 * i));
    for (std::size_t i = 0; i < k; ++i) perm.push_back(static_cast<Index>(2 * i + 1));
    return merged.reshaped(pairs).permuted(perm).reshaped({product(row_dims), product(col_dims)});
}

RowMatrix square_factor(const TTMatrix& a, Index i) {
    const auto& c = a.cores()[static_cast<std::size_t>(i)];
    const Index m = c.dim(1);
    return detail::ConstRowMap(c.data().data(), m, m);
}

void require_rank1_square(const TTMatrix& a, const char* op) {
    for (Index r : a.ranks()) require(r == 1, std::string(op) + ": TT matrix must have all ranks equal to 1");
    require(a.row_dims() == a.col_dims(), std::string(op) + ": factors must be square");
}

// Log-magnitude and sign of factor i's determinant; rejects singular factors.
LogDeterminant factor_determinant(const TTMatrix& a, Index i) {
    const RowMatrix f = square_factor(a, i);
    const Index m = f.rows();
    const double det = f.partialPivLu().determinant();
    const double scale = std::pow(f.norm(), static_cast<double>(m));
    if (!(std::abs(det) > 1e-12 * scale)) {
        throw SingularFactorError(static_cast<std::size_t>(i),
                                  "Kronecker factor " + std::to_string(i) + " is singular (|det| = " +
                                      std::to_string(std::abs(det)) + ")");
    }
    return {det < 0.0 ? -1.0 : 1.0, std::log(std::abs(det))};
}

}  // namespace

TTMatrix::TTMatrix(std::vector<DenseTensor> cores) : cores_(std::move(cores)) {
    if (cores_.empty()) throw ContractViolation("TT matrix needs at least one core");
    Index prev = 1;
    for (std::size_t i = 0; i < cores_.size(); ++i) {
        const auto& c = cores_[i];
        require(c.ndim() == 4, "TT matrix cores must be 4-dimensional");
        if (c.dim(0) != prev) {
            throw StructuralError("TT matrix rank mismatch at core " + std::to_string(i) + ": expected left rank " +
                                  std::to_string(prev) + ", got " + std::to_string(c.dim(0)));
        }
        row_dims_.push_back(c.dim(1));
        col_dims_.push_back(c.dim(2));
        prev = c.dim(3);
    }
    if (prev != 1) throw StructuralError("TT matrix last core must have right rank 1");
}

Index TTMatrix::rows() const { return product(row_dims_); }
Index TTMatrix::cols() const { return product(col_dims_); }

std::vector<Index> TTMatrix::ranks() const {
    std::vector<Index> out{1};
    for (const auto& c : cores_) out.push_back(c.dim(3));
    return out;
}

CPMatrix::CPMatrix(std::vector<DenseTensor> factors, Shape row_dims, Shape col_dims)
    : factors_(std::move(factors)), row_dims_(std::move(row_dims)), col_dims_(std::move(col_dims)) {
    require(!factors_.empty(), "CP matrix needs at least one factor");
    require(factors_.size() == row_dims_.size() && factors_.size() == col_dims_.size(),
            "CP matrix factor count must match the dimension lists");
    const Index r = factors_.front().ndim() == 2 ? factors_.front().dim(1) : 0;
    require(r >= 1, "CP matrix rank must be positive");
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        const auto& f = factors_[i];
        require(f.ndim() == 2 && f.dim(0) == row_dims_[i] * col_dims_[i] && f.dim(1) == r,
                "CP matrix factor " + std::to_string(i) + " must have shape (" +
                    std::to_string(row_dims_[i] * col_dims_[i]) + ", " + std::to_string(r) + ")");
    }
}

Index CPMatrix::rows() const { return product(row_dims_); }
Index CPMatrix::cols() const { return product(col_dims_); }

TTMatrix ttm_from_dense(const DenseTensor& matrix, const Shape& row_dims, const Shape& col_dims,
                        const TruncationSpec& spec) {
    const TnTensor t = tt_svd(interleave(matrix, row_dims, col_dims), spec);
    std::vector<DenseTensor> cores;
    for (Index i = 0; i < t.ndim(); ++i) {
        const auto& c = t.node(i).core();
        cores.push_back(c.reshaped({c.dim(0), row_dims[static_cast<std::size_t>(i)], col_dims[static_cast<std::size_t>(i)], c.dim(2)}));
    }
    return TTMatrix(std::move(cores));
}

DenseTensor ttm_to_dense(const TTMatrix& a) {
    std::vector<ModeNode> nodes;
    for (const auto& c : a.cores()) nodes.push_back(ModeNode::tt(c.reshaped({c.dim(0), c.dim(1) * c.dim(2), c.dim(3)})));
    return deinterleave(full(TnTensor(std::move(nodes))), a.row_dims(), a.col_dims());
}

DenseTensor tt_multiply(const TTMatrix& a, const DenseTensor& v) {
    require(v.ndim() == 1 && v.dim(0) == a.cols(),
            "tt_multiply: vector length " + std::to_string(v.numel()) + " does not match " + std::to_string(a.cols()));
    // x holds (rank, done rows, remaining columns).
    std::vector<double> x(v.values().begin(), v.values().end());
    Index rank = 1, done = 1, rest = a.cols();
    for (const auto& g : a.cores()) {
        const Index m = g.dim(1), n = g.dim(2), r2 = g.dim(3);
        rest /= n;
        std::vector<double> y(static_cast<std::size_t>(r2 * done * m * rest), 0.0);
        const double* gd = g.data().data();
        for (Index p = 0; p < done; ++p)
            for (Index r1 = 0; r1 < rank; ++r1)
                for (Index j = 0; j < n; ++j) {
                    const double* xs = x.data() + ((r1 * done + p) * n + j) * rest;
                    for (Index i = 0; i < m; ++i)
                        for (Index b = 0; b < r2; ++b) {
                            const double w = gd[((r1 * m + i) * n + j) * r2 + b];
                            if (w == 0.0) continue;
                            double* ys = y.data() + ((b * done + p) * m + i) * rest;
                            for (Index s = 0; s < rest; ++s) ys[s] += w * xs[s];
                        }
                }
        x = std::move(y);
        rank = r2;
        done *= m;
    }
    return DenseTensor({a.rows()}, std::move(x));
}

TnTensor tt_multiply(const TTMatrix& a, const TnTensor& v) {
    require(!v.batched(), "tt_multiply: batched vectors are not supported");
    require(v.shape() == a.col_dims(), "tt_multiply: vector shape " + detail::shape_string(v.shape()) +
                                           " does not match column dimensions " + detail::shape_string(a.col_dims()));
    const detail::Chain chain = detail::plain_chain(v, 0);
    detail::Chain out;
    for (std::size_t k = 0; k < chain.size(); ++k) {
        const auto& g = a.cores()[k];
        const auto& c = chain[k];
        const Index ra = g.dim(0), m = g.dim(1), n = g.dim(2), rb = g.dim(3);
        detail::Core core(ra * c.rl, m, rb * c.rr);
        for (Index a1 = 0; a1 < ra; ++a1)
            for (Index i = 0; i < m; ++i)
                for (Index j = 0; j < n; ++j)
                    for (Index b = 0; b < rb; ++b) {
                        const double w = g.data()[static_cast<std::size_t>(((a1 * m + i) * n + j) * rb + b)];
                        if (w == 0.0) continue;
                        for (Index al = 0; al < c.rl; ++al)
                            for (Index be = 0; be < c.rr; ++be) core(a1 * c.rl + al, i, b * c.rr + be) += w * c(al, j, be);
                    }
        out.push_back(std::move(core));
    }
    return detail::from_chain(out);
}

TTMatrix rank1_inverse(const TTMatrix& a) {
    require_rank1_square(a, "rank1_inverse");
    std::vector<DenseTensor> cores;
    for (Index i = 0; i < a.ndim(); ++i) {
        factor_determinant(a, i);
        const RowMatrix inv = square_factor(a, i).inverse();
        const Index m = inv.rows();
        cores.emplace_back(Shape{1, m, m, 1}, std::vector<double>(inv.data(), inv.data() + inv.size()));
    }
    return TTMatrix(std::move(cores));
}

LogDeterminant rank1_log_determinant(const TTMatrix& a) {
    require_rank1_square(a, "rank1_determinant");
    const Index total = a.rows();
    LogDeterminant out;
    for (Index i = 0; i < a.ndim(); ++i) {
        const LogDeterminant f = factor_determinant(a, i);
        const Index power = total / a.row_dims()[static_cast<std::size_t>(i)];
        out.log_abs += static_cast<double>(power) * f.log_abs;
        if (f.sign < 0.0 && power % 2 == 1) out.sign = -out.sign;
    }
    return out;
}

double rank1_determinant(const TTMatrix& a) {
    const LogDeterminant d = rank1_log_determinant(a);
    return d.sign * std::exp(d.log_abs);
}

CPMatrix cpm_from_dense(const DenseTensor& matrix, const Shape& row_dims, const Shape& col_dims, Index rank,
                        CpAlsOptions options) {
    require(rank >= 1, "cpm_from_dense: rank must be positive");
    options.rank = rank;
    const TnTensor t = cp_als(interleave(matrix, row_dims, col_dims), options).tensor;
    std::vector<DenseTensor> factors;
    for (const auto& node : t.nodes()) factors.push_back(node.core());
    return CPMatrix(std::move(factors), row_dims, col_dims);
}

DenseTensor cpm_to_dense(const CPMatrix& a) {
    std::vector<ModeNode> nodes;
    for (const auto& f : a.factors()) nodes.push_back(ModeNode::cp(f));
    return deinterleave(full(TnTensor(std::move(nodes))), a.row_dims(), a.col_dims());
}

DenseTensor cp_multiply(const CPMatrix& a, const DenseTensor& v) {
    require(v.ndim() == 1 && v.dim(0) == a.cols(),
            "cp_multiply: vector length " + std::to_string(v.numel()) + " does not match " + std::to_string(a.cols()));
    const Index k = a.ndim();
    const Index r = a.rank();
    std::vector<double> out(static_cast<std::size_t>(a.rows()), 0.0);
    for (Index t = 0; t < r; ++t) {
        // w holds (done rows, current mode, remaining columns).
        std::vector<double> w(v.values().begin(), v.values().end());
        Index done = 1, rest = a.cols();
        for (Index i = 0; i < k; ++i) {
            const Index m = a.row_dims()[static_cast<std::size_t>(i)], n = a.col_dims()[static_cast<std::size_t>(i)];
            rest /= n;
            const auto& f = a.factors()[static_cast<std::size_t>(i)];
            std::vector<double> y(static_cast<std::size_t>(done * m * rest), 0.0);
            for (Index p = 0; p < done; ++p)
                for (Index row = 0; row < m; ++row)
                    for (Index j = 0; j < n; ++j) {
                        const double c = f.data()[static_cast<std::size_t>((row * n + j) * r + t)];
                        if (c == 0.0) continue;
                        const double* xs = w.data() + (p * n + j) * rest;
                        double* ys = y.data() + (p * m + row) * rest;
                        for (Index s = 0; s < rest; ++s) ys[s] += c * xs[s];
                    }
            w = std::move(y);
            done *= m;
        }
        for (std::size_t q = 0; q < out.size(); ++q) out[q] += w[q];
    }
    return DenseTensor({a.rows()}, std::move(out));
}

}  // namespace tnt
