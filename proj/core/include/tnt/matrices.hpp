#pragma once

#include <vector>

#include "tnt/decompose.hpp"
#include "tnt/dense_tensor.hpp"
#include "tnt/tensor.hpp"

namespace tnt {

/// Matrix in TT format: core i has shape (R_i, m_i, n_i, R_{i+1}) and the
/// represented matrix is (prod m_i) x (prod n_i).
class TTMatrix {
public:
    explicit TTMatrix(std::vector<DenseTensor> cores);

    const std::vector<DenseTensor>& cores() const noexcept { return cores_; }
    Index ndim() const noexcept { return static_cast<Index>(cores_.size()); }
    const Shape& row_dims() const noexcept { return row_dims_; }
    const Shape& col_dims() const noexcept { return col_dims_; }
    Index rows() const;
    Index cols() const;
    std::vector<Index> ranks() const;

    bool operator==(const TTMatrix&) const = default;

private:
    std::vector<DenseTensor> cores_;
    Shape row_dims_;
    Shape col_dims_;
};

/// Matrix in CP format: factor i is stored flat as (m_i * n_i, R), row index
/// a * n_i + b for the pair (a, b).
class CPMatrix {
public:
    CPMatrix(std::vector<DenseTensor> factors, Shape row_dims, Shape col_dims);

    const std::vector<DenseTensor>& factors() const noexcept { return factors_; }
    Index ndim() const noexcept { return static_cast<Index>(factors_.size()); }
    Index rank() const { return factors_.front().dim(1); }
    const Shape& row_dims() const noexcept { return row_dims_; }
    const Shape& col_dims() const noexcept { return col_dims_; }
    Index rows() const;
    Index cols() const;

    bool operator==(const CPMatrix&) const = default;

private:
    std::vector<DenseTensor> factors_;
    Shape row_dims_;
    Shape col_dims_;
};

TTMatrix ttm_from_dense(const DenseTensor& matrix, const Shape& row_dims, const Shape& col_dims,
                        const TruncationSpec& spec);
DenseTensor ttm_to_dense(const TTMatrix& a);

/// Dense matvec; v has length cols().
DenseTensor tt_multiply(const TTMatrix& a, const DenseTensor& v);
/// TT matvec; v has shape col_dims. Ranks multiply and nothing is rounded.
TnTensor tt_multiply(const TTMatrix& a, const TnTensor& v);

/// Inverse of a rank-1 (Kronecker) TT matrix with square factors.
/// Throws SingularFactorError naming the offending factor.
TTMatrix rank1_inverse(const TTMatrix& a);

struct LogDeterminant {
    double sign = 1.0;
    double log_abs = 0.0;
};

LogDeterminant rank1_log_determinant(const TTMatrix& a);
double rank1_determinant(const TTMatrix& a);

/// Fits a CP matrix by ALS on the interleaved, pair-merged tensor.
CPMatrix cpm_from_dense(const DenseTensor& matrix, const Shape& row_dims, const Shape& col_dims, Index rank,
                        CpAlsOptions options = {});
DenseTensor cpm_to_dense(const CPMatrix& a);
DenseTensor cp_multiply(const CPMatrix& a, const DenseTensor& v);

}  // namespace tnt
