#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace tnt {

using Index = std::int64_t;
using Shape = std::vector<Index>;

/// Product of all entries of a shape (1 for the empty shape).
Index shape_numel(std::span<const Index> shape);

/**
 * Plain N-dimensional array of doubles stored row-major (last index fastest).
 *
 * A zero-dimensional tensor (empty shape) holds exactly one value. Batched
 * dense data is expressed with the batch as an explicit leading mode.
 */
class DenseTensor {
public:
    DenseTensor() : data_(1, 0.0) {}
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<double> data);
    DenseTensor(Shape shape, double fill);

    static DenseTensor scalar(double value) { return DenseTensor({}, std::vector<double>{value}); }

    const Shape& shape() const noexcept { return shape_; }
    Index ndim() const noexcept { return static_cast<Index>(shape_.size()); }
    Index dim(Index k) const { return shape_.at(static_cast<std::size_t>(k)); }
    Index numel() const noexcept { return static_cast<Index>(data_.size()); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    double& operator[](Index flat) { return data_[static_cast<std::size_t>(flat)]; }
    double operator[](Index flat) const { return data_[static_cast<std::size_t>(flat)]; }

    double& at(std::span<const Index> index);
    double at(std::span<const Index> index) const;
    double& at(std::initializer_list<Index> index) { return at(std::span(index.begin(), index.size())); }
    double at(std::initializer_list<Index> index) const {
        return at(std::span(index.begin(), index.size()));
    }

    Index flat_index(std::span<const Index> index) const;

    DenseTensor reshaped(Shape shape) const;
    DenseTensor permuted(std::span<const Index> perm) const;

    /// Sub-tensor at position `i` of the leading mode.
    DenseTensor leading_slice(Index i) const;
    /// Stacks equally shaped tensors along a new leading mode.
    static DenseTensor stack(std::span<const DenseTensor> items);

    double frobenius_norm() const;

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// ||a - b||_F / ||b||_F (absolute error when b is zero).
double relative_error(const DenseTensor& a, const DenseTensor& b);

/// Largest absolute entry-wise difference.
double max_abs_diff(const DenseTensor& a, const DenseTensor& b);

}  // namespace tnt
