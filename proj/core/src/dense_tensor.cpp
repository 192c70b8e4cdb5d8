#include "tnt/dense_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tnt/errors.hpp"

namespace tnt {

namespace {

void check_shape(const Shape& shape) {
    for (Index s : shape) {
        if (s < 0) throw ContractViolation("DenseTensor: negative mode size " + std::to_string(s));
    }
}

}  // namespace

Index shape_numel(std::span<const Index> shape) {
    return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

DenseTensor::DenseTensor(Shape shape) : DenseTensor(std::move(shape), 0.0) {}

DenseTensor::DenseTensor(Shape shape, double fill) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(static_cast<std::size_t>(shape_numel(shape_)), fill);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (static_cast<Index>(data_.size()) != shape_numel(shape_)) {
        throw ContractViolation("DenseTensor: data length " + std::to_string(data_.size()) +
                                " does not match shape product " +
                                std::to_string(shape_numel(shape_)));
    }
}

Index DenseTensor::flat_index(std::span<const Index> index) const {
    if (index.size() != shape_.size()) throw ContractViolation("DenseTensor: index arity mismatch");
    Index flat = 0;
    for (std::size_t k = 0; k < shape_.size(); ++k) {
        if (index[k] < 0 || index[k] >= shape_[k]) throw IndexError("DenseTensor: index out of range");
        flat = flat * shape_[k] + index[k];
    }
    return flat;
}

double& DenseTensor::at(std::span<const Index> index) { return data_[static_cast<std::size_t>(flat_index(index))]; }

double DenseTensor::at(std::span<const Index> index) const {
    return data_[static_cast<std::size_t>(flat_index(index))];
}

DenseTensor DenseTensor::reshaped(Shape shape) const {
    if (shape_numel(shape) != numel()) throw ContractViolation("DenseTensor::reshaped: size mismatch");
    return DenseTensor(std::move(shape), data_);
}

DenseTensor DenseTensor::permuted(std::span<const Index> perm) const {
    const auto n = shape_.size();
    if (perm.size() != n) throw ContractViolation("DenseTensor::permuted: arity mismatch");
    std::vector<bool> seen(n, false);
    for (Index p : perm) {
        if (p < 0 || p >= static_cast<Index>(n) || seen[static_cast<std::size_t>(p)])
            throw ContractViolation("DenseTensor::permuted: not a permutation");
        seen[static_cast<std::size_t>(p)] = true;
    }
    Shape out_shape(n);
    for (std::size_t k = 0; k < n; ++k) out_shape[k] = shape_[static_cast<std::size_t>(perm[k])];

    // Strides of the source, visited in output order.
    std::vector<Index> src_stride(n, 1);
    for (std::size_t k = n; k-- > 1;) src_stride[k - 1] = src_stride[k] * shape_[k];
    std::vector<Index> stride(n);
    for (std::size_t k = 0; k < n; ++k) stride[k] = src_stride[static_cast<std::size_t>(perm[k])];

    DenseTensor out(out_shape);
    std::vector<Index> counter(n, 0);
    Index src = 0;
    for (Index flat = 0; flat < out.numel(); ++flat) {
        out.data_[static_cast<std::size_t>(flat)] = data_[static_cast<std::size_t>(src)];
        for (std::size_t k = n; k-- > 0;) {
            if (++counter[k] < out_shape[k]) {
                src += stride[k];
                break;
            }
            src -= stride[k] * (out_shape[k] - 1);
            counter[k] = 0;
        }
    }
    return out;
}

DenseTensor DenseTensor::leading_slice(Index i) const {
    if (shape_.empty()) throw ContractViolation("DenseTensor::leading_slice on a scalar");
    if (i < 0 || i >= shape_[0]) throw IndexError("DenseTensor::leading_slice: index out of range");
    Shape rest(shape_.begin() + 1, shape_.end());
    const Index len = shape_numel(rest);
    std::vector<double> data(data_.begin() + i * len, data_.begin() + (i + 1) * len);
    return DenseTensor(std::move(rest), std::move(data));
}

DenseTensor DenseTensor::stack(std::span<const DenseTensor> items) {
    if (items.empty()) throw ContractViolation("DenseTensor::stack: no items");
    Shape shape{static_cast<Index>(items.size())};
    shape.insert(shape.end(), items[0].shape().begin(), items[0].shape().end());
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(shape_numel(shape)));
    for (const auto& item : items) {
        if (item.shape() != items[0].shape()) throw ContractViolation("DenseTensor::stack: shape mismatch");
        data.insert(data.end(), item.data_.begin(), item.data_.end());
    }
    return DenseTensor(std::move(shape), std::move(data));
}

double DenseTensor::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double relative_error(const DenseTensor& a, const DenseTensor& b) {
    if (a.numel() != b.numel()) throw ContractViolation("relative_error: size mismatch");
    double num = 0.0;
    double den = 0.0;
    for (Index i = 0; i < a.numel(); ++i) {
        const double d = a[i] - b[i];
        num += d * d;
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
    if (a.numel() != b.numel()) throw ContractViolation("max_abs_diff: size mismatch");
    double m = 0.0;
    for (Index i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace tnt
