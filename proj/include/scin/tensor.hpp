#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scin/error.hpp"

namespace scin {

using Shape = std::vector<std::size_t>;

// Storage aligned to the widest SIMD packet. Eigen picks its vectorised
// reduction split from the buffer address, so unaligned storage would make
// sums depend on where the allocator happened to place them.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major N-dimensional array.
///
/// The element count always equals the product of the shape and every
/// dimension is at least one; both are checked on construction.
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;

    explicit BasicTensor(Shape shape, T fill = T{0})
        : shape_(checked(std::move(shape))), data_(shape_size(shape_), fill) {}

    BasicTensor(Shape shape, const std::vector<T>& data)
        : BasicTensor(std::move(shape), AlignedVector<T>(data.begin(), data.end())) {}

    BasicTensor(Shape shape, AlignedVector<T> data)
        : shape_(checked(std::move(shape))), data_(std::move(data)) {
        if (data_.size() != shape_size(shape_)) {
            fail(ErrorKind::invalid_shape, "data length " + std::to_string(data_.size()) +
                                               " does not match shape " + shape_to_string(shape_));
        }
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    T* raw() noexcept { return data_.data(); }
    const T* raw() const noexcept { return data_.data(); }

    T& operator[](std::size_t k) noexcept { return data_[k]; }
    const T& operator[](std::size_t k) const noexcept { return data_[k]; }

    T& at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
    const T& at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

    /// Row-major linear offset of a multi-index.
    std::size_t offset(std::span<const std::size_t> index) const {
        if (index.size() != shape_.size()) {
            fail(ErrorKind::shape_mismatch, "index rank " + std::to_string(index.size()) +
                                                " != tensor rank " + std::to_string(shape_.size()));
        }
        std::size_t k = 0;
        for (std::size_t a = 0; a < shape_.size(); ++a) {
            if (index[a] >= shape_[a]) {
                fail(ErrorKind::shape_mismatch, "index out of range on axis " + std::to_string(a));
            }
            k = k * shape_[a] + index[a];
        }
        return k;
    }
    std::size_t offset(std::initializer_list<std::size_t> index) const {
        return offset(std::span<const std::size_t>(index.begin(), index.size()));
    }

    /// Inverse of offset().
    std::vector<std::size_t> unravel(std::size_t k) const {
        if (k >= data_.size()) fail(ErrorKind::shape_mismatch, "linear index out of range");
        std::vector<std::size_t> index(shape_.size());
        for (std::size_t a = shape_.size(); a-- > 0;) {
            index[a] = k % shape_[a];
            k /= shape_[a];
        }
        return index;
    }

    /// Same data, new shape of equal element count.
    BasicTensor reshaped(Shape shape) const& { return BasicTensor(std::move(shape), data_); }
    BasicTensor reshaped(Shape shape) && { return BasicTensor(std::move(shape), std::move(data_)); }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    template <typename U>
    BasicTensor<U> cast() const {
        return BasicTensor<U>(shape_, AlignedVector<U>(data_.begin(), data_.end()));
    }

    bool operator==(const BasicTensor&) const = default;

private:
    static Shape checked(Shape shape) {
        if (shape.empty()) fail(ErrorKind::invalid_shape, "tensor shape must have at least one dimension");
        for (std::size_t d : shape) {
            if (d == 0) fail(ErrorKind::invalid_shape, "zero dimension in shape " + shape_to_string(shape));
        }
        return shape;
    }

    Shape shape_;
    AlignedVector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

/// Shape-checked constructor taking signed dimensions, so negative sizes are
/// reported rather than wrapped.
template <typename T>
BasicTensor<T> tensor_new(std::span<const long long> dims, T fill) {
    Shape shape;
    for (long long d : dims) {
        if (d <= 0) fail(ErrorKind::invalid_shape, "dimension " + std::to_string(d) + " must be >= 1");
        shape.push_back(static_cast<std::size_t>(d));
    }
    return BasicTensor<T>(std::move(shape), fill);
}

template <typename T>
BasicTensor<T> tensor_new(std::initializer_list<long long> dims, T fill) {
    return tensor_new<T>(std::span<const long long>(dims.begin(), dims.size()), fill);
}

}  // namespace scin
