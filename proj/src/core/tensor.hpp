#pragma once

#include <cstddef>
#include <new>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace opinn {

// 64-byte aligned allocator for numeric buffers. Keeping every buffer on the
// same alignment keeps Eigen's vectorized loop peeling identical across
// otherwise equal calls, which the bitwise-reproducibility guarantees need.
template <class T>
struct AlignedAlloc {
    using value_type = T;
    static constexpr std::align_val_t kAlign{64};

    AlignedAlloc() = default;
    template <class U>
    AlignedAlloc(const AlignedAlloc<U>&) noexcept {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
    }
    void deallocate(T* p, std::size_t n) noexcept {
        ::operator delete(p, n * sizeof(T), kAlign);
    }
    template <class U>
    bool operator==(const AlignedAlloc<U>&) const noexcept {
        return true;
    }
};

// Dense row-major f64 matrix. Scalars are 1x1.
struct Tensor {
    using Vec = std::vector<double, AlignedAlloc<double>>;

    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Tensor() = default;
    Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Tensor(std::size_t r, std::size_t c, Vec d)
        : rows(r), cols(c), data(std::move(d)) {
        if (data.size() != rows * cols)
            throw InvalidParameterError("tensor: data length does not match shape");
    }

    static Tensor zeros(std::size_t r, std::size_t c) { return Tensor(r, c); }
    static Tensor scalar(double v) {
        Tensor t(1, 1);
        t.data[0] = v;
        return t;
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    std::string shape_str() const {
        return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
    }

    bool operator==(const Tensor&) const = default;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b))
        throw InvalidParameterError(std::string(what) + ": shape mismatch " + a.shape_str() +
                                    " vs " + b.shape_str());
}

}  // namespace opinn
