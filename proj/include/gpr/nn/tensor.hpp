#ifndef GPR_NN_TENSOR_HPP
#define GPR_NN_TENSOR_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gpr::nn {

/**
 * @brief Dense row-major tensor of doubles.
 */
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;

    static Tensor zeros(std::vector<std::size_t> shape) {
        Tensor t;
        t.shape = std::move(shape);
        t.data.assign(t.numel_of(t.shape), 0.0);
        return t;
    }

    static Tensor from(std::vector<std::size_t> shape, std::vector<double> values) {
        Tensor t;
        t.shape = std::move(shape);
        t.data = std::move(values);
        if (t.data.size() != t.numel_of(t.shape))
            throw std::invalid_argument("Tensor: data length != product(shape)");
        return t;
    }

    std::size_t numel() const { return data.size(); }

    std::size_t dim(std::size_t i) const { return shape.at(i); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    static std::size_t numel_of(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }
};

}  // namespace gpr::nn

#endif  // GPR_NN_TENSOR_HPP
