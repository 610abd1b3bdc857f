#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "n2k/errors.hpp"

namespace n2k {

// (batch, channels, height, width), row-major, 64-bit values.
struct Shape {
    std::size_t batch = 0;
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;

    std::size_t total() const { return batch * channels * height * width; }

    bool operator==(const Shape&) const = default;

    std::string str() const {
        return "(" + std::to_string(batch) + "," + std::to_string(channels) + "," +
               std::to_string(height) + "," + std::to_string(width) + ")";
    }
};

class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(Shape s) : shape_(s), data_(s.total(), 0.0) {}
    Tensor(Shape s, double fill_value) : shape_(s), data_(s.total(), fill_value) {}

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& at(std::size_t b, std::size_t c, std::size_t i, std::size_t j) {
        return data_[((b * shape_.channels + c) * shape_.height + i) * shape_.width + j];
    }
    double at(std::size_t b, std::size_t c, std::size_t i, std::size_t j) const {
        return data_[((b * shape_.channels + c) * shape_.height + i) * shape_.width + j];
    }

    // Pointer to the (b, c) plane, height x width row-major.
    double* plane(std::size_t b, std::size_t c) {
        return data_.data() + (b * shape_.channels + c) * shape_.height * shape_.width;
    }
    const double* plane(std::size_t b, std::size_t c) const {
        return data_.data() + (b * shape_.channels + c) * shape_.height * shape_.width;
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Tensor&) const = default;

  private:
    Shape shape_;
    std::vector<double> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
    if (a.shape() != b.shape()) {
        throw ConfigError(std::string(where) + ": shape mismatch " + a.shape().str() +
                          " vs " + b.shape().str());
    }
}

}  // namespace n2k
