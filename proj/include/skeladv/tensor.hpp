#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace skeladv {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Frames × joints × channels. For motions the channel axis is the coordinate dimension D.
struct Shape {
  int frames = 0;
  int joints = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(frames) * joints * channels;
  }
  std::size_t frame_size() const { return static_cast<std::size_t>(joints) * channels; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

/// Dense row-major T×N×C array of doubles.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Shape shape, double fill = 0.0) : shape_(shape), data_(shape.size(), fill) {}
  Tensor3(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
      throw Error("tensor data size " + std::to_string(data_.size()) + " does not match shape " +
                  to_string(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  int frames() const { return shape_.frames; }
  int joints() const { return shape_.joints; }
  int channels() const { return shape_.channels; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int t, int i, int k) const {
    return (static_cast<std::size_t>(t) * shape_.joints + i) * shape_.channels + k;
  }
  double& operator()(int t, int i, int k) { return data_[index(t, i, k)]; }
  double operator()(int t, int i, int k) const { return data_[index(t, i, k)]; }

  std::span<double> frame(int t) {
    return {data_.data() + static_cast<std::size_t>(t) * shape_.frame_size(), shape_.frame_size()};
  }
  std::span<const double> frame(int t) const {
    return {data_.data() + static_cast<std::size_t>(t) * shape_.frame_size(), shape_.frame_size()};
  }
  std::span<double> joint(int t, int i) {
    return {data_.data() + index(t, i, 0), static_cast<std::size_t>(shape_.channels)};
  }
  std::span<const double> joint(int t, int i) const {
    return {data_.data() + index(t, i, 0), static_cast<std::size_t>(shape_.channels)};
  }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool operator==(const Tensor3&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Dense row-major matrix, used for layer weights and the adjacency operator.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  bool operator==(const Matrix&) const = default;
};

double l2_norm(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double linf_distance(std::span<const double> a, std::span<const double> b);

}  // namespace skeladv
