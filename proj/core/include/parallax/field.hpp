#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "parallax/error.hpp"

namespace parallax {

/// Dense row-major H x W grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, const T& fill)
      : width_(width),
        height_(height),
        data_(static_cast<std::size_t>(checked_extent(width, height)), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static long long checked_extent(int width, int height) {
    if (width < 0 || height < 0) {
      fail(ErrorCode::InvalidArgument, "grid dimensions must be nonnegative");
    }
    return static_cast<long long>(width) * height;
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Boolean raster stored as bytes (0 or 1).
using Mask = Grid<std::uint8_t>;

template <typename Value>
Value zero_value() {
  if constexpr (std::is_arithmetic_v<Value>) {
    return Value{0};
  } else {
    return Value::Zero();
  }
}

/// Values plus a validity mask on the same grid. Invalid cells are excluded
/// from every reduction; their stored value is unspecified. `Tag` keeps
/// gamma, depth, height and flow grids from being mixed up.
template <typename Value, typename Tag>
class Field {
 public:
  using value_type = Value;

  Field() = default;
  Field(int width, int height, bool valid = false)
      : values_(width, height, zero_value<Value>()),
        valid_(width, height, valid ? 1 : 0) {}

  int width() const noexcept { return values_.width(); }
  int height() const noexcept { return values_.height(); }
  std::size_t size() const noexcept { return values_.size(); }

  Value& operator()(int x, int y) { return values_(x, y); }
  const Value& operator()(int x, int y) const { return values_(x, y); }

  bool valid(int x, int y) const { return valid_(x, y) != 0; }
  void set_valid(int x, int y, bool v) { valid_(x, y) = v ? 1 : 0; }

  void set(int x, int y, const Value& v) {
    values_(x, y) = v;
    valid_(x, y) = 1;
  }
  void invalidate(int x, int y) { valid_(x, y) = 0; }

  Grid<Value>& values() noexcept { return values_; }
  const Grid<Value>& values() const noexcept { return values_; }
  Mask& mask() noexcept { return valid_; }
  const Mask& mask() const noexcept { return valid_; }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto b : valid_.data()) n += b != 0;
    return n;
  }

  template <typename G>
  bool same_shape(const G& other) const noexcept {
    return width() == other.width() && height() == other.height();
  }

 private:
  Grid<Value> values_;
  Mask valid_;
};

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    fail(ErrorCode::GridMismatch, std::string(what) + ": grid sizes differ (" +
                                      std::to_string(a.width()) + "x" +
                                      std::to_string(a.height()) + " vs " +
                                      std::to_string(b.width()) + "x" +
                                      std::to_string(b.height()) + ")");
  }
}

}  // namespace parallax
