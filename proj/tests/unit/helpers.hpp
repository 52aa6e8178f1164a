#pragma once

#include <span>
#include <type_traits>
#include <vector>

#include <gtest/gtest.h>

#include "parallax/error.hpp"

/// Runs f and returns the code of the parallax::Error it throws.
template <typename F>
parallax::ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const parallax::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a parallax::Error";
  return parallax::ErrorCode::InvalidArgument;
}

/// Copies a span so gtest can compare it element by element.
template <typename T>
std::vector<std::remove_const_t<T>> as_vector(std::span<T> s) {
  return {s.begin(), s.end()};
}
