#pragma once

#include <utility>
#include <variant>

#include "agrimon/core.hpp"

namespace agrimon {

/// Value-or-ValidationError. A stand-in for std::expected until the toolchain has it.
template <class T>
class Result {
 public:
  Result(T value) : state_(std::move(value)) {}
  Result(ValidationError error) : state_(std::move(error)) {}

  bool ok() const { return state_.index() == 0; }
  explicit operator bool() const { return ok(); }

  const T& value() const& { return std::get<0>(state_); }
  T&& value() && { return std::get<0>(std::move(state_)); }
  const ValidationError& error() const { return std::get<1>(state_); }

 private:
  std::variant<T, ValidationError> state_;
};

/// Result<void> analogue.
class Status {
 public:
  Status() = default;
  Status(ValidationError error) : error_(std::move(error)), ok_(false) {}

  bool ok() const { return ok_; }
  explicit operator bool() const { return ok_; }
  const ValidationError& error() const { return error_; }

 private:
  ValidationError error_{ValidationReason::Malformed, {}};
  bool ok_ = true;
};

}  // namespace agrimon
