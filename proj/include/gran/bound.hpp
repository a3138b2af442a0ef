#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace gran {

/// Integer duration or event count with an "unbounded" value ordered above
/// every integer. Addition saturates at the unbounded value.
class Bound {
public:
  constexpr Bound() = default;
  constexpr Bound(std::int64_t v) : value_(v) {} // NOLINT(google-explicit-constructor)

  static constexpr Bound infinity() {
    Bound b;
    b.value_ = kInf;
    return b;
  }

  constexpr bool is_finite() const { return value_ != kInf; }
  constexpr bool is_infinite() const { return value_ == kInf; }

  std::int64_t value() const {
    if (!is_finite())
      throw std::logic_error("value() on unbounded Bound");
    return value_;
  }

  constexpr auto operator<=>(const Bound&) const = default;

  friend constexpr Bound operator+(Bound a, Bound b) {
    if (a.is_infinite() || b.is_infinite())
      return infinity();
    return Bound(a.value_ + b.value_);
  }

  std::string str() const { return is_finite() ? std::to_string(value_) : std::string("inf"); }

  friend std::ostream& operator<<(std::ostream& os, const Bound& b) { return os << b.str(); }

private:
  static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
  std::int64_t value_ = 0;
};

inline constexpr Bound kUnbounded = Bound::infinity();

} // namespace gran
