#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fleet {

using VertexId = std::int64_t;
using RequestId = std::int64_t;
using VehicleId = std::int64_t;

/// Seconds on the scheduling clock.
using Seconds = double;

/// Money is always integer cents.
using Cents = std::int64_t;

/// Slack applied to every time comparison (seconds).
inline constexpr Seconds kTimeTolerance = 1e-6;

/// Road distance in fixed-point micro-miles, so path sums, ties and
/// triangle inequalities are exact.
class Distance {
 public:
  constexpr Distance() = default;
  static constexpr Distance from_micro(std::int64_t micro) { return Distance(micro); }
  static Distance from_miles(double miles) {
    return Distance(static_cast<std::int64_t>(std::llround(miles * 1e6)));
  }

  constexpr std::int64_t micro() const { return micro_; }
  double miles() const { return static_cast<double>(micro_) / 1e6; }

  constexpr Distance operator+(Distance o) const { return Distance(micro_ + o.micro_); }
  constexpr Distance operator-(Distance o) const { return Distance(micro_ - o.micro_); }
  constexpr Distance& operator+=(Distance o) {
    micro_ += o.micro_;
    return *this;
  }
  constexpr auto operator<=>(const Distance&) const = default;

 private:
  constexpr explicit Distance(std::int64_t micro) : micro_(micro) {}
  std::int64_t micro_ = 0;
};

/// Fuel cost of a driven distance, rounded to the nearest cent.
inline Cents cost_in_cents(Distance d, double cents_per_mile) {
  return static_cast<Cents>(std::llround(d.miles() * cents_per_mile));
}

/// Malformed or inconsistent caller input.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A key route uses a pair with no connecting path.
class InfeasibleRouteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A domain constraint is already violated by the given state.
class ConstraintViolated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exhaustive oracle was asked to run above its size cap.
class OracleCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fleet
