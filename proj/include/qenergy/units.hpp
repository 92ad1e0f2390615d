#pragma once

#include <compare>

namespace qenergy {

/// A double tagged with its physical unit. Only same-unit arithmetic is
/// allowed; cross-unit products are spelled out below.
template <class Tag>
class Quantity {
public:
    constexpr Quantity() noexcept = default;
    constexpr explicit Quantity(double value) noexcept : value_(value) {}

    [[nodiscard]] constexpr double value() const noexcept { return value_; }

    constexpr Quantity& operator+=(Quantity other) noexcept {
        value_ += other.value_;
        return *this;
    }
    constexpr Quantity& operator-=(Quantity other) noexcept {
        value_ -= other.value_;
        return *this;
    }

    friend constexpr Quantity operator+(Quantity a, Quantity b) noexcept { return Quantity{a.value_ + b.value_}; }
    friend constexpr Quantity operator-(Quantity a, Quantity b) noexcept { return Quantity{a.value_ - b.value_}; }
    friend constexpr Quantity operator*(Quantity a, double k) noexcept { return Quantity{a.value_ * k}; }
    friend constexpr Quantity operator*(double k, Quantity a) noexcept { return Quantity{a.value_ * k}; }
    friend constexpr Quantity operator/(Quantity a, double k) noexcept { return Quantity{a.value_ / k}; }
    friend constexpr double operator/(Quantity a, Quantity b) noexcept { return a.value_ / b.value_; }

    friend constexpr bool operator==(const Quantity&, const Quantity&) = default;
    friend constexpr auto operator<=>(const Quantity&, const Quantity&) = default;

private:
    double value_ = 0.0;
};

using Hertz = Quantity<struct HertzTag>;
using Volts = Quantity<struct VoltsTag>;
using Watts = Quantity<struct WattsTag>;
using Joules = Quantity<struct JoulesTag>;
using Seconds = Quantity<struct SecondsTag>;

constexpr Hertz megahertz(double mhz) noexcept { return Hertz{mhz * 1e6}; }

constexpr Joules operator*(Watts p, Seconds t) noexcept { return Joules{p.value() * t.value()}; }
constexpr Joules operator*(Seconds t, Watts p) noexcept { return p * t; }
constexpr Watts operator/(Joules e, Seconds t) noexcept { return Watts{e.value() / t.value()}; }

/// Wall time needed to retire `cycles` at clock `f`.
constexpr Seconds time_for_cycles(double cycles, Hertz f) noexcept { return Seconds{cycles / f.value()}; }

} // namespace qenergy
