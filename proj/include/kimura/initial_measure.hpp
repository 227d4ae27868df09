#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <type_traits>
#include <variant>
#include <vector>

#include "kimura/errors.hpp"
#include "kimura/interpolation.hpp"
#include "kimura/quadrature.hpp"

namespace kimura {

/// q0(x) = height on [0, 1].
struct UniformDensity {
  double height = 1.0;
};

/// Smooth compactly supported bump of total mass `mass`:
/// exp(-1 / (1 - r^2)), r = (x - center) / width, normalized.
struct BumpDensity {
  double center = 0.5;
  double width = 0.1;
  double mass = 1.0;
};

/// Density samples on an increasing grid spanning [0, 1]; linear in between.
struct SampledDensity {
  std::vector<double> x;
  std::vector<double> values;
};

using Density = std::variant<UniformDensity, BumpDensity, SampledDensity>;

struct Atom {
  double x;
  double mass;
};

namespace detail {

inline double raw_bump(double r) { return std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; }

/// int_{-1}^{1} exp(-1/(1-r^2)) dr.
inline double bump_unit_integral() {
  static const double value = quad::integrate([](double r) { return raw_bump(r); }, -1.0, 1.0, 1e-15).value;
  return value;
}

}  // namespace detail

inline double density_at(const Density& d, double x) {
  return std::visit(
      [x](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, UniformDensity>) {
          return v.height;
        } else if constexpr (std::is_same_v<T, BumpDensity>) {
          return v.mass * detail::raw_bump((x - v.center) / v.width) / (v.width * detail::bump_unit_integral());
        } else {
          if (x <= v.x.front()) return v.values.front();
          if (x >= v.x.back()) return v.values.back();
          const auto it = std::upper_bound(v.x.begin(), v.x.end(), x);
          const std::size_t i = static_cast<std::size_t>(it - v.x.begin()) - 1;
          const double s = (x - v.x[i]) / (v.x[i + 1] - v.x[i]);
          return (1.0 - s) * v.values[i] + s * v.values[i + 1];
        }
      },
      d);
}

inline double density_mass(const Density& d) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, UniformDensity>) {
          return v.height;
        } else if constexpr (std::is_same_v<T, BumpDensity>) {
          return v.mass;
        } else {
          return quad::trapezoid(v.x, v.values);
        }
      },
      d);
}

/// p0 = a0 delta_0 + q0 + sum_k m_k delta_{x_k} + b0 delta_1.
struct InitialMeasure {
  double a0 = 0.0;
  double b0 = 0.0;
  Density density = UniformDensity{0.0};
  std::vector<Atom> atoms;

  double interior_mass() const {
    double m = density_mass(density);
    for (const Atom& a : atoms) m += a.mass;
    return m;
  }
  double total_mass() const { return a0 + b0 + interior_mass(); }

  /// Checks the invariants; `allow_signed` admits signed densities for
  /// diagnostic data whose mass may not be positive.
  void validate(bool allow_signed = false) const {
    if (!(a0 >= 0.0) || !(b0 >= 0.0)) throw InputError("initial measure: boundary masses a0, b0 must be >= 0");
    for (const Atom& a : atoms) {
      if (!(a.x > 0.0 && a.x < 1.0)) {
        std::ostringstream msg;
        msg << "initial measure: atom location " << a.x << " is not strictly inside (0,1)";
        throw InputError(msg.str());
      }
      if (!(a.mass > 0.0)) throw InputError("initial measure: atom masses must be positive");
    }
    std::visit(
        [allow_signed](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, UniformDensity>) {
            if (!allow_signed && v.height < 0.0) throw InputError("initial measure: density must be >= 0");
          } else if constexpr (std::is_same_v<T, BumpDensity>) {
            if (!(v.width > 0.0)) throw InputError("initial measure: bump width must be > 0");
            if (!(v.center - v.width >= 0.0 && v.center + v.width <= 1.0))
              throw InputError("initial measure: bump support must lie in [0,1]");
            if (!allow_signed && v.mass < 0.0) throw InputError("initial measure: bump mass must be >= 0");
          } else {
            if (v.x.size() != v.values.size() || v.x.size() < 2)
              throw InputError("initial measure: density samples need matching x and values (>= 2)");
            if (v.x.front() != 0.0 || v.x.back() != 1.0)
              throw InputError("initial measure: density sample grid must span [0,1]");
            for (std::size_t i = 1; i < v.x.size(); ++i)
              if (!(v.x[i] > v.x[i - 1])) throw InputError("initial measure: density sample grid must increase");
            if (!allow_signed)
              for (double q : v.values)
                if (q < 0.0) throw InputError("initial measure: density must be >= 0");
          }
        },
        density);
    const double total = total_mass();
    if (!std::isfinite(total) || (!allow_signed && !(total > 0.0)))
      throw InputError("initial measure: total mass must be finite and positive");
  }
};

}  // namespace kimura
