#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "nvphonon/errors.hpp"

namespace nvp {

struct StepControl {
  double rtol = 1e-9;
  double atol = 1e-11;
  double h_max = std::numeric_limits<double>::infinity();
  double h_min_rel = 1e-14;  // relative to the integration span
  long max_steps = 200'000'000;
};

struct StepStats {
  long accepted = 0;
  long rejected = 0;
};

/// Adaptive Dormand–Prince 5(4) stepper for dy/dt = f(t, y) with Eigen dense
/// states (vectors or matrices). The last accepted step size is kept between
/// calls so that a sequence of short spans does not restart from scratch.
template <class State>
class Dopri5 {
 public:
  explicit Dopri5(StepControl control = {}) : control_(control) {}

  const StepStats& stats() const { return stats_; }
  double step_hint() const { return h_; }
  void set_step_hint(double h) { h_ = h; }

  template <class Rhs>
  void integrate(State& y, double t0, double t1, Rhs&& f) {
    if (t1 <= t0) return;
    const double span = t1 - t0;
    const double h_min = control_.h_min_rel * std::max(span, std::abs(t1));
    double h = h_ > 0 ? std::min(h_, span) : initial_step(y, t0, span, f);
    double t = t0;
    State k1 = f(t, y);
    while (t < t1) {
      if (stats_.accepted + stats_.rejected > control_.max_steps)
        throw Error(ErrorCode::StepSizeUnderflow, "step budget exhausted");
      bool last = false;
      if (t + h >= t1 || t1 - (t + h) < h_min) {
        h = t1 - t;
        last = true;
      }
      h = std::min(h, control_.h_max);

      const State k2 = f(t + c2 * h, y + h * (a21 * k1));
      const State k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
      const State k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const State k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const State k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      State y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      State k7 = f(t + h, y_new);
      const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const auto scale = control_.atol + control_.rtol * y.array().abs().max(y_new.array().abs());
      const double en = (err.array().abs() / scale).maxCoeff();
      if (!std::isfinite(en)) throw Error(ErrorCode::StepSizeUnderflow, "non-finite state");

      if (en <= 1.0) {
        t = last ? t1 : t + h;
        y = std::move(y_new);
        k1 = std::move(k7);
        ++stats_.accepted;
        const double grow = en == 0 ? 5.0 : std::min(5.0, 0.9 * std::pow(en, -0.2));
        if (!last) h *= grow;
        else h_ = std::max(h_, h * grow);
        if (!last) h_ = h;
      } else {
        ++stats_.rejected;
        h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
        if (h < h_min) throw Error(ErrorCode::StepSizeUnderflow, "step size below minimum");
      }
    }
  }

 private:
  template <class Rhs>
  double initial_step(const State& y, double t0, double span, Rhs& f) {
    const State f0 = f(t0, y);
    const double d0 = y.norm() + control_.atol;
    const double d1 = f0.norm() + 1e-300;
    return std::min(span, 0.01 * d0 / d1);
  }

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  StepControl control_;
  StepStats stats_;
  double h_ = 0;
};

}  // namespace nvp
