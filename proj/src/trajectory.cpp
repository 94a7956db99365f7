#include "resetloop/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "resetloop/errors.hpp"

namespace resetloop {
namespace {

constexpr std::array<int, 8> kSnapSigns = {+1, -1, -1, +1, -1, +1, +1, -1};

MotionState advance(const MotionState& s, double snap, double tau) {
  const double t2 = tau * tau;
  const double t3 = t2 * tau;
  const double t4 = t3 * tau;
  return {s.position + s.velocity * tau + s.acceleration * t2 / 2.0 + s.jerk * t3 / 6.0 + snap * t4 / 24.0,
          s.velocity + s.acceleration * tau + s.jerk * t2 / 2.0 + snap * t3 / 6.0,
          s.acceleration + s.jerk * tau + snap * t2 / 2.0, s.jerk + snap * tau, snap};
}

}  // namespace

Trajectory Trajectory::step(double height) {
  if (!std::isfinite(height)) throw InputError("step: height must be finite");
  Trajectory t;
  t.kind_ = TrajectoryKind::step;
  t.distance_ = height;
  return t;
}

Trajectory Trajectory::scan(double distance, double duration) {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw InputError("scan: duration must be positive");
  if (!(distance >= 0.0) || !std::isfinite(distance)) throw InputError("scan: distance must be non-negative");
  Trajectory t;
  t.kind_ = TrajectoryKind::fourth_order_scan;
  t.distance_ = distance;
  t.duration_ = duration;
  const double h = duration / 8.0;

  // Displacement produced by unit snap, then rescale.
  MotionState unit{};
  for (int sign : kSnapSigns) unit = advance(unit, sign, h);
  t.snap_ = distance / unit.position;

  t.knots_[0] = MotionState{};
  for (std::size_t k = 0; k < kSnapSigns.size(); ++k)
    t.knots_[k + 1] = advance(t.knots_[k], kSnapSigns[k] * t.snap_, h);
  return t;
}

Trajectory Trajectory::sinusoid(double amplitude, double omega) {
  if (!(omega > 0.0) || !std::isfinite(amplitude)) throw InputError("sinusoid: need omega > 0 and finite amplitude");
  Trajectory t;
  t.kind_ = TrajectoryKind::sinusoid;
  t.distance_ = amplitude;
  t.omega_ = omega;
  t.duration_ = 2.0 * std::acos(-1.0) / omega;
  return t;
}

MotionState Trajectory::state(double t) const {
  switch (kind_) {
    case TrajectoryKind::step:
      return {t >= 0.0 ? distance_ : 0.0, 0.0, 0.0, 0.0, 0.0};
    case TrajectoryKind::sinusoid: {
      const double w = omega_;
      const double s = std::sin(w * t), c = std::cos(w * t);
      const double a = distance_;
      return {a * s, a * w * c, -a * w * w * s, -a * w * w * w * c, a * w * w * w * w * s};
    }
    case TrajectoryKind::fourth_order_scan: {
      if (t <= 0.0) return {};
      if (t >= duration_) return {distance_, 0.0, 0.0, 0.0, 0.0};
      const double h = duration_ / 8.0;
      const auto k = std::min<std::size_t>(7, static_cast<std::size_t>(t / h));
      return advance(knots_[k], kSnapSigns[k] * snap_, t - static_cast<double>(k) * h);
    }
  }
  return {};
}

std::vector<std::pair<double, double>> Trajectory::samples(double dt, double t_end) const {
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw InputError("trajectory samples: need dt > 0 and t_end >= 0");
  std::vector<std::pair<double, double>> out;
  const auto n = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
  out.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    out.emplace_back(t, (*this)(t));
  }
  return out;
}

Trajectory generate_trajectory(TrajectoryKind kind, double distance, double duration) {
  switch (kind) {
    case TrajectoryKind::step: return Trajectory::step(distance);
    case TrajectoryKind::fourth_order_scan: return Trajectory::scan(distance, duration);
    case TrajectoryKind::sinusoid:
      if (!(duration > 0.0)) throw InputError("sinusoid: period must be positive");
      return Trajectory::sinusoid(distance, 2.0 * std::acos(-1.0) / duration);
  }
  throw InputError("unknown trajectory kind");
}

Reference named_reference(std::string_view name) {
  constexpr double kScan = 100e-6;
  constexpr double kSettle = 0.1;
  auto scan = [&](double duration) {
    return Reference{Trajectory::scan(kScan, duration), duration + kSettle, 0.0, duration + kSettle, false};
  };
  if (name == "step3um") return {Trajectory::step(3e-6), 0.5, 0.0, 0.5, true};
  if (name == "ref1") return scan(0.397);
  if (name == "ref2") return scan(0.235);
  if (name == "ref3") return scan(0.093);
  throw InputError("unknown reference '" + std::string(name) + "' (expected step3um, ref1, ref2 or ref3)");
}

}  // namespace resetloop
