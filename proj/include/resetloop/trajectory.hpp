#pragma once

// Reference trajectories: steps, fourth-order point-to-point scans and sinusoids.
//
// The scan has piecewise-constant snap over eight equal phases with signs
// + - - + - + + -, which returns velocity, acceleration and jerk to zero at the
// end of the move.

#include <array>
#include <string_view>
#include <utility>
#include <vector>

namespace resetloop {

enum class TrajectoryKind { step, fourth_order_scan, sinusoid };

struct MotionState {
  double position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
  double jerk = 0.0;
  double snap = 0.0;
};

class Trajectory {
 public:
  static Trajectory step(double height);
  static Trajectory scan(double distance, double duration);
  static Trajectory sinusoid(double amplitude, double omega);

  TrajectoryKind kind() const { return kind_; }
  /// Move time of a scan; 0 for a step; one period for a sinusoid.
  double duration() const { return duration_; }
  double distance() const { return distance_; }
  double peak_snap() const { return snap_; }

  double operator()(double t) const { return state(t).position; }
  MotionState state(double t) const;

  /// (t, r) at t = k dt for t <= t_end.
  std::vector<std::pair<double, double>> samples(double dt, double t_end) const;

 private:
  TrajectoryKind kind_ = TrajectoryKind::step;
  double distance_ = 0.0;  // step height, scan distance or sinusoid amplitude
  double duration_ = 0.0;
  double omega_ = 0.0;
  double snap_ = 0.0;
  // Motion state at the start of each scan phase.
  std::array<MotionState, 9> knots_{};
};

Trajectory generate_trajectory(TrajectoryKind kind, double distance, double duration);

struct Reference {
  Trajectory trajectory;
  double sim_duration = 0.0;  // s
  double window_start = 0.0;  // metric window, s
  double window_end = 0.0;
  bool is_step = false;
};

/// "step3um" (3 um step, 0.5 s), "ref1" / "ref2" / "ref3" (100 um scans in 397,
/// 235 and 93 ms, each followed by 100 ms of settling).
Reference named_reference(std::string_view name);

}  // namespace resetloop
