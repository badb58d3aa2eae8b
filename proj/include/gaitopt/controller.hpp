#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "gaitopt/errors.hpp"

namespace gaitopt {

using Vec2 = Eigen::Vector2d;

struct RobotState;  // sim.hpp

enum class Variant { FiveD, NineD };

// Values held fixed by the five-parameter variant. Tuned once on the nominal
// model and shipped with the repo (data/fixture_5d.cfg mirrors these).
struct FiveDFixture {
  double pitch_des = 0.13;
  double kp_height = 5400.0;
  double kd_height = 345.0;
  double height_des = 0.79;
};

const FiveDFixture& default_five_d_fixture();

/// Gains of the reactive stepping policy: PD ground-reaction-force laws in
/// stance plus a Raibert-style foot placement law for swing.
struct ControllerParams {
  double kp_pitch = 0;     // horizontal GRF per rad of pitch error
  double kd_pitch = 0;     // horizontal GRF per rad/s of pitch rate
  double pitch_des = 0;    // rad
  double kp_height = 0;    // vertical GRF per m of height error
  double kd_height = 0;    // vertical GRF per m/s of vertical speed
  double height_des = 0;   // m
  double speed_gain = 0;   // s, foot offset per m/s of speed error
  double offset_gain = 0;  // dimensionless, foot offset per m of CoM-foot distance
  double swing_time = 0;   // s
  Variant variant = Variant::NineD;

  // Vector view over the searched subset, in canonical order.
  Eigen::VectorXd active_values() const;
  static ControllerParams from_active(const Eigen::VectorXd& v, Variant variant,
                                      const FiveDFixture& fixture = default_five_d_fixture());
};

int active_dim(Variant variant);
std::vector<std::string> active_names(Variant variant);

struct SpeedSegment {
  double speed = 0;  // m/s
  int steps = 0;
};

struct SpeedProfile {
  std::vector<SpeedSegment> segments;

  int total_steps() const;
  double speed_for_step(int step_index) const;  // 0-based; clamps past the end
  double first_speed() const;
};

// One polynomial axis. Evaluation clamps t into [0, duration]; the spline
// never extrapolates.
struct Quintic {
  Eigen::Matrix<double, 6, 1> coef = Eigen::Matrix<double, 6, 1>::Zero();
  double duration = 0;

  double value(double t) const;
  double deriv(double t) const;

  // Unique degree-5 polynomial with given boundary positions/velocities and
  // zero acceleration at both ends.
  static Quintic boundary(double p0, double v0, double p1, double v1, double T);
};

struct QuinticSpline {
  Quintic x, z;
  double duration = 0;

  Vec2 value(double t) const;
  Vec2 deriv(double t) const;
};

struct SwingCommand {
  Vec2 pos = Vec2::Zero();
  Vec2 vel = Vec2::Zero();
};

// Stance-phase GRF command. weight_ff is the controller's internal weight
// feedforward; it is a property of the controller, not of the simulated
// machine, so model perturbations do not leak into it.
Vec2 stance_grf(const RobotState& state, const ControllerParams& params, double weight_ff);

// Desired landing position relative to the CoM at touchdown.
double foot_placement(const RobotState& state, const ControllerParams& params,
                      double target_speed);

QuinticSpline make_swing_spline(const Vec2& start_pos, const Vec2& start_vel,
                                const Vec2& end_pos, const Vec2& end_vel, double duration);

// Re-plans the swing trajectory from the current swing-foot state and returns
// the commanded foot pos/vel one control tick ahead. Vertical motion rises to
// a clearance apex at half swing, then descends to the ground; after the
// swing time expires the final pose is held until touchdown.
SwingCommand swing_step_target(const RobotState& state, double landing_x, double clearance,
                               double swing_time, double dt);

struct ParamBounds {
  std::vector<std::string> names;
  Eigen::VectorXd lo, hi;
  Variant variant = Variant::NineD;

  int dim() const { return static_cast<int>(names.size()); }
  void validate() const;
};

ParamBounds default_bounds(Variant variant);

// Maps raw parameters into the unit box of the search region.
Eigen::VectorXd normalize_params(const ParamBounds& bounds, const Eigen::VectorXd& raw);

}  // namespace gaitopt
