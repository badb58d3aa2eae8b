#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "gaitopt/controller.hpp"
#include "gaitopt/errors.hpp"

namespace gaitopt {

struct ModelParams {
  double trunk_mass = 64.0;            // kg
  double trunk_inertia = 2.2;          // kg*m^2
  double com_to_pelvis_offset = 0.19;  // m
  double leg_max_length = 0.9;         // m
  double gravity = 9.81;               // m/s^2
  double friction_coeff = 1.0;
  double control_dt = 1e-3;            // s

  void validate() const;  // throws InvalidArgument
};

// Weight feedforward of the nominal machine, used by the controller
// regardless of what the simulated instance actually weighs.
inline double nominal_weight() { return ModelParams{}.trunk_mass * ModelParams{}.gravity; }

enum class Phase { Stance, Falling, Halted };

// Planar trunk + two massless point feet. x forward, z up; trunk_pitch is
// counterclockwise positive in the x-z plane.
struct RobotState {
  double time = 0;
  Vec2 com_position = Vec2::Zero();
  Vec2 com_velocity = Vec2::Zero();
  double trunk_pitch = 0;
  double trunk_pitch_rate = 0;
  Vec2 stance_foot = Vec2::Zero();
  Vec2 swing_foot = Vec2::Zero();
  Vec2 swing_foot_velocity = Vec2::Zero();
  Phase phase = Phase::Stance;
  double swing_elapsed = 0;
};

struct StepRecord {
  int step_index = 0;
  double duration = 0;            // s
  double max_leg_retraction = 0;  // m, shortening of the swing leg vs liftoff
  double com_height_start = 0;
  double com_height_end = 0;
  double trunk_lean_start = 0;
  double trunk_lean_end = 0;
  double avg_speed = 0;       // m/s
  double distance_start = 0;  // CoM x at step start
  double torque_abs_sum = 0;  // N*m*s, integral of |GRF moment about the CoM|
};

struct EpisodeResult {
  std::vector<StepRecord> steps;
  double t_sim = 0;
  double t_max = 0;
  bool fell = false;
  double x_fall = 0;  // forward distance covered, clamped at 0
  std::vector<double> per_step_speeds;
};

inline constexpr double kFallHeightFraction = 0.5;  // fall when z < 0.5 * height_des
inline constexpr double kFallPitchLimit = 0.5;      // rad
inline constexpr double kSwingClearance = 0.05;     // m, swing arc apex
inline constexpr double kSwingSpeedLimit = 3.65;     // m/s, swing actuation limit
inline constexpr double kFootReflectedInertia = 2.0; // kg, leg inertia felt at touchdown

Vec2 pelvis_position(const RobotState& state, const ModelParams& model);
double stance_leg_length(const RobotState& state, const ModelParams& model);
double swing_leg_length(const RobotState& state, const ModelParams& model);

// Unilateral contact plus friction cone: Fz >= 0, |Fx| <= mu * Fz.
Vec2 clamp_grf(const Vec2& grf, double friction_coeff);

// Advances the trunk one control tick under a zero-order-hold GRF, which is
// integrated exactly (velocity-Verlet form); the swing foot is kinematic and
// follows its command. Throws NumericalFailure on non-finite results.
RobotState integrate_step(const RobotState& state, const Vec2& grf, const SwingCommand& swing,
                          const ModelParams& model);

// Standing start at the desired height, both feet under the CoM, moving at
// forward_speed.
RobotState make_initial_state(const ControllerParams& params, const ModelParams& model,
                              double forward_speed);

struct EpisodeObserver {
  virtual ~EpisodeObserver() = default;
  virtual void on_tick(const RobotState& state, const Vec2& applied_grf) = 0;
};

// Runs the control loop until fall, profile completion, or t_max. Pure
// function of its inputs; numerical failures are recorded as falls.
EpisodeResult run_episode(const ControllerParams& params, const SpeedProfile& profile,
                          const ModelParams& model, double t_max,
                          const RobotState& initial_state, EpisodeObserver* observer = nullptr);

// Multiplies trunk mass and inertia by independent uniform factors in
// [1 - magnitude, 1 + magnitude].
ModelParams perturb_model(const ModelParams& base, double magnitude, std::uint64_t seed);

// Keeps only the steps fully completed before t_cut and rescales t_sim/t_max.
EpisodeResult truncate_episode(const EpisodeResult& episode, double t_cut);

}  // namespace gaitopt
