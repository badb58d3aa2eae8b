#include "gaitopt/sim.hpp"

#include <algorithm>
#include <cmath>

#include "gaitopt/random.hpp"

namespace gaitopt {

void ModelParams::validate() const {
  const bool positive = trunk_mass > 0 && trunk_inertia > 0 && com_to_pelvis_offset > 0 &&
                        leg_max_length > 0 && gravity > 0 && friction_coeff > 0 &&
                        control_dt > 0;
  if (!positive) throw InvalidArgument("ModelParams: all fields must be strictly positive");
  if (control_dt < 1e-4 || control_dt > 1e-2)
    throw InvalidArgument("ModelParams: control_dt outside [1e-4, 1e-2]");
}

Vec2 pelvis_position(const RobotState& state, const ModelParams& model) {
  // pelvis sits com_to_pelvis_offset below the CoM along the trunk axis
  const double c = std::cos(state.trunk_pitch);
  const double s = std::sin(state.trunk_pitch);
  return {state.com_position.x() + model.com_to_pelvis_offset * s,
          state.com_position.y() - model.com_to_pelvis_offset * c};
}

double stance_leg_length(const RobotState& state, const ModelParams& model) {
  return (state.stance_foot - pelvis_position(state, model)).norm();
}

double swing_leg_length(const RobotState& state, const ModelParams& model) {
  return (state.swing_foot - pelvis_position(state, model)).norm();
}

Vec2 clamp_grf(const Vec2& grf, double friction_coeff) {
  const double fz = std::max(0.0, grf.y());
  const double limit = friction_coeff * fz;
  return {std::clamp(grf.x(), -limit, limit), fz};
}

RobotState integrate_step(const RobotState& state, const Vec2& grf, const SwingCommand& swing,
                          const ModelParams& model) {
  if (state.phase != Phase::Stance)
    throw InvalidArgument("integrate_step: phase must be Stance");
  const Vec2 f = clamp_grf(grf, model.friction_coeff);
  const double dt = model.control_dt;
  const Vec2 r = state.stance_foot - state.com_position;
  const double ax = f.x() / model.trunk_mass;
  const double az = f.y() / model.trunk_mass - model.gravity;
  const double alpha = (r.x() * f.y() - r.y() * f.x()) / model.trunk_inertia;

  RobotState out = state;
  out.time = state.time + dt;
  // force held over the tick, so the constant-acceleration step is exact
  out.com_position.x() += state.com_velocity.x() * dt + 0.5 * ax * dt * dt;
  out.com_position.y() += state.com_velocity.y() * dt + 0.5 * az * dt * dt;
  out.com_velocity.x() += ax * dt;
  out.com_velocity.y() += az * dt;
  out.trunk_pitch += state.trunk_pitch_rate * dt + 0.5 * alpha * dt * dt;
  out.trunk_pitch_rate += alpha * dt;
  out.swing_foot = swing.pos;
  out.swing_foot_velocity = swing.vel;
  out.swing_elapsed += dt;

  const bool finite = out.com_position.allFinite() && out.com_velocity.allFinite() &&
                      std::isfinite(out.trunk_pitch) && std::isfinite(out.trunk_pitch_rate) &&
                      out.swing_foot.allFinite() && out.swing_foot_velocity.allFinite();
  if (!finite) throw NumericalFailure("integrate_step: non-finite state");
  return out;
}

RobotState make_initial_state(const ControllerParams& params, const ModelParams& model,
                              double forward_speed) {
  (void)model;
  RobotState s;
  s.com_position = {0.0, params.height_des};
  s.com_velocity = {forward_speed, 0.0};
  s.stance_foot = {0.0, 0.0};
  s.swing_foot = {0.0, 0.0};
  s.swing_foot_velocity = Vec2::Zero();
  s.phase = Phase::Stance;
  return s;
}

namespace {

bool violates_fall_condition(const RobotState& s, const ControllerParams& params) {
  return s.com_position.y() < kFallHeightFraction * params.height_des ||
         std::abs(s.trunk_pitch) > kFallPitchLimit;
}

}  // namespace

EpisodeResult run_episode(const ControllerParams& params, const SpeedProfile& profile,
                          const ModelParams& model, double t_max,
                          const RobotState& initial_state, EpisodeObserver* observer) {
  if (!(t_max > 0)) throw InvalidArgument("run_episode: t_max must be positive");
  model.validate();

  EpisodeResult ep;
  ep.t_max = t_max;

  RobotState s = initial_state;
  const double x0 = s.com_position.x();
  const double dt = model.control_dt;
  const long n_max = std::lround(t_max / dt);
  const double weight_ff = nominal_weight();
  const int profile_steps = profile.total_steps();

  if (violates_fall_condition(s, params)) {
    ep.fell = true;
    ep.t_sim = 0;
    ep.x_fall = 0;
    return ep;
  }

  int step_index = 0;
  long tick = 0;
  long step_start_tick = 0;
  double step_start_x = s.com_position.x();
  double step_start_z = s.com_position.y();
  double step_start_pitch = s.trunk_pitch;
  double liftoff_leg_length = swing_leg_length(s, model);
  double retraction_max = 0;
  double torque_acc = 0;
  double last_finite_x = s.com_position.x();

  bool fell = false;

  try {
    while (tick < n_max) {
      if (step_index >= profile_steps) {
        s.phase = Phase::Halted;  // profile complete, controller shuts off
        break;
      }
      const double v_tgt = profile.speed_for_step(step_index);

      const Vec2 applied = clamp_grf(stance_grf(s, params, weight_ff), model.friction_coeff);
      Vec2 force = applied;
      // an overextended stance leg cannot transmit force
      if (stance_leg_length(s, model) > model.leg_max_length) force.setZero();

      const double remaining = std::max(params.swing_time - s.swing_elapsed, 0.0);
      const double landing_x = s.com_position.x() + s.com_velocity.x() * remaining +
                               foot_placement(s, params, v_tgt);
      SwingCommand swing =
          swing_step_target(s, landing_x, kSwingClearance, params.swing_time, dt);
      // swing actuation is velocity-limited; the command saturates toward its
      // target instead of teleporting
      const Vec2 delta = swing.pos - s.swing_foot;
      const double foot_speed = delta.norm() / dt;
      if (foot_speed > kSwingSpeedLimit) {
        const double scale = kSwingSpeedLimit / foot_speed;
        swing.pos = s.swing_foot + delta * scale;
        swing.vel = delta * (kSwingSpeedLimit / delta.norm());
      }

      const Vec2 r = s.stance_foot - s.com_position;
      torque_acc += std::abs(r.x() * force.y() - r.y() * force.x()) * dt;

      const Vec2 foot_before = s.swing_foot;
      s = integrate_step(s, force, swing, model);
      ++tick;
      last_finite_x = s.com_position.x();
      if (observer) observer->on_tick(s, force);

      retraction_max =
          std::max(retraction_max, liftoff_leg_length - swing_leg_length(s, model));

      if (s.swing_foot.y() <= 0.0 && s.swing_foot_velocity.y() <= 0.0) {
        // A foot still moving at contact stops impulsively; the reaction
        // impulse of its reflected inertia kicks the trunk. Clean landings
        // (ground-speed matched) transmit nothing. The landing velocity is
        // the displacement rate over the contact tick, which also covers a
        // saturated swing snapping onto its target.
        {
          const Vec2 landing_velocity = (s.swing_foot - foot_before) / dt;
          const Vec2 impulse = -kFootReflectedInertia * landing_velocity;
          const Vec2 rr = s.swing_foot - s.com_position;
          s.com_velocity += impulse / model.trunk_mass;
          s.trunk_pitch_rate +=
              (rr.x() * impulse.y() - rr.y() * impulse.x()) / model.trunk_inertia;
        }
        const double duration = static_cast<double>(tick - step_start_tick) * dt;
        StepRecord rec;
        rec.step_index = step_index;
        rec.duration = duration;
        rec.max_leg_retraction = std::max(0.0, retraction_max);
        rec.com_height_start = step_start_z;
        rec.com_height_end = s.com_position.y();
        rec.trunk_lean_start = step_start_pitch;
        rec.trunk_lean_end = s.trunk_pitch;
        rec.avg_speed = (s.com_position.x() - step_start_x) / duration;
        rec.distance_start = step_start_x;
        rec.torque_abs_sum = torque_acc;
        ep.steps.push_back(rec);
        ep.per_step_speeds.push_back(rec.avg_speed);

        // instant support exchange: the landed foot becomes stance, the old
        // stance foot lifts off
        const Vec2 new_stance{s.swing_foot.x(), 0.0};
        s.swing_foot = s.stance_foot;
        s.swing_foot_velocity = Vec2::Zero();
        s.stance_foot = new_stance;
        s.swing_elapsed = 0;

        ++step_index;
        step_start_tick = tick;
        step_start_x = s.com_position.x();
        step_start_z = s.com_position.y();
        step_start_pitch = s.trunk_pitch;
        liftoff_leg_length = swing_leg_length(s, model);
        retraction_max = 0;
        torque_acc = 0;
      }

      if (tick < n_max && violates_fall_condition(s, params)) {
        fell = true;
        s.phase = Phase::Falling;
        break;
      }
    }
  } catch (const NumericalFailure&) {
    fell = true;
  }

  ep.fell = fell;
  ep.t_sim = (tick >= n_max) ? t_max : static_cast<double>(tick) * dt;
  ep.x_fall = std::max(0.0, last_finite_x - x0);
  return ep;
}

ModelParams perturb_model(const ModelParams& base, double magnitude, std::uint64_t seed) {
  if (magnitude < 0.0 || magnitude >= 1.0)
    throw InvalidArgument("perturb_model: magnitude must be in [0, 1)");
  Rng rng(seed);
  ModelParams out = base;
  out.trunk_mass = base.trunk_mass * rng.uniform(1.0 - magnitude, 1.0 + magnitude);
  out.trunk_inertia = base.trunk_inertia * rng.uniform(1.0 - magnitude, 1.0 + magnitude);
  return out;
}

EpisodeResult truncate_episode(const EpisodeResult& episode, double t_cut) {
  if (!(t_cut > 0)) throw InvalidArgument("truncate_episode: t_cut must be positive");
  if (t_cut >= episode.t_max) return episode;
  EpisodeResult out;
  out.t_max = t_cut;
  out.t_sim = std::min(episode.t_sim, t_cut);
  out.fell = episode.fell && episode.t_sim <= t_cut;
  out.x_fall = episode.x_fall;
  double elapsed = 0;
  for (const auto& step : episode.steps) {
    if (elapsed + step.duration > t_cut) break;
    elapsed += step.duration;
    out.steps.push_back(step);
    out.per_step_speeds.push_back(step.avg_speed);
  }
  return out;
}

}  // namespace gaitopt
