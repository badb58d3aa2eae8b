#include "gaitopt/controller.hpp"

#include <algorithm>
#include <cmath>

#include "gaitopt/sim.hpp"

namespace gaitopt {

const FiveDFixture& default_five_d_fixture() {
  static const FiveDFixture fixture{};
  return fixture;
}

int active_dim(Variant variant) { return variant == Variant::FiveD ? 5 : 9; }

std::vector<std::string> active_names(Variant variant) {
  if (variant == Variant::FiveD)
    return {"kp_pitch", "kd_pitch", "speed_gain", "offset_gain", "swing_time"};
  return {"kp_pitch", "kd_pitch", "pitch_des",  "kp_height",   "kd_height",
          "height_des", "speed_gain", "offset_gain", "swing_time"};
}

Eigen::VectorXd ControllerParams::active_values() const {
  if (variant == Variant::FiveD) {
    Eigen::VectorXd v(5);
    v << kp_pitch, kd_pitch, speed_gain, offset_gain, swing_time;
    return v;
  }
  Eigen::VectorXd v(9);
  v << kp_pitch, kd_pitch, pitch_des, kp_height, kd_height, height_des, speed_gain,
      offset_gain, swing_time;
  return v;
}

ControllerParams ControllerParams::from_active(const Eigen::VectorXd& v, Variant variant,
                                               const FiveDFixture& fixture) {
  if (v.size() != active_dim(variant))
    throw InvalidArgument("ControllerParams::from_active: wrong dimension");
  ControllerParams p;
  p.variant = variant;
  if (variant == Variant::FiveD) {
    p.kp_pitch = v[0];
    p.kd_pitch = v[1];
    p.speed_gain = v[2];
    p.offset_gain = v[3];
    p.swing_time = v[4];
    p.pitch_des = fixture.pitch_des;
    p.kp_height = fixture.kp_height;
    p.kd_height = fixture.kd_height;
    p.height_des = fixture.height_des;
  } else {
    p.kp_pitch = v[0];
    p.kd_pitch = v[1];
    p.pitch_des = v[2];
    p.kp_height = v[3];
    p.kd_height = v[4];
    p.height_des = v[5];
    p.speed_gain = v[6];
    p.offset_gain = v[7];
    p.swing_time = v[8];
  }
  return p;
}

int SpeedProfile::total_steps() const {
  int n = 0;
  for (const auto& s : segments) n += s.steps;
  return n;
}

double SpeedProfile::speed_for_step(int step_index) const {
  int base = 0;
  for (const auto& s : segments) {
    if (step_index < base + s.steps) return s.speed;
    base += s.steps;
  }
  return segments.empty() ? 0.0 : segments.back().speed;
}

double SpeedProfile::first_speed() const {
  return segments.empty() ? 0.0 : segments.front().speed;
}

double Quintic::value(double t) const {
  t = std::clamp(t, 0.0, duration);
  double acc = coef[5];
  for (int i = 4; i >= 0; --i) acc = acc * t + coef[i];
  return acc;
}

double Quintic::deriv(double t) const {
  t = std::clamp(t, 0.0, duration);
  double acc = 5.0 * coef[5];
  for (int i = 4; i >= 1; --i) acc = acc * t + i * coef[i];
  return acc;
}

Quintic Quintic::boundary(double p0, double v0, double p1, double v1, double T) {
  if (!(T > 0)) throw InvalidArgument("Quintic::boundary: duration must be positive");
  const double dp = p1 - p0;
  const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
  Quintic q;
  q.duration = T;
  q.coef[0] = p0;
  q.coef[1] = v0;
  q.coef[2] = 0.0;
  q.coef[3] = (20.0 * dp - (8.0 * v1 + 12.0 * v0) * T) / (2.0 * T3);
  q.coef[4] = (-30.0 * dp + (14.0 * v1 + 16.0 * v0) * T) / (2.0 * T4);
  q.coef[5] = (12.0 * dp - 6.0 * (v1 + v0) * T) / (2.0 * T5);
  return q;
}

Vec2 QuinticSpline::value(double t) const { return {x.value(t), z.value(t)}; }

Vec2 QuinticSpline::deriv(double t) const { return {x.deriv(t), z.deriv(t)}; }

QuinticSpline make_swing_spline(const Vec2& start_pos, const Vec2& start_vel,
                                const Vec2& end_pos, const Vec2& end_vel, double duration) {
  if (!(duration > 0)) throw InvalidArgument("make_swing_spline: duration must be positive");
  QuinticSpline s;
  s.duration = duration;
  s.x = Quintic::boundary(start_pos.x(), start_vel.x(), end_pos.x(), end_vel.x(), duration);
  s.z = Quintic::boundary(start_pos.y(), start_vel.y(), end_pos.y(), end_vel.y(), duration);
  return s;
}

Vec2 stance_grf(const RobotState& state, const ControllerParams& params, double weight_ff) {
  const double fx = params.kp_pitch * (params.pitch_des - state.trunk_pitch) +
                    params.kd_pitch * (0.0 - state.trunk_pitch_rate);
  const double fz = params.kp_height * (params.height_des - state.com_position.y()) +
                    params.kd_height * (0.0 - state.com_velocity.y()) + weight_ff;
  return {fx, fz};
}

double foot_placement(const RobotState& state, const ControllerParams& params,
                      double target_speed) {
  const double v = state.com_velocity.x();
  const double d = state.com_position.x() - state.stance_foot.x();
  return params.speed_gain * (v - target_speed) + params.offset_gain * d +
         0.5 * v * params.swing_time;
}

SwingCommand swing_step_target(const RobotState& state, double landing_x, double clearance,
                               double swing_time, double dt) {
  const double t = state.swing_elapsed;
  const double remaining = swing_time - t;
  SwingCommand cmd;
  if (remaining <= dt) {
    // hold the final pose until touchdown
    cmd.pos = {landing_x, 0.0};
    cmd.vel = Vec2::Zero();
    return cmd;
  }
  const Vec2 p = state.swing_foot;
  const Vec2 v = state.swing_foot_velocity;
  Quintic qx = Quintic::boundary(p.x(), v.x(), landing_x, 0.0, remaining);
  cmd.pos.x() = qx.value(dt);
  cmd.vel.x() = qx.deriv(dt);
  const double half = 0.5 * swing_time;
  if (t < half && (half - t) > dt) {
    Quintic qz = Quintic::boundary(p.y(), v.y(), clearance, 0.0, half - t);
    cmd.pos.y() = qz.value(dt);
    cmd.vel.y() = qz.deriv(dt);
  } else {
    Quintic qz = Quintic::boundary(p.y(), v.y(), 0.0, 0.0, remaining);
    cmd.pos.y() = qz.value(dt);
    cmd.vel.y() = qz.deriv(dt);
  }
  return cmd;
}

void ParamBounds::validate() const {
  if (names.empty() || lo.size() != dim() || hi.size() != dim())
    throw InvalidArgument("ParamBounds: inconsistent sizes");
  for (int i = 0; i < dim(); ++i)
    if (!(lo[i] < hi[i])) throw InvalidArgument("ParamBounds: lo must be < hi");
}

ParamBounds default_bounds(Variant variant) {
  ParamBounds b;
  b.variant = variant;
  b.names = active_names(variant);
  // Box sized during bring-up so that uniform sampling walks at roughly the
  // rates reported for the reference machine (about 1/4 on the easy profile,
  // below 1/10 on the fast multi-segment one), then frozen.
  if (variant == Variant::FiveD) {
    b.lo.resize(5);
    b.hi.resize(5);
    b.lo << 25, 3, 0.05, 0.0, 0.18;
    b.hi << 600, 60, 0.65, 0.45, 0.55;
  } else {
    b.lo.resize(9);
    b.hi.resize(9);
    b.lo << 25, 3, -0.1, 1000, 30, 0.70, 0.05, 0.0, 0.18;
    b.hi << 600, 60, 0.25, 8000, 600, 0.92, 0.65, 0.45, 0.55;
  }
  return b;
}

Eigen::VectorXd normalize_params(const ParamBounds& bounds, const Eigen::VectorXd& raw) {
  if (raw.size() != bounds.dim())
    throw InvalidArgument("normalize_params: dimension mismatch");
  return (raw - bounds.lo).cwiseQuotient(bounds.hi - bounds.lo);
}

}  // namespace gaitopt
