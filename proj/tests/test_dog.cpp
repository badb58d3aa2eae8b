#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gaitopt/dog.hpp"
#include "gaitopt/random.hpp"

using namespace gaitopt;

namespace {

StepRecord make_step(double retraction, double z0, double z1, double lean0, double lean1,
                     double speed, double duration = 0.35) {
  StepRecord r;
  r.duration = duration;
  r.max_leg_retraction = retraction;
  r.com_height_start = z0;
  r.com_height_end = z1;
  r.trunk_lean_start = lean0;
  r.trunk_lean_end = lean1;
  r.avg_speed = speed;
  return r;
}

}  // namespace

TEST_CASE("per-step metrics") {
  DogThresholds thr;  // 0.03 m, 0.05 m, 0.1 rad, 0.1 s

  SUBCASE("retraction threshold") {
    CHECK(step_metrics(make_step(0.08, 0.85, 0.85, 0, 0, 0.4), thr).m1 == 1);
    CHECK(step_metrics(make_step(0.01, 0.85, 0.85, 0, 0, 0.4), thr).m1 == 0);
  }
  SUBCASE("height consistency threshold") {
    CHECK(step_metrics(make_step(0.08, 0.85, 0.84, 0, 0, 0.4), thr).m2 == 1);
    CHECK(step_metrics(make_step(0.08, 0.85, 0.75, 0, 0, 0.4), thr).m2 == 0);
  }
  SUBCASE("lean consistency threshold") {
    CHECK(step_metrics(make_step(0.08, 0.85, 0.85, 0.02, 0.05, 0.4), thr).m3 == 1);
    CHECK(step_metrics(make_step(0.08, 0.85, 0.85, -0.1, 0.15, 0.4), thr).m3 == 0);
  }
  SUBCASE("speed passes through, not binarized") {
    CHECK(step_metrics(make_step(0.08, 0.85, 0.85, 0, 0, 0.47), thr).m4 == 0.47);
    CHECK(step_metrics(make_step(0.08, 0.85, 0.85, 0, 0, -0.2), thr).m4 == -0.2);
  }
  SUBCASE("zero duration rejected") {
    StepRecord r = make_step(0.08, 0.85, 0.85, 0, 0, 0.4, 0.0);
    CHECK_THROWS_AS(step_metrics(r, thr), InvalidArgument);
  }
}

TEST_CASE("episode score") {
  DogThresholds thr;

  SUBCASE("no steps means zero score") {
    EpisodeResult ep;
    ep.t_max = 10;
    ep.t_sim = 2;
    GaitScore s = episode_score(ep, thr);
    CHECK(s.phi == 0);
    CHECK(s.score_total == 0);
  }
  SUBCASE("ten perfect steps at full time") {
    EpisodeResult ep;
    ep.t_max = 3.5;
    ep.t_sim = 3.5;
    for (int i = 0; i < 10; ++i) ep.steps.push_back(make_step(0.08, 0.85, 0.85, 0, 0, 0.5));
    GaitScore s = episode_score(ep, thr);
    CHECK(s.phi == doctest::Approx(35.0));
    CHECK(s.time_fraction == doctest::Approx(1.0));
  }
  SUBCASE("early termination scales the score by time fraction") {
    EpisodeResult ep;
    ep.t_max = 10.0;
    ep.t_sim = 4.0;
    ep.fell = true;
    for (int i = 0; i < 10; ++i) ep.steps.push_back(make_step(0.08, 0.85, 0.85, 0, 0, 0.5));
    GaitScore s = episode_score(ep, thr);
    CHECK(s.phi == doctest::Approx(14.0));
  }
  SUBCASE("chattering episodes are still scored, flagged only") {
    EpisodeResult ep;
    ep.t_max = 2.0;
    ep.t_sim = 2.0;
    for (int i = 0; i < 25; ++i)
      ep.steps.push_back(make_step(0.005, 0.85, 0.85, 0, 0, 0.3, 0.08));
    GaitScore s = episode_score(ep, thr);
    CHECK(s.chattered);
    CHECK(s.phi == doctest::Approx(25 * (0.0 + 1 + 1 + 0.3)));
  }
}

TEST_CASE("adding a satisfied step never decreases the score") {
  DogThresholds thr;
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    EpisodeResult ep;
    ep.t_max = 10;
    ep.t_sim = rng.uniform(1, 10);
    const int n = 1 + rng.uniform_int(8);
    for (int i = 0; i < n; ++i)
      ep.steps.push_back(make_step(rng.uniform(0, 0.1), 0.85, rng.uniform(0.7, 0.9),
                                   rng.uniform(-0.2, 0.2), 0, rng.uniform(0, 1)));
    const double before = episode_score(ep, thr).phi;
    ep.steps.push_back(make_step(0.08, 0.85, 0.85, 0, 0, rng.uniform(0, 1)));
    const double after = episode_score(ep, thr).phi;
    CHECK(after >= before - 1e-12);
  }
}

TEST_CASE("score is bounded by steps times the best per-step score") {
  DogThresholds thr;
  Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    EpisodeResult ep;
    ep.t_max = 10;
    ep.t_sim = rng.uniform(0, 10);
    const int n = rng.uniform_int(12);
    double top_speed = 0;
    for (int i = 0; i < n; ++i) {
      const double speed = rng.uniform(0, 1.5);
      top_speed = std::max(top_speed, speed);
      ep.steps.push_back(make_step(rng.uniform(0, 0.1), 0.85, rng.uniform(0.7, 0.9),
                                   rng.uniform(-0.2, 0.2), 0, speed));
    }
    CHECK(episode_score(ep, thr).phi <= n * (3.0 + top_speed) + 1e-12);
  }
}

TEST_CASE("score arithmetic matches a direct evaluation of the definition") {
  DogThresholds thr;
  Rng rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    EpisodeResult ep;
    ep.t_max = rng.uniform(2, 30);
    ep.t_sim = rng.uniform(0, ep.t_max);
    const int n = rng.uniform_int(20);
    for (int i = 0; i < n; ++i)
      ep.steps.push_back(make_step(rng.uniform(0, 0.08), rng.uniform(0.7, 0.9),
                                   rng.uniform(0.7, 0.9), rng.uniform(-0.2, 0.2),
                                   rng.uniform(-0.2, 0.2), rng.uniform(-0.1, 1.2),
                                   rng.uniform(0.05, 0.5)));
    // independent evaluation, same accumulation order as the definition
    double total = 0;
    for (const auto& step : ep.steps) {
      const double m1 = step.max_leg_retraction > thr.retraction_min ? 1 : 0;
      const double m2 =
          std::abs(step.com_height_end - step.com_height_start) < thr.com_height_tol ? 1 : 0;
      const double m3 =
          std::abs(step.trunk_lean_end - step.trunk_lean_start) < thr.trunk_lean_tol ? 1 : 0;
      total += m1 + m2 + m3 + step.avg_speed;
    }
    const double expected = total * (ep.t_sim / ep.t_max);
    CHECK(episode_score(ep, thr).phi == expected);  // exact
  }
}
