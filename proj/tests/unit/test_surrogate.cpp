// Copyright 2026 The cfsnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "cfsnn/core/error.hpp"
#include "cfsnn/surrogate/surrogate.hpp"
#include "support/gen.hpp"

using namespace cfsnn;
using namespace cfsnn::surrogate;
using cfsnn::testing::for_all;
using cfsnn::testing::Gen;

TEST_SUITE("surrogate") {

TEST_CASE("rectangular") {
  CHECK(sg_rectangular(1.3, 1, 1) == 1.0);
  CHECK(sg_rectangular(1.5, 1, 1) == 0.0);
  for (double a : {0.3, 1.0, 2.5}) CHECK(sg_rectangular(1, 1, a) == 1 / a);
}

TEST_CASE("piecewise linear") {
  CHECK(sg_plg(1, 1, 2) == 2);
  CHECK(sg_plg(1.25, 1, 2) == 1.0);
  CHECK(sg_plg(1.6, 1, 2) == 0);
}

TEST_CASE("cf rectangle") {
  NeuronConfig c;
  CHECK(sg_cf_rect(1.7, c, 1) == 1);
  CHECK(sg_cf_rect(0.3, c, 1) == 0);
  CHECK(sg_cf_rect(-1.7, c, 1) == 1);
  CHECK(sg_cf_rect(2.6, c, 1) == 0);
}

TEST_CASE("tsg steepness") {
  TsgParams p(1, 1, 0, 4, 0.5);
  CHECK(tsg_alpha(p, 0, 0) == 2.5);
  p.x[0] = 50;
  CHECK(tsg_alpha(p, 0, 0) == doctest::Approx(4.5).epsilon(1e-12));
  p.x[0] = -50;
  CHECK(tsg_alpha(p, 0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS(tsg_alpha(p, 1, 0));
  CHECK_THROWS(tsg_alpha(p, 0, 1));
}

TEST_CASE("tsg level triangle") {
  NeuronConfig c;
  CHECK(tsg_eval(2.0, 2, Side::kPositive, 2.5, c) == 2.5);
  CHECK(tsg_eval(2.2, 2, Side::kPositive, 2.5, c) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(tsg_eval(2.5, 2, Side::kPositive, 2.5, c) == 0);
  CHECK(tsg_eval(-2.2, 2, Side::kNegative, 2.5, c) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK_THROWS(tsg_eval(1, 3, Side::kPositive, 2.5, c));
  CHECK_THROWS(tsg_eval(1, 0, Side::kNegative, 2.5, c));
}

TEST_CASE("summed level gradient") {
  NeuronConfig c;
  CHECK(cf_total_grad(1.5, 1, c) == 1.0);
  CHECK(cf_total_grad(40, 1, c) == 0);
  CHECK(cf_total_grad(1.0, 1, c) == 1.0);
}

TEST_CASE("smoothed forward anchors") {
  NeuronConfig c;
  CHECK(smoothed_forward(0, 1, c) == 0);
  CHECK(smoothed_forward(100, 1, c) == doctest::Approx(2).epsilon(1e-14));
  CHECK(smoothed_forward(-100, 1, c) == doctest::Approx(-2).epsilon(1e-14));
  const double h = 1e-6;
  const double d = (smoothed_forward(1.5 + h, 1, c) - smoothed_forward(1.5 - h, 1, c)) / (2 * h);
  CHECK(std::abs(d - cf_total_grad(1.5, 1, c)) / cf_total_grad(1.5, 1, c) < 1e-8);
}

TEST_CASE("surrogate values are non-negative and bounded") {
  for_all(41, 200, [](Gen& g, std::size_t) {
    const NeuronConfig c = g.cf_config();
    const double a = g.uniform(0.1, 5), u = g.uniform(-8, 8), th = g.uniform(0.2, 2);
    CHECK(sg_rectangular(u, th, a) >= 0);
    CHECK(sg_rectangular(u, th, a) <= 1 / a);
    CHECK(sg_plg(u, th, a) >= 0);
    CHECK(sg_plg(u, th, a) <= a);
    CHECK(sg_cf_rect(u, c, a) >= 0);
    CHECK(sg_cf_rect(u, c, a) <= a);
    for (int k = 1; k <= c.k_p_max; ++k) {
      CHECK(tsg_eval(u, k, Side::kPositive, a, c) >= 0);
      CHECK(tsg_eval(u, k, Side::kPositive, a, c) <= a);
    }
  });
}

TEST_CASE("tsg triangle support is |u - k theta| < 1/alpha") {
  for_all(42, 20, [](Gen& g, std::size_t) {
    const NeuronConfig c = g.cf_config();
    const double a = g.uniform(0.3, 4);
    const int k = g.integer(1, c.k_n_max);
    const double centre = k * c.theta_n;
    for (int i = 0; i <= 4000; ++i) {
      const double u = centre - 3 / a + 6 / a * i / 4000.0;
      const double v = tsg_eval(u, k, Side::kNegative, a, c);
      if (std::abs(u - centre) >= 1 / a) CHECK(v == 0);
      if (std::abs(u - centre) < 0.999 / a) CHECK(v > 0);
    }
  });
}

TEST_CASE("tsg steepness is increasing with range (b, s + b)") {
  for_all(43, 50, [](Gen& g, std::size_t) {
    const real s = static_cast<real>(g.uniform(0.5, 6)), b = static_cast<real>(g.uniform(0, 2));
    TsgParams p(1, 2, 0, s, b);
    p.x[0] = static_cast<real>(g.uniform(-10, 10));
    p.x[1] = p.x[0] + static_cast<real>(g.uniform(1e-3, 5));
    const real a0 = tsg_alpha(p, 0, 0), a1 = tsg_alpha(p, 0, 1);
    CHECK(a0 < a1);
    CHECK(a0 > b);
    CHECK(a1 < s + b);
    const double h = 1e-6;
    TsgParams q = p;
    q.x[0] += h;
    const double up = tsg_alpha(q, 0, 0);
    q.x[0] -= 2 * h;
    const double fd = (up - tsg_alpha(q, 0, 0)) / (2 * h);
    CHECK(std::abs(fd - tsg_alpha_dx(p, 0, 0)) <= 1e-8 + 1e-6 * tsg_alpha_dx(p, 0, 0));
  });
}

TEST_CASE("smoothed forward is monotone with derivative equal to the summed triangles") {
  for_all(44, 1000, [](Gen& g, std::size_t) {
    const NeuronConfig c = g.cf_config();
    const double a = g.uniform(0.5, 4), u = g.uniform(-6, 6);
    const double h = 1e-6;
    const double up = smoothed_forward(u + h, a, c), down = smoothed_forward(u - h, a, c);
    CHECK(up >= down);
    const double fd = (up - down) / (2 * h);
    const double an = cf_total_grad(u, a, c);
    // Kinks at triangle corners are measure zero; skip draws within h of one.
    bool near_kink = false;
    for (int k = 1; k <= c.k_p_max; ++k)
      for (double e : {k * c.theta_p, k * c.theta_p + 1 / a, k * c.theta_p - 1 / a})
        near_kink |= std::abs(u - e) < 1e-5;
    for (int k = 1; k <= c.k_n_max; ++k)
      for (double e : {k * c.theta_n, k * c.theta_n + 1 / a, k * c.theta_n - 1 / a})
        near_kink |= std::abs(u - e) < 1e-5;
    if (!near_kink) CHECK(std::abs(fd - an) <= 1e-8 * std::max(1.0, std::abs(an)));
  });
}

TEST_CASE("smoothed forward saturates past the last triangle") {
  NeuronConfig c;
  const double a = 2.5;
  const double edge = c.k_p_max * c.theta_p + 1 / a;
  CHECK(smoothed_forward(edge + 0.1, a, c) == smoothed_forward(edge + 7, a, c));
}

TEST_CASE("rule dispatch and steepness derivative") {
  NeuronConfig c;
  SurrogateSpec spec;
  spec.family = Family::kTsg;
  SurrogateRule rule(spec, c);
  CHECK(rule.learnable());
  CHECK(rule.grad(1.5, 1) == cf_total_grad(1.5, 1, c));
  for_all(45, 100, [&](Gen& g, std::size_t) {
    const double u = g.uniform(-3, 3), a = g.uniform(0.5, 4), h = 1e-6;
    const double fd = (rule.smooth(u, a + h) - rule.smooth(u, a - h)) / (2 * h);
    CHECK(std::abs(fd - rule.smooth_dalpha(u, a)) <= 1e-7 * std::max(1.0, std::abs(fd)));
  });

  spec.family = Family::kRectangular;
  NeuronConfig l;
  l.kind = NeuronKind::kLif;
  SurrogateRule r2(spec, l);
  CHECK(r2.grad(1.2, 1) == 1);
  CHECK_FALSE(r2.learnable());

  spec = {};
  spec.composition = Composition::kNearest;
  SurrogateRule r3(spec, c);
  CHECK_FALSE(r3.supports_smoothing());
  // Only the nearest level's triangle contributes.
  CHECK(r3.grad(1.3, 1) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(rule.grad(1.3, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("surrogate settings validation and parsing") {
  SurrogateSpec s;
  s.family = Family::kPlg;
  s.alpha = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK(parse_family("cf_rectangular") == Family::kCfRectangular);
  CHECK_THROWS_AS(parse_family("arctan"), ConfigError);
}

}  // TEST_SUITE
