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
#include <vector>

#include "cfsnn/autodiff/ops.hpp"
#include "cfsnn/core/error.hpp"
#include "cfsnn/loss/loss.hpp"
#include "support/fd.hpp"
#include "support/gen.hpp"

using namespace cfsnn;
using namespace cfsnn::loss;
using cfsnn::testing::for_all;
using cfsnn::testing::Gen;

namespace {

ad::Tensor pnb_of(const ad::Tensor& u, const NeuronConfig& c, const LossConfig& lc) {
  const ad::Tensor parts[] = {u};
  return pnb_loss(parts, c, lc);
}

}  // namespace

TEST_SUITE("loss") {

TEST_CASE("cross entropy examples") {
  const std::vector<real> o{1.0, 0.5};
  CHECK(cross_entropy(o, 0) == doctest::Approx(0.4741).epsilon(1e-4));
  const std::vector<real> flat(10, 0.3);
  CHECK(cross_entropy(flat, 7) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  CHECK_THROWS(cross_entropy(o, 2));
  double prev = 1e9;
  for (double m : {1.0, 5.0, 20.0, 60.0}) {
    const std::vector<real> d{m, 0};
    const double l = cross_entropy(d, 0);
    CHECK(l < prev);
    prev = l;
  }
  CHECK(prev < 1e-20);
}

TEST_CASE("cross entropy gradient is softmax minus one-hot") {
  for_all(51, 50, [](Gen& g, std::size_t) {
    const std::size_t B = g.size(1, 5), C = g.size(2, 8);
    ad::Tensor s = g.tensor(Shape{B, C}, -4, 4, true);
    std::vector<std::size_t> labels(B);
    for (auto& l : labels) l = g.size(0, C - 1);
    {
      ad::Tape tape;
      ad::TapeScope scope(tape);
      tape.backward(cross_entropy(s, labels));
    }
    for (std::size_t b = 0; b < B; ++b) {
      double mx = -1e300, z = 0;
      for (std::size_t c = 0; c < C; ++c) mx = std::max(mx, double(s.at(b * C + c)));
      for (std::size_t c = 0; c < C; ++c) z += std::exp(s.at(b * C + c) - mx);
      for (std::size_t c = 0; c < C; ++c) {
        const double p = std::exp(s.at(b * C + c) - mx) / z;
        const double want = (p - (c == labels[b] ? 1.0 : 0.0)) / double(B);
        CHECK(s.grad()[b * C + c] == doctest::Approx(want).epsilon(1e-12));
      }
    }
  });
}

TEST_CASE("partition examples") {
  NeuronConfig c;
  CHECK(pnb_region(0.5, c, 2, true) == 1);
  CHECK(pnb_region(1.0, c, 2, true) == 1);
  CHECK(pnb_region(1.0001, c, 2, true) == 2);
  CHECK(pnb_region(0.0, c, 2, true) == 0);
  CHECK(pnb_region(-1.5, c, 2, true) == -2);
  CHECK(pnb_region(-1.0, c, 2, true) == -1);
  CHECK(pnb_region(-1.0001, c, 2, true) == -2);
  CHECK(pnb_region(-2.0, c, 2, true) == -2);
  CHECK(pnb_region(3.0, c, 2, true) == 2);
  CHECK(pnb_region(3.0, c, 2, false) == 0);
  CHECK(pnb_region(-3.0, c, 2, false) == 0);
}

TEST_CASE("partition matches interval membership") {
  for_all(52, 100, [](Gen& g, std::size_t) {
    NeuronConfig c = g.cf_config();
    const int K = g.integer(1, 4);
    const bool sat = g.coin();
    const double Th = -c.theta_n;
    const auto u = g.vec(200, -6, 6);
    const auto r = pnb_partition(u, c, K, sat);
    for (std::size_t i = 0; i < u.size(); ++i) {
      int want = 0;
      for (int k = 1; k <= K; ++k) {
        if (u[i] > (k - 1) * c.theta_p && u[i] <= k * c.theta_p) want = k;
        if (u[i] >= -k * Th && u[i] < -(k - 1) * Th) want = -k;
      }
      if (sat && want == 0 && u[i] > K * c.theta_p) want = K;
      if (sat && want == 0 && u[i] < -K * Th) want = -K;
      CHECK(r[i] == want);
    }
  });
}

TEST_CASE("weighted mean examples") {
  NeuronConfig c;
  const std::vector<real> two{0.2, 0.9}, one{0.5}, none{};
  const double w1 = std::exp(-0.8), w2 = std::exp(-0.1);
  CHECK(pnb_weighted_mean(two, 1, true, c, 1e-15) ==
        doctest::Approx((0.2 * w1 + 0.9 * w2) / (w1 + w2)).epsilon(1e-12));
  CHECK(pnb_weighted_mean(two, 1, true, c, 1e-15) == doctest::Approx(0.6677).epsilon(1e-4));
  CHECK(pnb_weighted_mean(one, 1, true, c, 1e-15) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pnb_weighted_mean(none, 1, true, c, 1e-6) == 0);
}

TEST_CASE("balance term examples") {
  NeuronConfig c;
  LossConfig lc;
  const std::vector<real> sym{0.5, -0.5, 1.5, -1.5};
  CHECK(pnb_value(sym, c, lc) < 1e-4);
  const std::vector<real> lone{0.5};
  CHECK(pnb_value(lone, c, lc) == 10.0);
  NeuronConfig c1 = c;
  c1.k_p_max = c1.k_n_max = 1;
  const std::vector<real> pair{0.8, -0.4};
  CHECK(pnb_value(pair, c1, lc) == doctest::Approx(std::log(2.0)).epsilon(1e-5));
}

TEST_CASE("total loss examples") {
  LossConfig lc;
  const auto ce = ad::Tensor::scalar(0.4741), p = ad::Tensor::scalar(0.2);
  CHECK(total_loss(ce, p, lc).item() == doctest::Approx(0.5241).epsilon(1e-12));
  CHECK(total_loss(ce, ad::Tensor::scalar(0), lc).item() == 0.4741);
  lc.lambda = 0;
  CHECK(total_loss(ce, p, lc).item() == 0.4741);
  CHECK(total_loss(ce, ad::Tensor{}, lc).item() == 0.4741);
}

TEST_CASE("config validation") {
  LossConfig lc;
  lc.lambda = -1;
  CHECK_THROWS_AS(lc.validate(), ConfigError);
  lc = {};
  lc.epsilon = 0;
  CHECK_THROWS_AS(lc.validate(), ConfigError);
  lc = {};
  lc.term_clamp = 0;
  CHECK_THROWS_AS(lc.validate(), ConfigError);
}

TEST_CASE("balance term is negation symmetric and bounded") {
  for_all(53, 200, [](Gen& g, std::size_t) {
    NeuronConfig c = g.cf_config();
    c.k_n_max = c.k_p_max;
    c.theta_n = -c.theta_p;
    LossConfig lc;
    lc.term_clamp = static_cast<real>(g.uniform(0.5, 12));
    auto u = g.vec(g.size(1, 60), -5, 5);
    const double a = pnb_value(u, c, lc);
    CHECK(a >= 0);
    CHECK(a <= lc.term_clamp);
    std::vector<real> neg(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) neg[i] = -u[i];
    // Swapping the sides moves epsilon between numerator and denominator, so
    // the two agree to O(epsilon).
    CHECK(std::abs(pnb_value(neg, c, lc) - a) < 1e-4);
    LossConfig tight = lc;
    tight.epsilon = 1e-14;
    CHECK(std::abs(pnb_value(neg, c, tight) - pnb_value(u, c, tight)) < 1e-9);
    // Populate every level so no term sits at the empty-region clamp.
    std::vector<real> closed = u;
    for (int k = 1; k <= c.k_p_max; ++k) closed.push_back(static_cast<real>((k - 0.5) * c.theta_p));
    const std::size_t n = closed.size();
    for (std::size_t i = 0; i < n; ++i) closed.push_back(-closed[i]);
    CHECK(pnb_value(closed, c, lc) < 1e-4);
  });
}

TEST_CASE("balance term gradient matches finite differences") {
  for_all(54, 30, [](Gen& g, std::size_t) {
    NeuronConfig c;
    LossConfig lc;
    lc.term_clamp = 100;
    // Keep every value at least 1e-3 away from a region boundary.
    std::vector<real> v;
    while (v.size() < 24) {
      const double x = g.uniform(-2.9, 2.9);
      if (std::abs(x - std::round(x)) > 1e-2) v.push_back(static_cast<real>(x));
    }
    ad::Tensor u = ad::Tensor::from(Shape{24}, v);
    const auto r = testing::fd_compare([&] { return pnb_of(u, c, lc); }, {u}, 1e-6);
    CHECK(r.max_rel_err(1e-3) < 1e-5);
  });
}

TEST_CASE("clamped terms pass no gradient") {
  NeuronConfig c;
  LossConfig lc;
  ad::Tensor u = ad::Tensor::from(Shape{1}, {0.5}, true);
  ad::Tape tape;
  ad::TapeScope scope(tape);
  tape.backward(pnb_of(u, c, lc));
  CHECK(u.grad()[0] == 0);
}

TEST_CASE("lambda scales the balance gradient linearly") {
  for_all(55, 20, [](Gen& g, std::size_t) {
    NeuronConfig c;
    const std::size_t B = 4, D = 6, C = 3;
    ad::Tensor x = g.tensor(Shape{B, D}, -1, 1);
    ad::Tensor w = g.tensor(Shape{D, C}, -1, 1, true);
    std::vector<std::size_t> labels{0, 1, 2, 1};
    auto grads = [&](real lambda) {
      LossConfig lc;
      lc.lambda = lambda;
      lc.term_clamp = 100;
      w.zero_grad();
      ad::Tape tape;
      ad::TapeScope scope(tape);
      const auto s = ad::matmul(x, w);
      tape.backward(total_loss(cross_entropy(s, labels), pnb_of(ad::scale(s, 3), c, lc), lc));
      return std::vector<real>(w.grad().begin(), w.grad().end());
    };
    const auto g0 = grads(0), g1 = grads(0.25), g2 = grads(1.0);
    double worst = 0;
    for (std::size_t i = 0; i < g0.size(); ++i) {
      const double want = 4 * (g1[i] - g0[i]);
      const double got = g2[i] - g0[i];
      worst = std::max(worst, std::abs(got - want) / std::max(std::abs(want), 1e-6));
    }
    CHECK(worst < 1e-10);
  });
}

}  // TEST_SUITE
