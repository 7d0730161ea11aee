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

#include "cfsnn/autodiff/ops.hpp"
#include "cfsnn/autodiff/tdbn.hpp"
#include "cfsnn/core/error.hpp"
#include "cfsnn/surrogate/surrogate.hpp"
#include "support/fd.hpp"
#include "support/gen.hpp"

using namespace cfsnn;
using cfsnn::testing::fd_compare;
using cfsnn::testing::for_all;
using cfsnn::testing::Gen;

namespace {

ad::Tensor T(const Shape& s, std::vector<real> v, bool g = false) {
  return ad::Tensor::from(s, std::move(v), g);
}

// Fixed random projection to a scalar, built from recorded ops.
ad::Tensor probe(const ad::Tensor& y, const ad::Tensor& r) {
  return ad::reduce_sum(ad::mul(y, r));
}

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("matmul by the identity") {
  auto a = T({2, 2}, {1, 2, 3, 4});
  auto i = T({2, 2}, {1, 0, 0, 1});
  auto c = ad::matmul(a, i);
  CHECK(c.shape() == Shape{2, 2});
  for (std::size_t k = 0; k < 4; ++k) CHECK(c.at(k) == a.at(k));
}

TEST_CASE("reduce_mean") { CHECK(ad::reduce_mean(T({4}, {1, 2, 3, 4})).item() == 2.5); }

TEST_CASE("conv2d of ones") {
  auto x = ad::Tensor::full({1, 1, 3, 3}, 1);
  auto w = ad::Tensor::full({1, 1, 2, 2}, 1);
  auto y = ad::conv2d(x, w, {1, 0});
  CHECK(y.shape() == Shape{1, 1, 2, 2});
  for (std::size_t k = 0; k < 4; ++k) CHECK(y.at(k) == 4.0);
}

TEST_CASE("conv2d output extent follows floor((H + 2p - k) / s) + 1") {
  for_all(21, 50, [](Gen& g, std::size_t) {
    const std::size_t h = g.size(3, 9), k = g.size(1, 3), s = g.size(1, 3), p = g.size(0, 2);
    auto x = g.tensor({1, 2, h, h});
    auto w = g.tensor({3, 2, k, k});
    auto y = ad::conv2d(x, w, {s, p});
    const std::size_t want = (h + 2 * p - k) / s + 1;
    CHECK(y.shape() == Shape{1, 3, want, want});
  });
}

TEST_CASE("shape mismatch names both shapes") {
  auto a = ad::Tensor::zeros({2, 3});
  auto b = ad::Tensor::zeros({2, 3});
  try {
    ad::matmul(a, b);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2, 3]") != std::string::npos);
  }
  CHECK_THROWS_AS(ad::add(a, ad::Tensor::zeros({3, 2})), ShapeError);
}

TEST_CASE("abs and log at the edge") {
  auto x = T({1}, {0}, true);
  ad::Tape tape;
  ad::TapeScope scope(tape);
  auto y = ad::reduce_sum(ad::abs(x));
  tape.backward(y);
  CHECK(x.grad()[0] == 0);
  CHECK_THROWS_AS(ad::log(T({1}, {0})), NumericError);
}

TEST_CASE("custom activation: heaviside forward, triangle backward") {
  auto u = T({1}, {1.5}, true);
  ad::Tape tape;
  ad::TapeScope scope(tape);
  auto s = ad::custom_activation(
      "step", u, [](real v, real) { return v >= 1 ? real(1) : real(0); },
      [](real v, real) { return surrogate::sg_plg(v, 1, 1); });
  CHECK(s.at(0) == 1);
  tape.backward(ad::reduce_sum(s));
  CHECK(u.grad()[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("custom activation: straight-through identity") {
  for_all(22, 20, [](Gen& g, std::size_t) {
    auto u = g.tensor({5}, -3, 3, true);
    auto r = g.tensor({5});
    ad::Tape tape;
    ad::TapeScope scope(tape);
    auto y = ad::custom_activation(
        "id", u, [](real v, real) { return v; }, [](real, real) { return real(1); });
    tape.backward(probe(y, r));
    for (std::size_t i = 0; i < 5; ++i) CHECK(u.grad()[i] == r.at(i));
  });
}

TEST_CASE("custom activation: circulate firing with summed triangles") {
  NeuronConfig cfg;
  auto u = T({1}, {1.5}, true);
  ad::Tape tape;
  ad::TapeScope scope(tape);
  auto s = ad::custom_activation(
      "cf", u,
      [&](real v, real) {
        real c = 0;
        for (int k = 1; k <= cfg.k_p_max; ++k) c += v > k * cfg.theta_p ? 1 : 0;
        return c;
      },
      [&](real v, real) { return surrogate::cf_total_grad(v, 1, cfg); });
  CHECK(s.at(0) == 1);
  tape.backward(ad::reduce_sum(s));
  CHECK(u.grad()[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("custom activation backward is rule times upstream, element for element") {
  for_all(23, 30, [](Gen& g, std::size_t) {
    const std::size_t n = g.size(1, 20);
    auto u = g.tensor({n}, -3, 3, true);
    auto r = g.tensor({n}, -2, 2);
    const real alpha = static_cast<real>(g.uniform(0.5, 3));
    auto rule = [alpha](real v, real) { return surrogate::sg_plg(v, 1, alpha); };
    ad::Tape tape;
    ad::TapeScope scope(tape);
    auto y = ad::custom_activation(
        "t", u, [](real v, real) { return std::floor(v); }, rule);
    tape.backward(probe(y, r));
    for (std::size_t i = 0; i < n; ++i) CHECK(u.grad()[i] == rule(u.at(i), 0) * r.at(i));
  });
}

TEST_CASE("custom activation reports the offending element") {
  auto u = T({3}, {1, 2, 3});
  try {
    ad::custom_activation(
        "bad", u, [](real v, real) { return v == 2 ? real(INFINITY) : v; },
        [](real, real) { return real(1); });
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
    CHECK(std::string(e.what()).find("bad") != std::string::npos);
  }
}

TEST_CASE("backward basics") {
  SUBCASE("linear rule") {
    auto w = T({}, {0.7}, true);
    ad::Tape tape;
    ad::TapeScope scope(tape);
    tape.backward(ad::reduce_sum(ad::scale(w, 3)));
    CHECK(w.grad()[0] == 3);
  }
  SUBCASE("stationary point") {
    auto w = T({}, {0}, true);
    ad::Tape tape;
    ad::TapeScope scope(tape);
    tape.backward(ad::mul(w, w));
    CHECK(w.grad()[0] == 0);
  }
  SUBCASE("non-scalar loss") {
    auto w = T({2}, {1, 2}, true);
    ad::Tape tape;
    ad::TapeScope scope(tape);
    CHECK_THROWS(tape.backward(ad::scale(w, 2)));
  }
  SUBCASE("second backward") {
    auto w = T({2}, {1, 2}, true);
    ad::Tape tape;
    ad::TapeScope scope(tape);
    auto l = ad::reduce_sum(w);
    tape.backward(l);
    CHECK_THROWS(tape.backward(l));
  }
  SUBCASE("unreachable leaves stay zero") {
    auto w = T({2}, {1, 2}, true);
    auto z = T({2}, {1, 2}, true);
    ad::Tape tape;
    ad::TapeScope scope(tape);
    auto unused = ad::scale(z, 2);
    tape.backward(ad::reduce_sum(w));
    for (real g : z.grad()) CHECK(g == 0);
  }
}

TEST_CASE("two-layer linear chain matches finite differences") {
  for_all(24, 10, [](Gen& g, std::size_t) {
    auto x = g.tensor({3, 4});
    auto w1 = g.tensor({5, 4}), b1 = g.tensor({5}), w2 = g.tensor({2, 5});
    auto r = g.tensor({3, 2});
    auto f = [&] { return probe(ad::linear(ad::sigmoid(ad::linear(x, w1, b1)), w2), r); };
    auto gp = fd_compare(f, {w1, b1, w2});
    CHECK(gp.max_rel_err(1e-6) < 1e-6);
  });
}

TEST_CASE("every op matches finite differences") {
  using Op = std::function<ad::Tensor(std::vector<ad::Tensor>&)>;
  struct Case {
    const char* name;
    std::vector<Shape> shapes;
    Op op;
    double lo = -1, hi = 1;
  };
  const std::vector<Case> cases = {
      {"matmul", {{3, 4}, {4, 2}}, [](auto& t) { return ad::matmul(t[0], t[1]); }},
      {"linear", {{3, 4}, {2, 4}, {2}}, [](auto& t) { return ad::linear(t[0], t[1], t[2]); }},
      {"conv2d", {{2, 2, 5, 5}, {3, 2, 3, 3}, {3}},
       [](auto& t) { return ad::conv2d(t[0], t[1], {2, 1}, t[2]); }},
      {"add", {{2, 3}, {2, 3}}, [](auto& t) { return ad::add(t[0], t[1]); }},
      {"sub", {{2, 3}, {2, 3}}, [](auto& t) { return ad::sub(t[0], t[1]); }},
      {"mul", {{2, 3}, {2, 3}}, [](auto& t) { return ad::mul(t[0], t[1]); }},
      {"scale", {{4}}, [](auto& t) { return ad::scale(t[0], -2.5); }},
      {"reduce_sum", {{2, 3}}, [](auto& t) { return ad::reduce_sum(t[0]); }},
      {"reduce_mean", {{2, 3}}, [](auto& t) { return ad::reduce_mean(t[0]); }},
      {"exp", {{5}}, [](auto& t) { return ad::exp(t[0]); }},
      {"log", {{5}}, [](auto& t) { return ad::log(t[0]); }, 0.5, 2},
      {"abs", {{5}}, [](auto& t) { return ad::abs(t[0]); }, 0.1, 1},
      {"sigmoid", {{5}}, [](auto& t) { return ad::sigmoid(t[0]); }},
      {"softmax", {{2, 4}}, [](auto& t) { return ad::softmax(t[0]); }},
      {"slice_rows", {{4, 3}}, [](auto& t) { return ad::slice_rows(t[0], 1, 3); }},
      {"concat_rows", {{1, 3}, {2, 3}},
       [](auto& t) { return ad::concat_rows(std::span<const ad::Tensor>(t)); }},
      {"avg_pool2d", {{1, 2, 4, 4}}, [](auto& t) { return ad::avg_pool2d(t[0], 2); }},
      {"tdbn", {{6, 3}, {3}, {3}},
       [](auto& t) { return ad::tdbn_forward(t[0], t[1], t[2], 1, 1e-5, true); }},
  };
  for_all(25, 4, [&](Gen& g, std::size_t) {
    for (const auto& c : cases) {
      CAPTURE(c.name);
      std::vector<ad::Tensor> in;
      for (const auto& s : c.shapes) in.push_back(g.tensor(s, c.lo, c.hi));
      auto shape = c.op(in).shape();
      auto r = g.tensor(shape);
      auto gp = fd_compare([&] { return probe(c.op(in), r); }, in);
      CHECK(gp.max_rel_err(1e-3) < 1e-5);
    }
  });
}

TEST_CASE("tdbn examples") {
  auto g1 = ad::Tensor::full({1}, 1), b0 = ad::Tensor::zeros({1});
  SUBCASE("hand values") {
    auto y = ad::tdbn_forward(T({4, 1}, {1, 2, 3, 4}), g1, b0, 1, 0, true);
    const double want[] = {-1.3416407865, -0.4472135955, 0.4472135955, 1.3416407865};
    for (int i = 0; i < 4; ++i) CHECK(y.at(i) == doctest::Approx(want[i]).epsilon(1e-9));
  }
  SUBCASE("constant input gives beta") {
    auto b = T({1}, {0.3});
    auto y = ad::tdbn_forward(ad::Tensor::full({4, 1}, 7), g1, b, 1, 1e-5, true);
    for (real v : y.values()) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("theta scales exactly") {
    auto x = T({4, 1}, {0.1, -2, 3.5, 4});
    auto y1 = ad::tdbn_forward(x, g1, b0, 1, 1e-5, true);
    auto y2 = ad::tdbn_forward(x, g1, b0, 2, 1e-5, true);
    for (int i = 0; i < 4; ++i) CHECK(y2.at(i) == 2 * y1.at(i));
  }
  SUBCASE("single element statistics") {
    CHECK_THROWS_AS(ad::tdbn_forward(T({1, 1}, {1}), g1, b0, 1, 1e-5, true), NumericError);
  }
  SUBCASE("eval mode without running statistics") {
    CHECK_THROWS(ad::tdbn_forward(T({2, 1}, {1, 2}), g1, b0, 1, 1e-5, false));
  }
}

TEST_CASE("tdbn at init normalizes each channel to N(0, theta^2)") {
  for_all(26, 5, [](Gen& g, std::size_t) {
    const real theta = static_cast<real>(g.uniform(0.5, 2));
    const std::size_t n = 10000;
    std::vector<real> v(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
      v[2 * i] = static_cast<real>(3 + 5 * g.normal());
      v[2 * i + 1] = static_cast<real>(g.uniform(-9, 1));
    }
    auto y = ad::tdbn_forward(T({n, 2}, v), ad::Tensor::full({2}, 1), ad::Tensor::zeros({2}),
                              theta, 1e-5, true);
    for (std::size_t ch = 0; ch < 2; ++ch) {
      double m = 0, q = 0;
      for (std::size_t i = 0; i < n; ++i) m += y.at(2 * i + ch);
      m /= n;
      for (std::size_t i = 0; i < n; ++i) q += (y.at(2 * i + ch) - m) * (y.at(2 * i + ch) - m);
      q /= n;
      CHECK(std::abs(m) < 3 * theta / std::sqrt(double(n)));
      CHECK(std::abs(q - theta * theta) / (theta * theta) < 0.05);
    }
  });
}

TEST_CASE("tape replay is deterministic") {
  auto run = [](std::uint64_t seed) {
    Gen g{Rng(seed)};
    auto x = g.tensor({4, 3}), w = g.tensor({2, 3}, -1, 1, true);
    ad::Tape tape;
    ad::TapeScope scope(tape);
    auto l = ad::reduce_mean(ad::exp(ad::linear(x, w)));
    tape.backward(l);
    CHECK(tape.topologically_ordered());
    std::vector<real> out(w.grad().begin(), w.grad().end());
    out.push_back(l.item());
    return out;
  };
  CHECK(run(5) == run(5));
}

TEST_CASE("no-grad scope records nothing") {
  auto w = T({2}, {1, 2}, true);
  ad::Tape tape;
  ad::TapeScope scope(tape);
  {
    ad::NoGradScope ng;
    ad::reduce_sum(ad::scale(w, 2));
  }
  CHECK(tape.size() == 0);
}

TEST_CASE("parameters start with zero momentum of matching shape") {
  ad::Parameter p("w", ad::Tensor::zeros({3, 2}));
  CHECK(p.momentum.size() == 6);
  CHECK(p.tensor.requires_grad());
}

}  // TEST_SUITE
