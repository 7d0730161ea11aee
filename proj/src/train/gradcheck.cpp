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

#include "cfsnn/train/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "cfsnn/autodiff/ops.hpp"
#include "cfsnn/autodiff/tdbn.hpp"
#include "cfsnn/core/rng.hpp"
#include "cfsnn/train/trainer.hpp"

namespace cfsnn::train {

double relative_error(double analytic, double numeric, double floor) {
  const double den = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / den;
}

namespace {

// sum_i out_i * r_i, recorded under its own name so a fault injected into a
// tensor op cannot leak into the projection.
ad::Tensor project(const ad::Tensor& out, const std::vector<real>& r) {
  const auto v = out.values();
  real s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * r[i];
  ad::Tensor res = ad::make_output("gradcheck.project", Shape{}, {s});
  if (ad::should_record({&out})) {
    ad::Node* on = out.node();
    ad::Node* rn = res.node();
    ad::record("gradcheck.project", {out}, res, [on, rn, r]() {
      const real g = rn->grad[0];
      std::vector<real> d(r.size());
      for (std::size_t i = 0; i < r.size(); ++i) d[i] = g * r[i];
      ad::accumulate(on, d);
    });
  }
  return res;
}

ad::Tensor random_tensor(const Shape& s, Rng& rng, double lo = -1, double hi = 1) {
  std::vector<real> v(s.numel());
  for (auto& x : v) x = static_cast<real>(rng.uniform(lo, hi));
  return ad::Tensor::from(s, std::move(v));
}

std::vector<real> random_weights(std::size_t n, Rng& rng) {
  std::vector<real> r(n);
  for (auto& x : r) x = static_cast<real>(rng.uniform(-1, 1));
  return r;
}

double eval_scalar(const std::function<ad::Tensor()>& f) {
  ad::NoGradScope ng;
  return static_cast<double>(f().item());
}

}  // namespace

void check_function(const std::string& check, const std::function<ad::Tensor()>& f,
                    std::vector<Probe> probes, const GradcheckOptions& opts,
                    CategoryResult& into) {
  for (auto& p : probes) {
    p.tensor.set_requires_grad(true);
    p.tensor.zero_grad();
  }
  {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    ad::Tensor loss = f();
    tape.backward(loss);
  }
  for (auto& p : probes) {
    const std::vector<real> analytic(p.tensor.grad().begin(), p.tensor.grad().end());
    auto vals = p.tensor.mutable_values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const real orig = vals[i];
      vals[i] = static_cast<real>(orig + opts.h);
      const double up = eval_scalar(f);
      vals[i] = static_cast<real>(orig - opts.h);
      const double down = eval_scalar(f);
      vals[i] = orig;
      const double numeric = (up - down) / (2 * opts.h);
      const double a = analytic.empty() ? 0.0 : static_cast<double>(analytic[i]);
      const double err = relative_error(a, numeric, opts.floor);
      ++into.elements;
      if (err >= into.max_error) {
        into.max_error = err;
        into.worst = check + "/" + p.name + "[" + std::to_string(i) + "]";
      }
    }
  }
}

CategoryResult check_ops(const GradcheckOptions& opts) {
  CategoryResult res;
  res.name = "ops";
  res.tolerance = opts.ops_tol;
  Rng rng = Rng(opts.seed).split(0x6f7073);
  auto unary = [&](const std::string& name, const Shape& s, double lo, double hi,
                   std::function<ad::Tensor(const ad::Tensor&)> op) {
    ad::Tensor a = random_tensor(s, rng, lo, hi);
    const auto r = random_weights(op(a.detach()).numel(), rng);
    check_function(name, [&] { return project(op(a), r); }, {{"a", a}}, opts, res);
  };
  auto binary = [&](const std::string& name, const Shape& sa, const Shape& sb,
                    std::function<ad::Tensor(const ad::Tensor&, const ad::Tensor&)> op) {
    ad::Tensor a = random_tensor(sa, rng), b = random_tensor(sb, rng);
    const auto r = random_weights(op(a.detach(), b.detach()).numel(), rng);
    check_function(name, [&] { return project(op(a, b), r); }, {{"a", a}, {"b", b}},
                   opts, res);
  };

  binary("matmul", Shape{3, 4}, Shape{4, 2}, ad::matmul);
  {
    ad::Tensor x = random_tensor(Shape{3, 4}, rng), w = random_tensor(Shape{5, 4}, rng),
               b = random_tensor(Shape{5}, rng);
    const auto r = random_weights(15, rng);
    check_function("linear", [&] { return project(ad::linear(x, w, b), r); },
                   {{"x", x}, {"w", w}, {"bias", b}}, opts, res);
  }
  {
    ad::Tensor x = random_tensor(Shape{2, 2, 5, 5}, rng),
               w = random_tensor(Shape{3, 2, 3, 3}, rng), b = random_tensor(Shape{3}, rng);
    const ad::Conv2dDesc d{2, 1};
    const auto r = random_weights(ad::conv2d(x, w, d, b).numel(), rng);
    check_function("conv2d", [&] { return project(ad::conv2d(x, w, d, b), r); },
                   {{"x", x}, {"w", w}, {"bias", b}}, opts, res);
  }
  binary("add", Shape{2, 3}, Shape{2, 3}, ad::add);
  binary("sub", Shape{2, 3}, Shape{2, 3}, ad::sub);
  binary("mul", Shape{2, 3}, Shape{2, 3}, ad::mul);
  unary("scale", Shape{5}, -1, 1, [](const ad::Tensor& a) { return ad::scale(a, real(-1.7)); });
  unary("add_scalar", Shape{5}, -1, 1,
        [](const ad::Tensor& a) { return ad::add_scalar(a, real(0.3)); });
  binary("sum_all", Shape{4}, Shape{4}, [](const ad::Tensor& a, const ad::Tensor& b) {
    std::vector<ad::Tensor> parts{a, b, a};
    return ad::sum_all(parts);
  });
  unary("reduce_sum", Shape{2, 3}, -1, 1, ad::reduce_sum);
  unary("reduce_mean", Shape{2, 3}, -1, 1, ad::reduce_mean);
  unary("exp", Shape{6}, -1, 1, ad::exp);
  unary("log", Shape{6}, 0.5, 2, ad::log);
  // Values kept away from the kink.
  unary("abs", Shape{6}, 0.2, 1, [](const ad::Tensor& a) {
    return ad::abs(ad::add_scalar(ad::scale(a, real(2)), real(-1.2)));
  });
  unary("sigmoid", Shape{6}, -2, 2, ad::sigmoid);
  unary("softmax", Shape{2, 4}, -2, 2, ad::softmax);
  unary("reshape", Shape{2, 3}, -1, 1,
        [](const ad::Tensor& a) { return ad::reshape(a, Shape{3, 2}); });
  unary("slice_rows", Shape{4, 2}, -1, 1,
        [](const ad::Tensor& a) { return ad::slice_rows(a, 1, 3); });
  binary("concat_rows", Shape{2, 3}, Shape{1, 3}, [](const ad::Tensor& a, const ad::Tensor& b) {
    std::vector<ad::Tensor> parts{a, b};
    return ad::concat_rows(parts);
  });
  unary("element", Shape{5}, -1, 1, [](const ad::Tensor& a) { return ad::element(a, 3); });
  unary("avg_pool2d", Shape{1, 2, 4, 4}, -1, 1,
        [](const ad::Tensor& a) { return ad::avg_pool2d(a, 2); });
  {
    // Distinct, well separated values so the arg max is stable under +-h.
    std::vector<real> v(32);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<real>(0.1 * i);
    rng.shuffle(std::span<real>(v));
    ad::Tensor a = ad::Tensor::from(Shape{1, 2, 4, 4}, v);
    const auto r = random_weights(8, rng);
    check_function("max_pool2d", [&] { return project(ad::max_pool2d(a, 2), r); },
                   {{"a", a}}, opts, res);
  }
  {
    ad::Tensor x = random_tensor(Shape{6, 3}, rng), g = random_tensor(Shape{3}, rng, 0.5, 1.5),
               b = random_tensor(Shape{3}, rng);
    const auto r = random_weights(18, rng);
    check_function("tdbn",
                   [&] { return project(ad::tdbn_forward(x, g, b, real(1), real(1e-5), true), r); },
                   {{"x", x}, {"gamma", g}, {"beta", b}}, opts, res);
  }
  return res;
}

CategoryResult check_losses(const GradcheckOptions& opts) {
  CategoryResult res;
  res.name = "losses";
  res.tolerance = opts.loss_tol;
  Rng rng = Rng(opts.seed).split(0x6c6f7373);
  {
    ad::Tensor scores = random_tensor(Shape{4, 3}, rng, -2, 2);
    const std::vector<std::size_t> labels{0, 2, 1, 2};
    check_function("cross_entropy", [&] { return loss::cross_entropy(scores, labels); },
                   {{"scores", scores}}, opts, res);
  }
  return res;
}

CategoryResult check_pnb(const NeuronConfig& cfg, const loss::LossConfig& lc,
                         const GradcheckOptions& opts) {
  CategoryResult res;
  res.name = "pnb";
  res.tolerance = opts.loss_tol;
  if (lc.lambda == 0) {
    res.skipped = true;
    res.skip_reason = "loss.lambda is 0";
    return res;
  }
  Rng rng = Rng(opts.seed).split(0x706e62);
  // Potentials placed inside regions, clear of boundaries and centres.
  const int K = cfg.k_p_max;
  std::vector<real> u;
  for (int k = 1; k <= K; ++k)
    for (int j = 0; j < 3; ++j) {
      const double off = 0.2 + 0.25 * j + 0.05 * rng.uniform01();
      u.push_back(static_cast<real>((k - 1 + off) * cfg.theta_p));
      u.push_back(static_cast<real>(-(k - 1 + off * 0.8) * std::abs(cfg.theta_n)));
    }
  ad::Tensor a = ad::Tensor::from(Shape{2, u.size() / 2}, u);
  ad::Tensor b = random_tensor(Shape{2, u.size() / 2}, rng, 0.15, 0.85);
  loss::LossConfig l2 = lc;
  check_function("pnb_loss",
                 [&] {
                   std::vector<ad::Tensor> p{a, b};
                   return loss::pnb_loss(p, cfg, l2);
                 },
                 {{"u0", a}, {"u1", b}}, opts, res);
  return res;
}

CategoryResult check_end_to_end(Network& net, const ad::Tensor& x,
                                std::span<const std::size_t> labels,
                                const GradcheckOptions& opts) {
  CategoryResult res;
  res.name = "end_to_end";
  res.tolerance = opts.e2e_tol;
  loss::LossConfig ce_only;
  ce_only.lambda = 0;
  const ForwardOptions fo{true, FireMode::kSmoothed};
  std::vector<Probe> probes;
  for (auto* p : net.parameters())
    if (p->tensor.requires_grad()) probes.push_back({p->name, p->tensor});
  const std::vector<std::size_t> lab(labels.begin(), labels.end());
  check_function("network",
                 [&] { return compute_loss(net, x, lab, ce_only, fo).total; },
                 std::move(probes), opts, res);
  return res;
}

}  // namespace cfsnn::train
