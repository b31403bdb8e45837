// fssr/harness/selftest.cc
//
// Copyright 2026  FSSR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fssr/harness/selftest.h"

#include <cmath>
#include <functional>
#include <sstream>

#include "fssr/dsp/spectrogram.h"
#include "fssr/fewshot/evaluate.h"
#include "fssr/fewshot/protonet.h"
#include "fssr/models/autoencoder.h"
#include "fssr/models/factory.h"
#include "fssr/nn/capsule.h"

namespace fssr {
namespace harness {

namespace {

using Check = std::function<void(SelfTestCheck *)>;

dsp::AudioClip RandomClip(double seconds, Rng *rng) {
  dsp::AudioClip clip;
  clip.sample_rate_hz = dsp::kStandardRateHz;
  const int n = static_cast<int>(seconds * dsp::kStandardRateHz);
  clip.samples.resize(static_cast<size_t>(n));
  const double f = rng->NextUniform(100.0, 3000.0);
  for (int i = 0; i < n; ++i)
    clip.samples[static_cast<size_t>(i)] = static_cast<float>(
        0.4 * std::sin(2 * 3.14159265358979 * f * i / dsp::kStandardRateHz) +
        0.05 * rng->NextGaussian());
  return clip;
}

// Central finite differences over an explicitly listed parameter vector.
double MaxRelGradError(const std::vector<double *> &theta,
                       const std::vector<double> &analytic,
                       const std::function<double()> &eval, double h = 1e-6) {
  double worst = 0.0;
  for (size_t i = 0; i < theta.size(); ++i) {
    const double keep = *theta[i];
    *theta[i] = keep + h;
    const double up = eval();
    *theta[i] = keep - h;
    const double dn = eval();
    *theta[i] = keep;
    const double fd = (up - dn) / (2 * h);
    const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-8});
    worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
  }
  return worst;
}

}  // namespace

int RunSelfTest(std::ostream *out, std::vector<SelfTestCheck> *results) {
  std::vector<std::pair<std::string, Check>> checks;

  checks.emplace_back("spectrogram-shape-128x300", [](SelfTestCheck *c) {
    Rng rng(11);
    for (int i = 0; i < 5; ++i) {
      dsp::Spectrogram s = dsp::ComputeSpectrogram(RandomClip(3.0, &rng));
      if (s.bins != 128 || s.frames != 300) {
        c->detail = "got " + std::to_string(s.bins) + "x" +
                    std::to_string(s.frames);
        return;
      }
    }
    c->pass = true;
  });

  checks.emplace_back("spectrogram-silence-is-zero", [](SelfTestCheck *c) {
    dsp::AudioClip clip;
    clip.samples.assign(48000, 0.0f);
    dsp::Spectrogram s = dsp::ComputeSpectrogram(clip);
    for (float v : s.values)
      if (v != 0.0f) {
        c->detail = "nonzero magnitude in silence";
        return;
      }
    c->pass = true;
  });

  checks.emplace_back("normalize-bins-stats", [](SelfTestCheck *c) {
    Rng rng(12);
    dsp::Spectrogram s =
        dsp::NormalizeBins(dsp::ComputeSpectrogram(RandomClip(3.0, &rng)));
    for (int b = 0; b < s.bins; ++b) {
      double mean = 0.0, var = 0.0;
      for (int t = 0; t < s.frames; ++t) mean += s.At(b, t);
      mean /= s.frames;
      for (int t = 0; t < s.frames; ++t)
        var += (s.At(b, t) - mean) * (s.At(b, t) - mean);
      var /= s.frames;
      if (std::abs(mean) > 1e-5 || std::abs(var - 1.0) > 1e-3) {
        c->detail = "bin " + std::to_string(b) + " mean/var off";
        return;
      }
    }
    c->pass = true;
  });

  checks.emplace_back("squash-norm-below-one", [](SelfTestCheck *c) {
    Rng rng(13);
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> s(8);
      for (auto &v : s) v = rng.NextGaussian() * std::pow(10.0, rng.NextInt(4) - 1);
      const std::vector<double> v = nn::Squash(s);
      double n2 = 0.0, dot = 0.0, sn2 = 0.0;
      for (size_t k = 0; k < v.size(); ++k) {
        n2 += v[k] * v[k];
        dot += v[k] * s[k];
        sn2 += s[k] * s[k];
      }
      if (std::sqrt(n2) >= 1.0 || (sn2 > 1e-12 && dot < 0)) {
        c->detail = "norm or direction violated";
        return;
      }
    }
    c->pass = true;
  });

  checks.emplace_back("routing-couplings-sum-to-one", [](SelfTestCheck *c) {
    Rng rng(14);
    nn::Tensor<double> u_hat({24, 6, 8});
    for (auto &v : u_hat.data) v = rng.NextGaussian() * 0.5;
    nn::RoutingState<double> st = nn::DynamicRouting(u_hat, 3);
    for (const auto &cpl : st.couplings)
      for (int64_t i = 0; i < cpl.dim(0); ++i) {
        double sum = 0.0;
        for (int64_t j = 0; j < cpl.dim(1); ++j) sum += cpl.ptr()[i * 6 + j];
        if (std::abs(sum - 1.0) > 1e-6) {
          c->detail = "coupling row sums to " + std::to_string(sum);
          return;
        }
      }
    c->pass = true;
  });

  checks.emplace_back("margin-loss-hand-values", [](SelfTestCheck *c) {
    // Target capsule at zero norm, all others zero: (0.9)^2 = 0.81.
    nn::Tensor<double> v({3, 4});
    std::vector<double> onehot = {1, 0, 0};
    const double l0 = nn::MarginLoss<double>(v, onehot);
    // One non-target at norm 0.6 contributes 0.5 * 0.25 = 0.125.
    v.ptr()[1 * 4 + 0] = 0.6;
    const double l1 = nn::MarginLoss<double>(v, onehot);
    if (std::abs(l0 - 0.81) > 1e-12 || std::abs(l1 - (0.81 + 0.125)) > 1e-12) {
      c->detail = "margin loss mismatch";
      return;
    }
    c->pass = true;
  });

  checks.emplace_back("classify-query-is-distribution", [](SelfTestCheck *c) {
    Rng rng(15);
    for (int trial = 0; trial < 100; ++trial) {
      const int K = 2 + static_cast<int>(rng.NextInt(8));
      const int M = 2 + static_cast<int>(rng.NextInt(12));
      fewshot::PrototypeSet<double> protos;
      protos.prototypes.Resize({K, M});
      for (auto &v : protos.prototypes.data) v = rng.NextGaussian();
      std::vector<double> q(static_cast<size_t>(M));
      for (auto &v : q) v = rng.NextGaussian();
      const std::vector<double> logp =
          fewshot::ClassifyQuery(q.data(), M, protos);
      double sum = 0.0;
      for (double lp : logp) sum += std::exp(lp);
      if (std::abs(sum - 1.0) > 1e-6) {
        c->detail = "probabilities sum to " + std::to_string(sum);
        return;
      }
      // Brute-force softmax over negative distances.
      double z = 0.0;
      std::vector<double> d(static_cast<size_t>(K));
      for (int k = 0; k < K; ++k) {
        double s = 0.0;
        for (int i = 0; i < M; ++i) {
          const double diff = q[static_cast<size_t>(i)] -
                              protos.prototypes.ptr()[k * M + i];
          s += diff * diff;
        }
        d[static_cast<size_t>(k)] = s;
        z += std::exp(-s);
      }
      for (int k = 0; k < K; ++k) {
        const double ref = std::log(std::exp(-d[static_cast<size_t>(k)]) / z);
        if (std::abs(ref - logp[static_cast<size_t>(k)]) > 1e-9) {
          c->detail = "log-prob disagrees with direct evaluation";
          return;
        }
      }
    }
    c->pass = true;
  });

  checks.emplace_back("chance-and-oracle-bounds", [](SelfTestCheck *c) {
    fewshot::EmbeddingPool constant;
    constant.dim = 4;
    constant.per_class.assign(10, {});
    for (auto &cls : constant.per_class)
      cls.assign(8, std::vector<float>{1.0f, 2.0f, 3.0f, 4.0f});
    fewshot::FewShotEvalConfig cfg;
    cfg.n_way = 5;
    cfg.k_shot = 1;
    cfg.n_query = 5;
    cfg.n_episodes = 200;
    cfg.seed = 99;
    const auto res = fewshot::EvaluateFewShot(constant, cfg);
    const double sigma = std::sqrt(0.2 * 0.8 / (200.0 * 25.0));
    if (std::abs(res.mean_accuracy - 0.2) > 4 * sigma + 0.02) {
      c->detail = "constant embedder accuracy " +
                  std::to_string(res.mean_accuracy);
      return;
    }
    fewshot::EmbeddingPool oracle;
    oracle.dim = 10;
    oracle.per_class.assign(10, {});
    for (int cls = 0; cls < 10; ++cls) {
      std::vector<float> v(10, 0.0f);
      v[static_cast<size_t>(cls)] = 1.0f;
      oracle.per_class[static_cast<size_t>(cls)].assign(8, v);
    }
    const auto ores = fewshot::EvaluateFewShot(oracle, cfg);
    if (ores.mean_accuracy != 1.0) {
      c->detail = "oracle embedder accuracy " +
                  std::to_string(ores.mean_accuracy);
      return;
    }
    c->pass = true;
  });

  checks.emplace_back("parameter-counts", [](SelfTestCheck *c) {
    models::ModelConfig mc;
    mc.n_classes = 50;
    mc.arch = models::Arch::kVggM;
    auto vgg = models::MakeModel<float>(mc, 1);
    const int64_t vgg_n = models::CountParameters(vgg.get());
    vgg.reset();
    mc.arch = models::Arch::kCapsnetM;
    auto caps = models::MakeModel<float>(mc, 1);
    const int64_t caps_n = models::CountParameters(caps.get());
    caps.reset();
    mc.arch = models::Arch::kResnet34;
    auto res = models::MakeModel<float>(mc, 1);
    const int64_t res_n = models::CountParameters(res.get());
    res.reset();
    std::ostringstream os;
    os << "vgg_m=" << vgg_n << " resnet34=" << res_n << " capsnet_m=" << caps_n;
    c->detail = os.str();
    c->pass = vgg_n == 8291634 && res_n == 22354162 && caps_n == 8196864;
  });

  checks.emplace_back("gradcheck-margin-loss", [](SelfTestCheck *c) {
    Rng rng(16);
    nn::Tensor<double> v({4, 5});
    for (auto &x : v.data) x = rng.NextGaussian() * 0.4;
    std::vector<double> onehot = {0, 0, 1, 0};
    nn::Tensor<double> grad;
    nn::MarginLoss<double>(v, onehot, {}, &grad);
    std::vector<double *> theta;
    std::vector<double> analytic;
    for (int64_t i = 0; i < v.numel(); ++i) {
      theta.push_back(&v.data[static_cast<size_t>(i)]);
      analytic.push_back(grad.data[static_cast<size_t>(i)]);
    }
    const double err = MaxRelGradError(
        theta, analytic, [&] { return nn::MarginLoss<double>(v, onehot); });
    c->detail = "max rel err " + std::to_string(err);
    c->pass = err < 1e-4;
  });

  checks.emplace_back("gradcheck-prototypical-loss", [](SelfTestCheck *c) {
    Rng rng(17);
    nn::Tensor<double> support({6, 3}), query({4, 3});
    for (auto &x : support.data) x = rng.NextGaussian();
    for (auto &x : query.data) x = rng.NextGaussian();
    std::vector<int> sl = {0, 0, 1, 1, 2, 2}, ql = {0, 1, 2, 0};
    nn::Tensor<double> gs, gq;
    fewshot::PrototypicalLoss<double>(support, sl, query, ql,
                                      fewshot::Distance::kSqEuclidean, &gs,
                                      &gq);
    auto eval = [&] {
      return static_cast<double>(
          fewshot::PrototypicalLoss<double>(support, sl, query, ql).loss);
    };
    std::vector<double *> theta;
    std::vector<double> analytic;
    for (int64_t i = 0; i < support.numel(); ++i) {
      theta.push_back(&support.data[static_cast<size_t>(i)]);
      analytic.push_back(gs.data[static_cast<size_t>(i)]);
    }
    for (int64_t i = 0; i < query.numel(); ++i) {
      theta.push_back(&query.data[static_cast<size_t>(i)]);
      analytic.push_back(gq.data[static_cast<size_t>(i)]);
    }
    const double err = MaxRelGradError(theta, analytic, eval);
    c->detail = "max rel err " + std::to_string(err);
    c->pass = err < 1e-4;
  });

  checks.emplace_back("gradcheck-autoencoder", [](SelfTestCheck *c) {
    Rng rng(18);
    models::ContractiveAutoencoder<double> ae("ae", 6, 4, 3);
    ae.Init(&rng);
    nn::Tensor<double> z({2, 6});
    for (auto &x : z.data) x = rng.NextGaussian();
    const double wr = 0.7, wc = 0.3;
    auto eval = [&] {
      auto o = ae.Forward(z, true);
      return wr * o.recon_loss + wc * o.contractive_penalty;
    };
    eval();
    nn::Tensor<double> gcode({2, 3});  // zero downstream gradient
    auto params = ae.Params();
    for (auto &p : params) p.grad->Zero();
    ae.Backward(gcode, wr, wc);
    std::vector<double *> theta;
    std::vector<double> analytic;
    for (auto &p : params)
      for (int64_t i = 0; i < p.value->numel(); ++i) {
        theta.push_back(&p.value->data[static_cast<size_t>(i)]);
        analytic.push_back(p.grad->data[static_cast<size_t>(i)]);
      }
    const double err = MaxRelGradError(theta, analytic, eval);
    c->detail = "max rel err " + std::to_string(err);
    c->pass = err < 1e-4;
  });

  checks.emplace_back("deterministic-step", [](SelfTestCheck *c) {
    auto run = [] {
      models::ModelConfig mc;
      mc.arch = models::Arch::kCapsnetM;
      mc.n_classes = 4;
      auto model = models::MakeModel<float>(mc, 7);
      Rng rng(21);
      nn::Tensor<float> batch({2, 1, 128, 300});
      for (auto &v : batch.data) v = static_cast<float>(rng.NextGaussian());
      nn::Adam<float> opt(1e-3f);
      auto params = model->Params();
      double last = 0.0;
      for (int i = 0; i < 2; ++i) {
        nn::Tensor<float> norms = model->ForwardLogits(batch, true);
        nn::Tensor<float> g;
        last = nn::MarginLossFromNorms<float>(norms, {0, 1}, {}, &g);
        model->ZeroGrad();
        model->BackwardLogits(g);
        opt.Step(params);
      }
      return last;
    };
    const double a = run(), b = run();
    std::ostringstream os;
    os << "losses " << a << " vs " << b;
    c->detail = os.str();
    c->pass = a == b;
  });

  int failed = 0;
  for (auto &[name, fn] : checks) {
    SelfTestCheck result;
    result.name = name;
    try {
      fn(&result);
    } catch (const std::exception &e) {
      result.pass = false;
      result.detail = std::string("exception: ") + e.what();
    }
    if (!result.pass) ++failed;
    if (out)
      *out << (result.pass ? "[ ok ] " : "[FAIL] ") << result.name
           << (result.detail.empty() ? "" : "  (" + result.detail + ")")
           << "\n";
    if (results) results->push_back(result);
  }
  if (out)
    *out << (failed == 0 ? "selftest passed" : "selftest FAILED") << " ("
         << checks.size() - static_cast<size_t>(failed) << "/" << checks.size()
         << " checks)\n";
  return failed;
}

}  // namespace harness
}  // namespace fssr
