// tests/unit/test_models.cc
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

#include <cmath>
#include <fstream>
#include <map>

#include "doctest.h"
#include "fssr/models/autoencoder.h"
#include "fssr/models/checkpoint.h"
#include "fssr/models/factory.h"
#include "testutil.h"

using namespace fssr;

namespace {

nn::Tensor<float> RandomInput(int n, uint64_t seed, int frames = 300) {
  Rng rng(seed);
  nn::Tensor<float> x({n, 1, 128, frames});
  for (auto &v : x.data) v = static_cast<float>(rng.NextGaussian());
  return x;
}

// Independent per-layer arithmetic for the table-derived counts.
int64_t VggCountByHand(int n_classes) {
  auto conv = [](int64_t kh, int64_t kw, int64_t cin, int64_t cout) {
    return kh * kw * cin * cout + cout;  // weights + bias
  };
  auto bn = [](int64_t c) { return 2 * c; };
  int64_t total = 0;
  total += conv(7, 7, 1, 96) + bn(96);
  total += conv(5, 5, 96, 256) + bn(256);
  total += conv(3, 3, 256, 384) + bn(384);
  total += conv(3, 3, 384, 256) + bn(256);
  total += conv(3, 3, 256, 256) + bn(256);
  total += conv(1, 1, 256, 4096) + bn(4096);  // fc6 sees a 1-high map
  total += conv(1, 1, 4096, 1024) + bn(1024);
  total += conv(1, 1, 1024, n_classes);
  return total;
}

int64_t ResnetCountByHand(int n_classes) {
  auto conv = [](int64_t kh, int64_t kw, int64_t cin, int64_t cout) {
    return kh * kw * cin * cout;  // no bias in block convs
  };
  auto bn = [](int64_t c) { return 2 * c; };
  int64_t total = conv(7, 7, 1, 64) + bn(64);
  const int counts[4] = {3, 4, 6, 3};
  const int chans[4] = {64, 128, 256, 512};
  int in_ch = 64;
  for (int s = 0; s < 4; ++s) {
    for (int b = 0; b < counts[s]; ++b) {
      total += conv(3, 3, in_ch, chans[s]) + bn(chans[s]);
      total += conv(3, 3, chans[s], chans[s]) + bn(chans[s]);
      if (in_ch != chans[s]) total += conv(1, 1, in_ch, chans[s]) + bn(chans[s]);
      in_ch = chans[s];
    }
  }
  total += conv(4, 1, 512, 512) + 512 + bn(512);  // fc1 with bias
  total += 512 * n_classes + n_classes;           // fc2
  return total;
}

int64_t CapsnetCountByHand(int n_classes) {
  int64_t total = 9 * 9 * 1 * 256 + 256;    // conv1
  total += 9 * 9 * 256 * 256 + 256;         // primary capsules
  total += static_cast<int64_t>(n_classes) * 448 * 16 * 8;  // routing
  return total;
}

}  // namespace

TEST_CASE("parameter counts at 50 classes hit the published table exactly") {
  models::ModelConfig mc;
  mc.n_classes = 50;

  mc.arch = models::Arch::kVggM;
  auto vgg = models::MakeModel<float>(mc, 1);
  CHECK(models::CountParameters(vgg.get()) == 8291634);
  CHECK(models::CountParameters(vgg.get()) == VggCountByHand(50));
  vgg.reset();

  mc.arch = models::Arch::kResnet34;
  auto res = models::MakeModel<float>(mc, 1);
  CHECK(models::CountParameters(res.get()) == 22354162);
  CHECK(models::CountParameters(res.get()) == ResnetCountByHand(50));
  res.reset();

  mc.arch = models::Arch::kCapsnetM;
  auto caps = models::MakeModel<float>(mc, 1);
  CHECK(models::CountParameters(caps.get()) == 8196864);
  CHECK(models::CountParameters(caps.get()) == CapsnetCountByHand(50));
}

TEST_CASE("parameter counts at 200 and 1251 classes follow the head width") {
  models::ModelConfig mc;
  mc.n_classes = 200;
  mc.arch = models::Arch::kVggM;
  auto vgg200 = models::MakeModel<float>(mc, 1);
  CHECK(models::CountParameters(vgg200.get()) == 8445384);
  vgg200.reset();

  mc.arch = models::Arch::kResnet34;
  auto res200 = models::MakeModel<float>(mc, 1);
  CHECK(models::CountParameters(res200.get()) == 22431112);
  res200.reset();

  mc.arch = models::Arch::kCapsnetM;
  auto caps200 = models::MakeModel<float>(mc, 1);
  CHECK(models::CountParameters(caps200.get()) == 16798464);
  caps200.reset();

  mc.arch = models::Arch::kVggM;
  mc.n_classes = 1251;
  auto vgg_full = models::MakeModel<float>(mc, 1);
  CHECK(models::CountParameters(vgg_full.get()) == VggCountByHand(1251));
}

TEST_CASE("counts are config-pure and drop by exactly a frozen layer") {
  models::ModelConfig mc;
  mc.arch = models::Arch::kCapsnetM;
  mc.n_classes = 10;
  auto a = models::MakeModel<float>(mc, 7);
  auto b = models::MakeModel<float>(mc, 8);
  CHECK(models::CountParameters(a.get()) == models::CountParameters(b.get()));

  // Removing one named tensor from the registry = freezing that layer.
  auto params = a->Params();
  int64_t total = 0, conv1_w = 0;
  for (const auto &p : params) {
    total += p.value->numel();
    if (p.name == "conv1.weight") conv1_w = p.value->numel();
  }
  CHECK(conv1_w == 9 * 9 * 256);
  std::vector<nn::ParamRef<float>> frozen;
  for (const auto &p : params)
    if (p.name != "conv1.weight") frozen.push_back(p);
  CHECK(nn::CountParameters(frozen) == total - conv1_w);
}

TEST_CASE("vgg_m forward shapes and finiteness") {
  models::ModelConfig mc;
  mc.arch = models::Arch::kVggM;
  mc.n_classes = 7;
  auto model = models::MakeModel<float>(mc, 3);
  nn::Tensor<float> x = RandomInput(2, 5);
  nn::Tensor<float> logits = model->ForwardLogits(x, false);
  CHECK(logits.shape == std::vector<int64_t>{2, 7});
  CHECK(logits.AllFinite());
  auto emb = model->ForwardEmbed(x, false);
  CHECK(emb.embeddings.shape == std::vector<int64_t>{2, 1024});
  // Unit-norm embeddings by default.
  for (int n = 0; n < 2; ++n) {
    double s = 0.0;
    for (int i = 0; i < 1024; ++i) {
      const double v = emb.embeddings.ptr()[n * 1024 + i];
      s += v * v;
    }
    CHECK(std::sqrt(s) == doctest::Approx(1.0).epsilon(1e-4));
  }
  // A longer clip still works; time is pooled away.
  nn::Tensor<float> x400 = RandomInput(1, 6, 400);
  CHECK(model->ForwardLogits(x400, false).shape ==
        std::vector<int64_t>{1, 7});
  // Wrong bin count is rejected.
  nn::Tensor<float> bad({1, 1, 64, 300});
  CHECK_THROWS_AS(model->ForwardLogits(bad, false), Error);
}

TEST_CASE("resnet34 forward shapes and residual identity") {
  models::ModelConfig mc;
  mc.arch = models::Arch::kResnet34;
  mc.n_classes = 5;
  auto model = models::MakeModel<float>(mc, 11);
  nn::Tensor<float> x = RandomInput(1, 13);
  nn::Tensor<float> logits = model->ForwardLogits(x, false);
  CHECK(logits.shape == std::vector<int64_t>{1, 5});
  CHECK(logits.AllFinite());
  auto emb = model->ForwardEmbed(x, false);
  CHECK(emb.embeddings.shape == std::vector<int64_t>{1, 512});

  // Zeroing the second conv of a stride-1 block makes it an identity in
  // eval mode (fresh batch-norm running stats, zero beta).
  auto *resnet = dynamic_cast<models::Resnet34<float> *>(model.get());
  REQUIRE(resnet != nullptr);
  models::BasicBlock<float> *blk = resnet->block(1);  // layer1.1, stride 1
  blk->conv2()->weight()->Zero();
  Rng rng(3);
  nn::Tensor<float> h({2, 64, 8, 10});
  for (auto &v : h.data) v = std::abs(static_cast<float>(rng.NextGaussian()));
  nn::Tensor<float> y = blk->Forward(h, /*train=*/false);
  for (int64_t i = 0; i < h.numel(); ++i)
    CHECK(y.data[static_cast<size_t>(i)] ==
          doctest::Approx(h.data[static_cast<size_t>(i)]).epsilon(1e-5));
}

TEST_CASE("capsnet_m class vectors stay inside the unit ball") {
  models::ModelConfig mc;
  mc.arch = models::Arch::kCapsnetM;
  mc.n_classes = 6;
  auto model = models::MakeModel<float>(mc, 17);
  nn::Tensor<float> x = RandomInput(2, 19);
  nn::Tensor<float> norms = model->ForwardLogits(x, false);
  CHECK(norms.shape == std::vector<int64_t>{2, 6});
  for (float v : norms.data) {
    CHECK(v >= 0.0f);
    CHECK(v < 1.0f);
  }
  auto *caps = dynamic_cast<models::CapsnetM<float> *>(model.get());
  REQUIRE(caps != nullptr);
  CHECK(caps->class_vectors().shape == std::vector<int64_t>{2, 6, 16});
  CHECK(caps->core()->n_caps() == 448);
  // Routing couplings of the recorded states sum to one.
  for (const auto &st : caps->core()->routing_states())
    for (const auto &c : st.couplings)
      for (int64_t i = 0; i < c.dim(0); ++i) {
        double sum = 0.0;
        for (int64_t j = 0; j < c.dim(1); ++j) sum += c.ptr()[i * c.dim(1) + j];
        CHECK(std::abs(sum - 1.0) < 1e-6);
      }
}

TEST_CASE("capsnet_ma embedding carries autoencoder losses") {
  models::ModelConfig mc;
  mc.arch = models::Arch::kCapsnetMa;
  mc.n_classes = 6;
  mc.autoencoder.code_dim = 32;
  mc.autoencoder.hidden_dim = 48;
  auto model = models::MakeModel<float>(mc, 23);
  nn::Tensor<float> x = RandomInput(2, 29);
  auto emb = model->ForwardEmbed(x, true);
  CHECK(emb.embeddings.shape == std::vector<int64_t>{2, 32});
  CHECK(emb.recon_loss >= 0.0f);
  CHECK(emb.contractive_penalty >= 0.0f);
  CHECK(emb.aux_loss ==
        doctest::Approx(1.0 * emb.recon_loss + 1e-4 * emb.contractive_penalty)
            .epsilon(1e-5));
}

TEST_CASE("contractive penalty of a linear encoder is ||W2 W1||_F^2") {
  Rng rng(31);
  models::ContractiveAutoencoder<double> ae(
      "ae", 5, 4, 3, models::ContractiveAutoencoder<double>::Activation::kIdentity);
  ae.Init(&rng);
  nn::Tensor<double> z({3, 5});
  for (auto &v : z.data) v = rng.NextGaussian();
  auto out = ae.Forward(z, true);

  // W2 (3x4) * W1 (4x5) by hand.
  auto params = ae.Params();
  std::map<std::string, nn::Tensor<double> *> by_name;
  for (auto &p : params) by_name[p.name] = p.value;
  const auto &w1 = *by_name.at("ae.enc1.weight");
  const auto &w2 = *by_name.at("ae.enc2.weight");
  double frob = 0.0;
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 5; ++k) {
      double j = 0.0;
      for (int i = 0; i < 4; ++i) j += w2.ptr()[m * 4 + i] * w1.ptr()[i * 5 + k];
      frob += j * j;
    }
  CHECK(out.contractive_penalty == doctest::Approx(frob).epsilon(1e-10));
}

TEST_CASE("autoencoder gradients match finite differences (6-d toy)") {
  Rng rng(37);
  models::ContractiveAutoencoder<double> ae("ae", 6, 4, 3);
  ae.Init(&rng);
  nn::Tensor<double> z({2, 6});
  for (auto &v : z.data) v = rng.NextGaussian();
  nn::Tensor<double> gcode({2, 3});
  for (auto &v : gcode.data) v = rng.NextGaussian() * 0.1;
  const double wr = 0.8, wc = 0.4;

  auto eval = [&] {
    auto o = ae.Forward(z, true);
    double acc = wr * o.recon_loss + wc * o.contractive_penalty;
    for (int64_t i = 0; i < o.code.numel(); ++i)
      acc += o.code.data[static_cast<size_t>(i)] *
             gcode.data[static_cast<size_t>(i)];
    return acc;
  };
  eval();
  auto params = ae.Params();
  for (auto &p : params) p.grad->Zero();
  nn::Tensor<double> gz = ae.Backward(gcode, wr, wc);

  std::vector<double *> theta;
  std::vector<double> analytic;
  for (auto &p : params)
    for (int64_t i = 0; i < p.value->numel(); ++i) {
      theta.push_back(&p.value->data[static_cast<size_t>(i)]);
      analytic.push_back(p.grad->data[static_cast<size_t>(i)]);
    }
  for (int64_t i = 0; i < z.numel(); ++i) {
    theta.push_back(&z.data[static_cast<size_t>(i)]);
    analytic.push_back(gz.data[static_cast<size_t>(i)]);
  }
  CHECK(testutil::MaxRelGradError(theta, analytic, eval) < 1e-4);
}

TEST_CASE("capsnet_m end-to-end gradient against finite differences") {
  // Tiny capsule net (8x12 input, small channels) so central differences
  // over a parameter subsample stay cheap.
  models::ModelConfig mc;
  mc.arch = models::Arch::kCapsnetM;
  mc.n_classes = 3;
  mc.input_bins = 20;
  mc.input_frames = 26;
  mc.capsule.conv_channels = 4;
  mc.capsule.primary_channels = 2;
  mc.capsule.primary_capsule_dim = 4;
  mc.capsule.class_capsule_dim = 5;
  mc.capsule.conv_kernel = 5;
  mc.capsule.primary_kernel = 3;
  mc.capsule.conv_stride = 2;
  mc.capsule.primary_stride = 2;
  auto model = models::MakeModel<double>(mc, 41);

  Rng rng(43);
  nn::Tensor<double> x({1, 1, 20, 26});
  for (auto &v : x.data) v = rng.NextGaussian();
  std::vector<int> target = {1};

  auto eval = [&] {
    nn::Tensor<double> norms = model->ForwardLogits(x, true);
    return static_cast<double>(
        nn::MarginLossFromNorms<double>(norms, target, {}, nullptr));
  };
  nn::Tensor<double> norms = model->ForwardLogits(x, true);
  nn::Tensor<double> gnorms;
  nn::MarginLossFromNorms<double>(norms, target, {}, &gnorms);
  model->ZeroGrad();
  model->BackwardLogits(gnorms);

  auto params = model->Params();
  std::vector<double *> theta;
  std::vector<double> analytic;
  int64_t stride = 37;
  for (auto &p : params)
    for (int64_t i = 0; i < p.value->numel(); i += stride) {
      theta.push_back(&p.value->data[static_cast<size_t>(i)]);
      analytic.push_back(p.grad->data[static_cast<size_t>(i)]);
    }
  CHECK(testutil::MaxRelGradError(theta, analytic, eval, 1e-5) < 1e-4);
}

TEST_CASE("checkpoint round trip preserves weights and config") {
  testutil::TempDir tmp("fssr_ckpt");
  models::ModelConfig mc;
  mc.arch = models::Arch::kCapsnetMa;
  mc.n_classes = 4;
  mc.autoencoder.code_dim = 16;
  mc.autoencoder.hidden_dim = 24;
  auto model = models::MakeModel<float>(mc, 51);
  models::SaveCheckpoint(tmp.file("m.ckpt"), model.get(),
                         R"({"seed": 51, "step": 12})");
  std::string meta;
  auto back = models::LoadCheckpoint(tmp.file("m.ckpt"), &meta);
  CHECK(back->config().arch == models::Arch::kCapsnetMa);
  CHECK(back->config().n_classes == 4);
  CHECK(meta.find("\"step\":12") != std::string::npos);

  auto pa = model->Params();
  auto pb = back->Params();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].name == pb[i].name);
    CHECK(pa[i].value->data == pb[i].value->data);
  }

  // Same input, same outputs.
  nn::Tensor<float> x = RandomInput(1, 53);
  auto ea = model->ForwardEmbed(x, false);
  auto eb = back->ForwardEmbed(x, false);
  CHECK(ea.embeddings.data == eb.embeddings.data);
}

TEST_CASE("replace head keeps the backbone bitwise identical") {
  models::ModelConfig mc;
  mc.arch = models::Arch::kResnet34;
  mc.n_classes = 6;
  auto model = models::MakeModel<float>(mc, 61);
  std::map<std::string, std::vector<float>> before;
  for (auto &p : model->Params()) before[p.name] = p.value->data;

  model->ReplaceHead(6, 99);  // same width, fresh head
  for (auto &p : model->Params()) {
    if (p.name.rfind("fc2", 0) == 0) continue;
    CHECK(before.at(p.name) == p.value->data);
  }
  CHECK(model->config().n_classes == 6);

  model->ReplaceHead(11, 100);
  auto params = model->Params();
  for (auto &p : params) {
    if (p.name.rfind("fc2", 0) == 0) continue;
    CHECK(before.at(p.name) == p.value->data);
  }
  CHECK(model->config().n_classes == 11);
}

TEST_CASE("loading a truncated checkpoint is rejected") {
  testutil::TempDir tmp("fssr_badckpt");
  models::ModelConfig mc;
  mc.arch = models::Arch::kCapsnetM;
  mc.n_classes = 3;
  auto model = models::MakeModel<float>(mc, 1);
  models::SaveCheckpoint(tmp.file("m.ckpt"), model.get(), "");
  // Chop the file.
  {
    std::ifstream in(tmp.file("m.ckpt"), std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    bytes.resize(bytes.size() / 2);
    std::ofstream out(tmp.file("cut.ckpt"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  try {
    models::LoadCheckpoint(tmp.file("cut.ckpt"), nullptr);
    FAIL("expected CheckpointIncompatible");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kCheckpointIncompatible);
  }
}

TEST_CASE("model config json round trip") {
  models::ModelConfig mc;
  mc.arch = models::Arch::kCapsnetMa;
  mc.n_classes = 42;
  mc.capsule.routing_iters = 5;
  mc.autoencoder.contractive_weight = 3e-5;
  const models::ModelConfig back =
      models::ModelConfigFromJson(models::ModelConfigToJson(mc));
  CHECK(back.arch == mc.arch);
  CHECK(back.n_classes == 42);
  CHECK(back.capsule.routing_iters == 5);
  CHECK(back.autoencoder.contractive_weight == doctest::Approx(3e-5));
}
