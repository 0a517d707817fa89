#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "dfdetect/checkpoint.hpp"
#include "dfdetect/model.hpp"
#include "dfdetect/profile.hpp"
#include "test_util.hpp"

using namespace dfdetect;

namespace {

BackboneSpec mlp_spec(std::size_t in, std::size_t embed, std::uint64_t seed = 0) {
  BackboneSpec spec;
  spec.kind = BackboneKind::toy_mlp;
  spec.input_shape = {1, 1, in};
  spec.embed_dim = embed;
  spec.seed = seed;
  return spec;
}

BackboneSpec conv_spec(std::size_t h, std::size_t w, std::size_t c, std::size_t embed, std::uint64_t seed = 0) {
  BackboneSpec spec;
  spec.kind = BackboneKind::toy_conv;
  spec.input_shape = {h, w, c};
  spec.embed_dim = embed;
  spec.seed = seed;
  return spec;
}

void zero_head(ClassifierModel& m) {
  auto& h = m.head();
  for (auto* p : {&h.dense1_weight, &h.dense1_bias, &h.dense2_weight, &h.dense2_bias})
    std::fill(p->values.begin(), p->values.end(), 0.0);
}

std::vector<std::vector<double>> random_batch(std::mt19937_64& rng, std::size_t n, std::size_t dim, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<std::vector<double>> out(n, std::vector<double>(dim));
  for (auto& row : out)
    for (auto& v : row) v = g(rng);
  return out;
}

// Fixed random projection with no trainable state: stands in for an adapter.
class ProjectionBackbone final : public Backbone {
 public:
  explicit ProjectionBackbone(const BackboneSpec& spec) : in_(spec.input_shape.size()), out_(spec.embed_dim) {}
  std::size_t input_size() const override { return in_; }
  std::size_t embed_dim() const override { return out_; }
  void embed(std::span<const double> input, std::span<double> out) const override {
    for (std::size_t j = 0; j < out_; ++j) {
      out[j] = 0.0;
      for (std::size_t i = 0; i < in_; ++i) out[j] += input[i] * (i % (j + 2) == 0 ? 1.0 : -0.5);
    }
  }
  bool backward(std::span<const double>, std::span<const double>, std::span<std::vector<double>>) const override {
    return false;
  }
  std::unique_ptr<Backbone> clone() const override { return std::make_unique<ProjectionBackbone>(*this); }

 private:
  std::size_t in_, out_;
};

}  // namespace

TEST_SUITE("build_model") {
  TEST_CASE("head parameter count follows the analytic formula") {
    const auto m = build_model(mlp_spec(8, 16), 8, 1);
    CHECK(ClassifierHead::param_count(16, 8) == 145);
    const std::vector<const Parameter*> head{&m.head().dense1_weight, &m.head().dense1_bias,
                                             &m.head().dense2_weight, &m.head().dense2_bias};
    CHECK(count_params(std::span<const Parameter* const>(head)) == 145);
    // toy_mlp backbone: in*embed weights + embed biases.
    CHECK(count_params(m) == 145 + 8 * 16 + 16);

    const auto c = build_model(conv_spec(5, 6, 3, 16), 8, 1);
    CHECK(count_params(c) == 145 + 3 * 3 * 3 * 16 + 16);
  }

  TEST_CASE("trainable-only count excludes a frozen backbone") {
    auto spec = mlp_spec(8, 16);
    spec.trainable = false;
    const auto m = build_model(spec, 8, 1);
    CHECK(count_params(m, true) == 145);
    CHECK(count_params(m, false) == 145 + 8 * 16 + 16);
    auto m2 = build_model(mlp_spec(8, 16), 8, 1);
    m2.set_backbone_trainable(false);
    CHECK(count_params(m2, true) == 145);
  }

  TEST_CASE("empty parameter list counts zero") {
    CHECK(count_params(std::span<const Parameter* const>{}) == 0);
  }

  TEST_CASE("same spec, width and seed give bit-identical parameters") {
    for (const auto& spec : {mlp_spec(6, 5, 7), conv_spec(4, 4, 2, 3, 7)}) {
      const auto a = build_model(spec, 9, 7);
      const auto b = build_model(spec, 9, 7);
      const auto pa = a.parameters(), pb = b.parameters();
      REQUIRE(pa.size() == pb.size());
      for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->name == pb[i]->name);
        CHECK(pa[i]->values == pb[i]->values);
      }
      const auto c = build_model(spec, 9, 8);
      CHECK(c.head().dense1_weight.values != a.head().dense1_weight.values);
    }
  }

  TEST_CASE("initialization: fan-in bounded weights, zero biases") {
    const auto m = build_model(mlp_spec(10, 12, 3), 20, 4);
    for (const auto* p : m.parameters()) {
      const bool bias = p->name.find("bias") != std::string::npos;
      const double bound = 1.0 / std::sqrt(static_cast<double>(p->shape.size() == 2 ? p->shape[0] : 1));
      for (double v : p->values) {
        if (bias) CHECK(v == 0.0);
        else CHECK(std::abs(v) <= bound);
      }
    }
  }

  TEST_CASE("parameters enumerate every array once in a stable order") {
    auto m = build_model(conv_spec(4, 5, 2, 3), 4, 1);
    std::vector<std::string> names;
    for (const auto* p : m.parameters()) names.push_back(p->name);
    CHECK(names == std::vector<std::string>{"backbone.conv.kernel", "backbone.conv.bias", "head.dense1.weight",
                                            "head.dense1.bias", "head.dense2.weight", "head.dense2.bias"});
    const ClassifierModel copy = m;
    std::vector<std::string> copy_names;
    for (const auto* p : copy.parameters()) copy_names.push_back(p->name);
    CHECK(copy_names == names);
  }

  TEST_CASE("errors") {
    CHECK_ERROR(build_model(mlp_spec(4, 4), 0, 1), "model.bad_dims", "");
    CHECK_ERROR(build_model(mlp_spec(4, 0), 4, 1), "model.bad_dims", "embed_dim");
    CHECK_ERROR(build_model(conv_spec(2, 5, 1, 4), 4, 1), "model.bad_dims", "toy_conv");
    BackboneSpec ext;
    ext.kind = BackboneKind::external;
    ext.external_id = "not-registered";
    CHECK_ERROR(build_model(ext, 4, 1), "model.unregistered_backbone", "not-registered");
  }
}

TEST_SUITE("forward") {
  TEST_CASE("zero head scores exactly one half") {
    std::mt19937_64 rng(1);
    auto m = build_model(mlp_spec(5, 7, 2), 6, 3);
    zero_head(m);
    for (double s : forward(m, random_batch(rng, 10, 5, 50.0))) CHECK(s == 0.5);
  }

  TEST_CASE("output bias +10 with zero weights scores sigmoid(10)") {
    auto m = build_model(mlp_spec(5, 7, 2), 6, 3);
    zero_head(m);
    m.head().dense2_bias.values[0] = 10.0;
    // 1 / (1 + e^-10) = 0.99995460213129756560...
    const std::vector<std::vector<double>> x{{1, 2, 3, 4, 5}};
    CHECK(std::abs(forward(m, x)[0] - 0.9999546021312976) <= 1e-15);
  }

  TEST_CASE("batching is a semantic no-op and forward is deterministic") {
    std::mt19937_64 rng(2);
    for (const auto& spec : {mlp_spec(12, 5, 1), conv_spec(3, 4, 1, 5, 1)}) {
      const auto m = build_model(spec, 4, 9);
      const auto batch = random_batch(rng, 6, 12);
      const auto scores = forward(m, batch);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const std::vector<std::vector<double>> one{batch[i]};
        CHECK(forward(m, one)[0] == scores[i]);
      }
      CHECK(forward(m, batch) == scores);
    }
  }

  TEST_CASE("scores stay strictly inside (0, 1) for extreme finite inputs") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      auto m = build_model(mlp_spec(4, 3, trial), 5, trial);
      m.head().dense2_bias.values[0] = trial % 2 ? 1e6 : -1e6;
      for (double s : forward(m, random_batch(rng, 5, 4, 1e150))) {
        CHECK(s > 0.0);
        CHECK(s < 1.0);
      }
    }
    CHECK(sigmoid(-1e308) > 0.0);
    CHECK(sigmoid(1e308) < 1.0);
  }

  TEST_CASE("image tensors feed toy_conv backbones") {
    auto m = build_model(conv_spec(4, 5, 3, 6), 4, 2);
    ImageTensor t{4, 5, std::vector<double>(60, 0.25)};
    const std::vector<ImageTensor> batch{t};
    const std::vector<std::vector<double>> flat{t.data};
    CHECK(forward(m, batch) == forward(m, flat));
    ImageTensor wrong{5, 4, std::vector<double>(60, 0.25)};
    const std::vector<ImageTensor> bad{wrong};
    CHECK_ERROR(forward(m, bad), "model.shape_mismatch", "");
  }

  TEST_CASE("errors") {
    const auto m = build_model(mlp_spec(3, 2), 2, 1);
    CHECK_ERROR(forward(m, std::vector<std::vector<double>>{}), "model.empty_batch", "");
    CHECK_ERROR(forward(m, std::vector<std::vector<double>>{{1, 2}}), "model.shape_mismatch", "");
    CHECK_ERROR(forward(m, std::vector<std::vector<double>>{{1, INFINITY, 2}}), "model.non_finite_input", "");
  }

  TEST_CASE("external backbones come from the registry") {
    register_external_backbone("test-projection", [](const BackboneSpec& s) {
      return std::make_unique<ProjectionBackbone>(s);
    });
    BackboneSpec spec;
    spec.kind = BackboneKind::external;
    spec.external_id = "test-projection";
    spec.input_shape = {1, 1, 6};
    spec.embed_dim = 4;
    const auto m = build_model(spec, 3, 1);
    CHECK(count_params(m) == ClassifierHead::param_count(4, 3));
    std::mt19937_64 rng(4);
    const auto batch = random_batch(rng, 3, 6);
    const auto s = forward(m, batch);
    CHECK(s.size() == 3);
    const auto loaded = deserialize_checkpoint(serialize_checkpoint(m));
    CHECK(forward(loaded.model, batch) == s);
    CHECK(unregister_external_backbone("test-projection"));
    CHECK_FALSE(has_external_backbone("test-projection"));
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("save, load, forward reproduces scores") {
    std::mt19937_64 rng(5);
    testutil::TempDir dir;
    for (const auto& spec : {mlp_spec(7, 4, 11), conv_spec(5, 3, 2, 4, 12)}) {
      const auto m = build_model(spec, 6, 13, "roundtrip");
      save_checkpoint(dir / "m.json", m, {{"val_auc", 0.875}});
      const auto loaded = load_checkpoint(dir / "m.json");
      CHECK(loaded.model.model_id() == "roundtrip");
      CHECK(loaded.model.spec() == m.spec());
      CHECK(loaded.meta.at("val_auc") == 0.875);
      const auto batch = random_batch(rng, 8, spec.input_shape.size());
      const auto a = forward(m, batch), b = forward(loaded.model, batch);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
      CHECK(a == b);
    }
  }

  TEST_CASE("param count matches an independent walk of the serialized form") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
      const auto spec = trial % 2 ? mlp_spec(1 + rng() % 9, 1 + rng() % 9, trial)
                                  : conv_spec(3 + rng() % 3, 3 + rng() % 3, 1 + rng() % 3, 1 + rng() % 5, trial);
      const auto m = build_model(spec, 1 + rng() % 12, trial);
      const auto doc = nlohmann::json::parse(serialize_checkpoint(m));
      std::size_t walked = 0;
      for (const auto& p : doc.at("parameters")) {
        std::size_t product = 1;
        for (const auto& d : p.at("shape")) product *= d.get<std::size_t>();
        CHECK(product == p.at("values").size());
        walked += p.at("values").size();
      }
      CHECK(walked == count_params(m));
      CHECK(doc.at("format_version") == 1);
    }
  }

  TEST_CASE("corrupt or mismatched checkpoints are rejected") {
    CHECK_ERROR(deserialize_checkpoint("not json"), "checkpoint.invalid", "invalid checkpoint");
    const auto m = build_model(mlp_spec(3, 2), 2, 1);
    auto doc = nlohmann::ordered_json::parse(serialize_checkpoint(m));
    doc["format_version"] = 99;
    CHECK_ERROR(deserialize_checkpoint(doc.dump()), "checkpoint.invalid", "format_version");
    doc = nlohmann::ordered_json::parse(serialize_checkpoint(m));
    doc["parameters"][2]["values"].erase(0);
    CHECK_ERROR(deserialize_checkpoint(doc.dump()), "checkpoint.invalid", "value count");
    CHECK_ERROR(load_checkpoint("/nonexistent/ckpt.json"), "checkpoint.missing_file", "");
  }
}

TEST_SUITE("profile") {
  TEST_CASE("record fields and mean bounds") {
    const auto m = build_model(mlp_spec(16, 8, 1), 8, 1, "toy");
    const std::vector<double> x(16, 0.0);
    const auto r = profile(m, x, 2, 25);
    CHECK(r.model_id == "toy");
    CHECK(r.param_count == count_params(m));
    CHECK(r.rep_ms.size() == 25);
    const auto [lo, hi] = std::minmax_element(r.rep_ms.begin(), r.rep_ms.end());
    CHECK(r.inference_ms >= *lo);
    CHECK(r.inference_ms <= *hi);
    CHECK(r.size_mb == static_cast<double>(serialize_checkpoint(m).size()) / 1048576.0);

    const auto one = profile(m, x, 0, 1);
    REQUIRE(one.rep_ms.size() == 1);
    CHECK(one.inference_ms == one.rep_ms[0]);
    CHECK_ERROR(profile(m, x, 0, 0), "profile.bad_reps", "");
  }

  TEST_CASE("table rows render the three measured columns") {
    ProfileRecord r{"DenseNet121", 8'000'000, 9.2, 33.0, {}};
    CHECK(render_profile_row(r) == "DenseNet121 & 8.0 & 9.2 & 33");
    ProfileRecord resnet{"ResNet50", 25'600'000, 10.1, 98.0, {}};
    CHECK(render_profile_row(resnet) == "ResNet50 & 25.6 & 10.1 & 98");
  }
}
