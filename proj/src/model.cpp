#include "dfdetect/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "dfdetect/error.hpp"
#include "dfdetect/random.hpp"

namespace dfdetect {

std::string_view to_string(BackboneKind kind) {
  switch (kind) {
    case BackboneKind::toy_mlp: return "toy_mlp";
    case BackboneKind::toy_conv: return "toy_conv";
    case BackboneKind::external: return "external";
  }
  return "?";
}

BackboneKind parse_backbone_kind(std::string_view token) {
  if (token == "toy_mlp") return BackboneKind::toy_mlp;
  if (token == "toy_conv") return BackboneKind::toy_conv;
  if (token == "external") return BackboneKind::external;
  fail(ErrorKind::usage, "model.unknown_backbone", "unknown backbone kind: " + std::string(token));
}

double sigmoid(double z) {
  double p;
  if (z >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    p = e / (1.0 + e);
  }
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

namespace {

void init_uniform(Parameter& p, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : p.values) v = dist(rng);
}

Parameter make_param(std::string name, std::vector<std::size_t> shape, bool trainable) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return Parameter{std::move(name), std::move(shape), std::vector<double>(n, 0.0), trainable};
}

// Flattened input -> dense -> tanh.
class ToyMlpBackbone final : public Backbone {
 public:
  explicit ToyMlpBackbone(const BackboneSpec& spec)
      : in_(spec.input_shape.size()), out_(spec.embed_dim) {
    params_.push_back(make_param("backbone.dense.weight", {in_, out_}, spec.trainable));
    params_.push_back(make_param("backbone.dense.bias", {out_}, spec.trainable));
    Rng rng(derive_seed(spec.seed, 100));
    init_uniform(params_[0], in_, rng);
  }

  std::size_t input_size() const override { return in_; }
  std::size_t embed_dim() const override { return out_; }

  void embed(std::span<const double> input, std::span<double> out) const override {
    const auto& w = params_[0].values;
    const auto& b = params_[1].values;
    for (std::size_t j = 0; j < out_; ++j) out[j] = b[j];
    for (std::size_t i = 0; i < in_; ++i) {
      const double x = input[i];
      const double* row = w.data() + i * out_;
      for (std::size_t j = 0; j < out_; ++j) out[j] += x * row[j];
    }
    for (auto& v : out) v = std::tanh(v);
  }

  bool backward(std::span<const double> input, std::span<const double> d_embed,
                std::span<std::vector<double>> grads) const override {
    std::vector<double> e(out_);
    embed(input, e);
    std::vector<double> d_pre(out_);
    for (std::size_t j = 0; j < out_; ++j) d_pre[j] = d_embed[j] * (1.0 - e[j] * e[j]);
    auto& gw = grads[0];
    auto& gb = grads[1];
    for (std::size_t i = 0; i < in_; ++i) {
      const double x = input[i];
      double* row = gw.data() + i * out_;
      for (std::size_t j = 0; j < out_; ++j) row[j] += x * d_pre[j];
    }
    for (std::size_t j = 0; j < out_; ++j) gb[j] += d_pre[j];
    return true;
  }

  std::unique_ptr<Backbone> clone() const override { return std::make_unique<ToyMlpBackbone>(*this); }

 private:
  std::size_t in_, out_;
};

// 3x3 valid convolution -> ReLU -> mean over spatial positions (tokens).
class ToyConvBackbone final : public Backbone {
 public:
  explicit ToyConvBackbone(const BackboneSpec& spec)
      : h_(spec.input_shape.height), w_(spec.input_shape.width), c_(spec.input_shape.channels),
        f_(spec.embed_dim) {
    if (h_ < 3 || w_ < 3)
      fail(ErrorKind::usage, "model.bad_dims", "toy_conv needs input height and width >= 3");
    params_.push_back(make_param("backbone.conv.kernel", {3, 3, c_, f_}, spec.trainable));
    params_.push_back(make_param("backbone.conv.bias", {f_}, spec.trainable));
    Rng rng(derive_seed(spec.seed, 200));
    init_uniform(params_[0], 9 * c_, rng);
  }

  std::size_t input_size() const override { return h_ * w_ * c_; }
  std::size_t embed_dim() const override { return f_; }

  void embed(std::span<const double> input, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> pre(f_);
    for_each_position(input, pre, [&](std::size_t, std::size_t) {
      for (std::size_t f = 0; f < f_; ++f) out[f] += std::max(pre[f], 0.0);
    });
    const double inv = 1.0 / static_cast<double>(positions());
    for (auto& v : out) v *= inv;
  }

  bool backward(std::span<const double> input, std::span<const double> d_embed,
                std::span<std::vector<double>> grads) const override {
    const double inv = 1.0 / static_cast<double>(positions());
    auto& gk = grads[0];
    auto& gb = grads[1];
    std::vector<double> pre(f_);
    for_each_position(input, pre, [&](std::size_t y, std::size_t x) {
      for (std::size_t f = 0; f < f_; ++f) {
        if (pre[f] <= 0.0) continue;
        const double d = d_embed[f] * inv;
        gb[f] += d;
        for (std::size_t ky = 0; ky < 3; ++ky)
          for (std::size_t kx = 0; kx < 3; ++kx)
            for (std::size_t c = 0; c < c_; ++c)
              gk[((ky * 3 + kx) * c_ + c) * f_ + f] += d * input[((y + ky) * w_ + (x + kx)) * c_ + c];
      }
    });
    return true;
  }

  std::unique_ptr<Backbone> clone() const override { return std::make_unique<ToyConvBackbone>(*this); }

 private:
  std::size_t positions() const { return (h_ - 2) * (w_ - 2); }

  // Computes pre-activations for every output position and hands them to `fn`.
  template <typename Fn>
  void for_each_position(std::span<const double> input, std::vector<double>& pre, Fn&& fn) const {
    const auto& k = params_[0].values;
    const auto& b = params_[1].values;
    for (std::size_t y = 0; y + 2 < h_; ++y) {
      for (std::size_t x = 0; x + 2 < w_; ++x) {
        std::copy(b.begin(), b.end(), pre.begin());
        for (std::size_t ky = 0; ky < 3; ++ky)
          for (std::size_t kx = 0; kx < 3; ++kx)
            for (std::size_t c = 0; c < c_; ++c) {
              const double v = input[((y + ky) * w_ + (x + kx)) * c_ + c];
              const double* kr = k.data() + ((ky * 3 + kx) * c_ + c) * f_;
              for (std::size_t f = 0; f < f_; ++f) pre[f] += v * kr[f];
            }
        fn(y, x);
      }
    }
  }

  std::size_t h_, w_, c_, f_;
};

struct Registry {
  std::mutex mutex;
  std::map<std::string, BackboneFactory> factories;
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_external_backbone(const std::string& external_id, BackboneFactory factory) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.factories[external_id] = std::move(factory);
}

bool unregister_external_backbone(const std::string& external_id) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  return r.factories.erase(external_id) > 0;
}

bool has_external_backbone(const std::string& external_id) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  return r.factories.count(external_id) > 0;
}

std::unique_ptr<Backbone> make_backbone(const BackboneSpec& spec) {
  if (spec.embed_dim == 0) fail(ErrorKind::usage, "model.bad_dims", "embed_dim must be >= 1");
  if (spec.input_shape.size() == 0) fail(ErrorKind::usage, "model.bad_dims", "input shape has zero size");
  std::unique_ptr<Backbone> backbone;
  switch (spec.kind) {
    case BackboneKind::toy_mlp: backbone = std::make_unique<ToyMlpBackbone>(spec); break;
    case BackboneKind::toy_conv: backbone = std::make_unique<ToyConvBackbone>(spec); break;
    case BackboneKind::external: {
      BackboneFactory factory;
      {
        auto& r = registry();
        std::lock_guard lock(r.mutex);
        auto it = r.factories.find(spec.external_id);
        if (it == r.factories.end())
          fail(ErrorKind::usage, "model.unregistered_backbone",
               "external backbone not registered: " + spec.external_id);
        factory = it->second;
      }
      backbone = factory(spec);
      if (!backbone) fail(ErrorKind::runtime, "model.backbone_factory", "backbone factory returned null");
      if (backbone->embed_dim() != spec.embed_dim || backbone->input_size() != spec.input_shape.size())
        fail(ErrorKind::usage, "model.bad_dims", "external backbone does not match its spec dims");
      for (auto& p : backbone->parameters()) p.trainable = p.trainable && spec.trainable;
      break;
    }
  }
  return backbone;
}

ClassifierModel::ClassifierModel(std::string model_id, BackboneSpec spec,
                                 std::unique_ptr<Backbone> backbone, ClassifierHead head)
    : model_id_(std::move(model_id)), spec_(std::move(spec)), backbone_(std::move(backbone)),
      head_(std::move(head)) {
  if (!backbone_) fail(ErrorKind::usage, "model.no_backbone", "model requires a backbone");
  if (head_.embed_dim() != backbone_->embed_dim())
    fail(ErrorKind::usage, "model.bad_dims", "head input width does not match backbone embed_dim");
}

ClassifierModel::ClassifierModel(const ClassifierModel& other)
    : model_id_(other.model_id_), spec_(other.spec_), backbone_(other.backbone_->clone()),
      head_(other.head_) {}

ClassifierModel& ClassifierModel::operator=(const ClassifierModel& other) {
  if (this != &other) *this = ClassifierModel(other);
  return *this;
}

std::vector<Parameter*> ClassifierModel::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : backbone_->parameters()) out.push_back(&p);
  out.push_back(&head_.dense1_weight);
  out.push_back(&head_.dense1_bias);
  out.push_back(&head_.dense2_weight);
  out.push_back(&head_.dense2_bias);
  return out;
}

std::vector<const Parameter*> ClassifierModel::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& p : backbone_->parameters()) out.push_back(&p);
  out.push_back(&head_.dense1_weight);
  out.push_back(&head_.dense1_bias);
  out.push_back(&head_.dense2_weight);
  out.push_back(&head_.dense2_bias);
  return out;
}

Gradients ClassifierModel::zero_gradients() const {
  Gradients g;
  for (const auto* p : parameters()) g.emplace_back(p->size(), 0.0);
  return g;
}

void ClassifierModel::set_backbone_trainable(bool trainable) {
  spec_.trainable = trainable;
  for (auto& p : backbone_->parameters()) p.trainable = trainable;
}

void ClassifierModel::check_input(std::span<const double> input) const {
  if (input.size() != backbone_->input_size())
    fail(ErrorKind::data, "model.shape_mismatch",
         "input has " + std::to_string(input.size()) + " values, model expects " +
             std::to_string(backbone_->input_size()));
  for (double v : input)
    if (!std::isfinite(v)) fail(ErrorKind::data, "model.non_finite_input", "input contains non-finite values");
}

double ClassifierModel::logit(std::span<const double> input) const {
  check_input(input);
  const std::size_t embed = head_.embed_dim();
  const std::size_t hidden = head_.hidden();
  std::vector<double> e(embed);
  backbone_->embed(input, e);

  const auto& w1 = head_.dense1_weight.values;
  std::vector<double> h(head_.dense1_bias.values);
  for (std::size_t i = 0; i < embed; ++i) {
    const double* row = w1.data() + i * hidden;
    for (std::size_t j = 0; j < hidden; ++j) h[j] += e[i] * row[j];
  }
  double z = head_.dense2_bias.values[0];
  for (std::size_t j = 0; j < hidden; ++j) z += std::max(h[j], 0.0) * head_.dense2_weight.values[j];
  return z;
}

void ClassifierModel::backprop(std::span<const double> input, double dlogit, Gradients& grads) const {
  check_input(input);
  const std::size_t embed = head_.embed_dim();
  const std::size_t hidden = head_.hidden();
  const std::size_t nb = backbone_->parameters().size();
  std::vector<double> e(embed);
  backbone_->embed(input, e);

  const auto& w1 = head_.dense1_weight.values;
  const auto& w2 = head_.dense2_weight.values;
  std::vector<double> h(head_.dense1_bias.values);
  for (std::size_t i = 0; i < embed; ++i) {
    const double* row = w1.data() + i * hidden;
    for (std::size_t j = 0; j < hidden; ++j) h[j] += e[i] * row[j];
  }

  // d logit / d pre-activation of the hidden layer
  std::vector<double> d_h(hidden);
  for (std::size_t j = 0; j < hidden; ++j) d_h[j] = h[j] > 0.0 ? dlogit * w2[j] : 0.0;

  if (head_.dense2_weight.trainable)
    for (std::size_t j = 0; j < hidden; ++j) grads[nb + 2][j] += dlogit * std::max(h[j], 0.0);
  if (head_.dense2_bias.trainable) grads[nb + 3][0] += dlogit;
  if (head_.dense1_weight.trainable) {
    auto& g = grads[nb];
    for (std::size_t i = 0; i < embed; ++i) {
      double* row = g.data() + i * hidden;
      for (std::size_t j = 0; j < hidden; ++j) row[j] += e[i] * d_h[j];
    }
  }
  if (head_.dense1_bias.trainable)
    for (std::size_t j = 0; j < hidden; ++j) grads[nb + 1][j] += d_h[j];

  const auto& bparams = backbone_->parameters();
  const bool any_trainable =
      std::any_of(bparams.begin(), bparams.end(), [](const Parameter& p) { return p.trainable; });
  if (!any_trainable || nb == 0) return;

  std::vector<double> d_e(embed, 0.0);
  for (std::size_t i = 0; i < embed; ++i) {
    const double* row = w1.data() + i * hidden;
    for (std::size_t j = 0; j < hidden; ++j) d_e[i] += row[j] * d_h[j];
  }
  // Frozen arrays inside a partially trainable backbone are reset afterwards.
  Gradients scratch;
  scratch.reserve(nb);
  for (const auto& p : bparams) scratch.emplace_back(p.size(), 0.0);
  if (!backbone_->backward(input, d_e, scratch)) return;
  for (std::size_t k = 0; k < nb; ++k) {
    if (!bparams[k].trainable) continue;
    for (std::size_t i = 0; i < scratch[k].size(); ++i) grads[k][i] += scratch[k][i];
  }
}

ClassifierModel build_model(const BackboneSpec& spec, std::size_t head_hidden, std::uint64_t seed,
                            std::string model_id) {
  if (head_hidden == 0) fail(ErrorKind::usage, "model.bad_dims", "head_hidden must be >= 1");
  auto backbone = make_backbone(spec);
  const std::size_t embed = backbone->embed_dim();

  ClassifierHead head;
  head.dense1_weight = make_param("head.dense1.weight", {embed, head_hidden}, true);
  head.dense1_bias = make_param("head.dense1.bias", {head_hidden}, true);
  head.dense2_weight = make_param("head.dense2.weight", {head_hidden, 1}, true);
  head.dense2_bias = make_param("head.dense2.bias", {1}, true);
  Rng rng(derive_seed(seed, 300));
  init_uniform(head.dense1_weight, embed, rng);
  init_uniform(head.dense2_weight, head_hidden, rng);

  return ClassifierModel(std::move(model_id), spec, std::move(backbone), std::move(head));
}

std::vector<double> forward(const ClassifierModel& model, std::span<const std::vector<double>> batch) {
  if (batch.empty()) fail(ErrorKind::data, "model.empty_batch", "forward needs a nonempty batch");
  std::vector<double> scores;
  scores.reserve(batch.size());
  for (const auto& x : batch) scores.push_back(model.score(x));
  return scores;
}

std::vector<double> forward(const ClassifierModel& model, std::span<const ImageTensor> batch) {
  if (batch.empty()) fail(ErrorKind::data, "model.empty_batch", "forward needs a nonempty batch");
  const auto& shape = model.spec().input_shape;
  std::vector<double> scores;
  scores.reserve(batch.size());
  for (const auto& img : batch) {
    if (img.height != shape.height || img.width != shape.width || shape.channels != ImageTensor::channels)
      fail(ErrorKind::data, "model.shape_mismatch", "image tensor shape does not match model input shape");
    scores.push_back(model.score(img.data));
  }
  return scores;
}

std::size_t count_params(std::span<const Parameter* const> params, bool trainable_only) {
  std::size_t n = 0;
  for (const auto* p : params)
    if (!trainable_only || p->trainable) n += p->size();
  return n;
}

std::size_t count_params(const ClassifierModel& model, bool trainable_only) {
  const auto params = model.parameters();
  return count_params(std::span<const Parameter* const>(params), trainable_only);
}

}  // namespace dfdetect
