#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dfdetect/image.hpp"

namespace dfdetect {

enum class BackboneKind { toy_mlp, toy_conv, external };

std::string_view to_string(BackboneKind kind);
BackboneKind parse_backbone_kind(std::string_view token);

struct BackboneSpec {
  BackboneKind kind = BackboneKind::toy_mlp;
  InputShape input_shape;
  std::size_t embed_dim = 16;
  std::uint64_t seed = 0;    // toy kinds only
  std::string external_id;   // external kind only
  bool trainable = true;     // false: head-only fine-tuning
  Normalization normalization;  // applied when inputs are decoded images

  friend bool operator==(const BackboneSpec&, const BackboneSpec&) = default;
};

/// Named real-valued array, row-major.
struct Parameter {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  bool trainable = true;

  std::size_t size() const { return values.size(); }
};

/// One gradient array per entry of ClassifierModel::parameters(), same order.
using Gradients = std::vector<std::vector<double>>;

/// Feature extractor mapping a flat input of `input_size()` values to an
/// `embed_dim()` vector.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual std::size_t input_size() const = 0;
  virtual std::size_t embed_dim() const = 0;
  virtual void embed(std::span<const double> input, std::span<double> out) const = 0;

  /// Accumulates d(embedding)/d(theta) . d_embed into `grads`, one array per
  /// parameter. Backbones that cannot differentiate return false and are
  /// always treated as frozen.
  virtual bool backward(std::span<const double> input, std::span<const double> d_embed,
                        std::span<std::vector<double>> grads) const = 0;

  virtual std::unique_ptr<Backbone> clone() const = 0;

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }

 protected:
  std::vector<Parameter> params_;
};

using BackboneFactory = std::function<std::unique_ptr<Backbone>(const BackboneSpec&)>;

/// Registry for adapters around externally provided backbones, keyed by
/// BackboneSpec::external_id. Safe to call from multiple threads.
void register_external_backbone(const std::string& external_id, BackboneFactory factory);
bool unregister_external_backbone(const std::string& external_id);
bool has_external_backbone(const std::string& external_id);

/// Realizes the backbone described by `spec` (registry lookup for external kinds).
std::unique_ptr<Backbone> make_backbone(const BackboneSpec& spec);

/// dense(embed -> hidden) -> ReLU -> dense(hidden -> 1) -> sigmoid.
struct ClassifierHead {
  Parameter dense1_weight;  // {embed_dim, hidden}
  Parameter dense1_bias;    // {hidden}
  Parameter dense2_weight;  // {hidden, 1}
  Parameter dense2_bias;    // {1}

  std::size_t embed_dim() const { return dense1_weight.shape.at(0); }
  std::size_t hidden() const { return dense1_bias.size(); }
  static std::size_t param_count(std::size_t embed_dim, std::size_t hidden) {
    return embed_dim * hidden + hidden + hidden + 1;
  }
};

/// Logistic function; finite inputs map strictly inside (0, 1).
double sigmoid(double z);

class ClassifierModel {
 public:
  ClassifierModel(std::string model_id, BackboneSpec spec, std::unique_ptr<Backbone> backbone,
                  ClassifierHead head);
  ClassifierModel(const ClassifierModel& other);
  ClassifierModel& operator=(const ClassifierModel& other);
  ClassifierModel(ClassifierModel&&) noexcept = default;
  ClassifierModel& operator=(ClassifierModel&&) noexcept = default;

  const std::string& model_id() const { return model_id_; }
  void set_model_id(std::string id) { model_id_ = std::move(id); }
  const BackboneSpec& spec() const { return spec_; }
  const Backbone& backbone() const { return *backbone_; }
  const ClassifierHead& head() const { return head_; }
  ClassifierHead& head() { return head_; }
  std::size_t input_size() const { return backbone_->input_size(); }

  /// Backbone arrays first (backbone order), then dense1 weight/bias, dense2 weight/bias.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  Gradients zero_gradients() const;

  /// Toggles backbone trainability (full vs head-only fine-tuning).
  void set_backbone_trainable(bool trainable);

  double logit(std::span<const double> input) const;
  double score(std::span<const double> input) const { return sigmoid(logit(input)); }

  /// grads += dlogit * d(logit)/d(theta); frozen arrays are left untouched.
  void backprop(std::span<const double> input, double dlogit, Gradients& grads) const;

 private:
  void check_input(std::span<const double> input) const;

  std::string model_id_;
  BackboneSpec spec_;
  std::unique_ptr<Backbone> backbone_;
  ClassifierHead head_;
};

/// Toy kinds are fully determined by the spec; the head is initialized from
/// `seed` with U(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and zero biases.
ClassifierModel build_model(const BackboneSpec& spec, std::size_t head_hidden, std::uint64_t seed,
                            std::string model_id = "model");

std::vector<double> forward(const ClassifierModel& model, std::span<const std::vector<double>> batch);
std::vector<double> forward(const ClassifierModel& model, std::span<const ImageTensor> batch);

std::size_t count_params(std::span<const Parameter* const> params, bool trainable_only = false);
std::size_t count_params(const ClassifierModel& model, bool trainable_only = false);

}  // namespace dfdetect
