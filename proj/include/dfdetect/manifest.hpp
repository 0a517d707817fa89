#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace dfdetect {

/// Fake is the positive class everywhere (scores are probability-of-fake).
enum class Label : int { real = 0, fake = 1 };
enum class Split : int { train = 0, val = 1, test = 2 };

std::string_view to_string(Label label);
std::string_view to_string(Split split);
Label parse_label(std::string_view token);  // throws Error(data)
Split parse_split(std::string_view token);  // throws Error(data)

/// Pixel source: either an image file on disk or an inline feature vector.
using SampleSource = std::variant<std::filesystem::path, std::vector<double>>;

struct SampleRecord {
  std::string sample_id;
  SampleSource source;
  Label label = Label::real;
  Split split = Split::train;

  bool is_inline() const { return std::holds_alternative<std::vector<double>>(source); }

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

/// Immutable, validated record collection with per-(split, label) tallies.
class DatasetManifest {
 public:
  DatasetManifest() = default;
  /// Throws Error(data, "manifest.duplicate_id") on repeated sample ids.
  explicit DatasetManifest(std::vector<SampleRecord> records);

  const std::vector<SampleRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::size_t count(Split split, Label label) const;
  std::size_t count(Split split) const;

  /// Records of one split, in manifest order.
  std::vector<const SampleRecord*> split(Split split) const;
  const SampleRecord* find(std::string_view sample_id) const;

  /// Directory relative `path` sources resolve against (set by load_manifest).
  const std::filesystem::path& base_dir() const { return base_dir_; }
  void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }

  friend bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
    return a.records_ == b.records_;
  }

 private:
  std::vector<SampleRecord> records_;
  std::array<std::array<std::size_t, 2>, 3> counts_{};
  std::unordered_map<std::string, std::size_t> index_;
  std::filesystem::path base_dir_;
};

// Manifest text format: one record per line, whitespace-separated key=value
// fields `sample_id`, `label` (real|fake), `split` (train|val|test) and exactly
// one of `path` or `inline`. Inline arrays are the big-endian IEEE-754 bit
// patterns of float64 values, 16 hex digits per value. Lines starting with
// `#` and blank lines are ignored. Values may not contain whitespace.

DatasetManifest parse_manifest(std::istream& in);
DatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, const DatasetManifest& manifest);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

std::string encode_hex_array(const std::vector<double>& values);
std::vector<double> decode_hex_array(std::string_view hex);

/// Multiplier applied to real-class (minority) loss terms: n_fake / n_real.
double class_weight(std::size_t n_real, std::size_t n_fake);

}  // namespace dfdetect
