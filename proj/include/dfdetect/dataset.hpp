#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dfdetect/image.hpp"
#include "dfdetect/manifest.hpp"

namespace dfdetect {

/// Model-ready view of one manifest split: flat inputs and 0/1 labels, in
/// manifest order.
struct LabeledSet {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> inputs;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t count(Label label) const;
};

/// Inline sources must already hold shape.size() values; path sources are
/// decoded and preprocessed to (height, width) and must use three channels.
std::vector<double> load_features(const SampleRecord& record, const InputShape& shape,
                                  const Normalization& norm,
                                  const std::filesystem::path& base_dir = {});

LabeledSet materialize(const DatasetManifest& manifest, Split split, const InputShape& shape,
                       const Normalization& norm = {});

}  // namespace dfdetect
