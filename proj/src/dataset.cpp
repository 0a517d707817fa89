#include "dfdetect/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "dfdetect/error.hpp"

namespace dfdetect {

std::size_t LabeledSet::count(Label label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), static_cast<int>(label)));
}

std::vector<double> load_features(const SampleRecord& record, const InputShape& shape,
                                  const Normalization& norm, const std::filesystem::path& base_dir) {
  if (const auto* values = std::get_if<std::vector<double>>(&record.source)) {
    if (values->size() != shape.size())
      fail(ErrorKind::data, "data.shape_mismatch",
           "sample " + record.sample_id + " has " + std::to_string(values->size()) +
               " inline values, expected " + std::to_string(shape.size()));
    if (!std::all_of(values->begin(), values->end(), [](double v) { return std::isfinite(v); }))
      fail(ErrorKind::data, "data.non_finite", "sample " + record.sample_id + " has non-finite values");
    return *values;
  }
  if (shape.channels != ImageTensor::channels)
    fail(ErrorKind::data, "data.shape_mismatch",
         "image sources need a 3-channel input shape (sample " + record.sample_id + ")");
  auto path = std::get<std::filesystem::path>(record.source);
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  auto tensor = preprocess(decode_image(path), TargetShape{shape.height, shape.width}, norm);
  return std::move(tensor.data);
}

LabeledSet materialize(const DatasetManifest& manifest, Split split, const InputShape& shape,
                       const Normalization& norm) {
  LabeledSet set;
  for (const auto* r : manifest.split(split)) {
    set.ids.push_back(r->sample_id);
    set.inputs.push_back(load_features(*r, shape, norm, manifest.base_dir()));
    set.labels.push_back(static_cast<int>(r->label));
  }
  return set;
}

}  // namespace dfdetect
