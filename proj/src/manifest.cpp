#include "dfdetect/manifest.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "dfdetect/error.hpp"

namespace dfdetect {

std::string_view to_string(Label label) {
  return label == Label::fake ? "fake" : "real";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Label parse_label(std::string_view token) {
  if (token == "real") return Label::real;
  if (token == "fake") return Label::fake;
  fail(ErrorKind::data, "manifest.unknown_label", "unknown label: " + std::string(token));
}

Split parse_split(std::string_view token) {
  if (token == "train") return Split::train;
  if (token == "val") return Split::val;
  if (token == "test") return Split::test;
  fail(ErrorKind::data, "manifest.unknown_split", "unknown split: " + std::string(token));
}

DatasetManifest::DatasetManifest(std::vector<SampleRecord> records) : records_(std::move(records)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!index_.emplace(r.sample_id, i).second)
      fail(ErrorKind::data, "manifest.duplicate_id", "duplicate sample_id: " + r.sample_id);
    ++counts_[static_cast<int>(r.split)][static_cast<int>(r.label)];
  }
}

std::size_t DatasetManifest::count(Split split, Label label) const {
  return counts_[static_cast<int>(split)][static_cast<int>(label)];
}

std::size_t DatasetManifest::count(Split split) const {
  return count(split, Label::real) + count(split, Label::fake);
}

std::vector<const SampleRecord*> DatasetManifest::split(Split split) const {
  std::vector<const SampleRecord*> out;
  out.reserve(count(split));
  for (const auto& r : records_)
    if (r.split == split) out.push_back(&r);
  return out;
}

const SampleRecord* DatasetManifest::find(std::string_view sample_id) const {
  auto it = index_.find(std::string(sample_id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::string encode_hex_array(const std::vector<double>& values) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(values.size() * 16);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int shift = 60; shift >= 0; shift -= 4) out.push_back(kDigits[(bits >> shift) & 0xf]);
  }
  return out;
}

std::vector<double> decode_hex_array(std::string_view hex) {
  if (hex.size() % 16 != 0)
    fail(ErrorKind::data, "manifest.bad_inline", "inline array length is not a multiple of 16 hex digits");
  std::vector<double> out;
  out.reserve(hex.size() / 16);
  for (std::size_t pos = 0; pos < hex.size(); pos += 16) {
    std::uint64_t bits = 0;
    const char* first = hex.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + 16, bits, 16);
    if (ec != std::errc() || ptr != first + 16)
      fail(ErrorKind::data, "manifest.bad_inline", "inline array contains non-hex digits");
    out.push_back(std::bit_cast<double>(bits));
  }
  return out;
}

namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  fail(ErrorKind::data, "manifest.malformed", "line " + std::to_string(line_no) + ": " + what);
}

SampleRecord parse_record(const std::string& line, std::size_t line_no) {
  std::istringstream fields(line);
  std::optional<std::string> id, label, split, path, inline_hex;
  std::string token;
  while (fields >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) malformed(line_no, "expected key=value, got '" + token + "'");
    const std::string key = token.substr(0, eq);
    std::string value = token.substr(eq + 1);
    std::optional<std::string>* slot = nullptr;
    if (key == "sample_id") slot = &id;
    else if (key == "label") slot = &label;
    else if (key == "split") slot = &split;
    else if (key == "path") slot = &path;
    else if (key == "inline") slot = &inline_hex;
    else malformed(line_no, "unknown field '" + key + "'");
    if (slot->has_value()) malformed(line_no, "repeated field '" + key + "'");
    *slot = std::move(value);
  }
  if (!id || id->empty()) malformed(line_no, "missing sample_id");
  if (!label) malformed(line_no, "missing label");
  if (!split) malformed(line_no, "missing split");
  if (path.has_value() == inline_hex.has_value()) malformed(line_no, "need exactly one of path or inline");

  SampleRecord record;
  record.sample_id = *id;
  try {
    record.label = parse_label(*label);
    record.split = parse_split(*split);
    if (path) record.source = std::filesystem::path(*path);
    else record.source = decode_hex_array(*inline_hex);
  } catch (const Error& e) {
    fail(e.kind(), e.code(), "line " + std::to_string(line_no) + ": " + e.what());
  }
  return record;
}

}  // namespace

DatasetManifest parse_manifest(std::istream& in) {
  std::vector<SampleRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    records.push_back(parse_record(line, line_no));
  }
  if (records.empty()) fail(ErrorKind::data, "manifest.empty", "empty manifest");
  return DatasetManifest(std::move(records));
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::data, "manifest.missing_file", "cannot open manifest: " + path.string());
  auto manifest = parse_manifest(in);
  manifest.set_base_dir(path.parent_path());
  return manifest;
}

void write_manifest(std::ostream& out, const DatasetManifest& manifest) {
  for (const auto& r : manifest.records()) {
    out << "sample_id=" << r.sample_id << " label=" << to_string(r.label)
        << " split=" << to_string(r.split);
    if (const auto* p = std::get_if<std::filesystem::path>(&r.source))
      out << " path=" << p->generic_string();
    else
      out << " inline=" << encode_hex_array(std::get<std::vector<double>>(r.source));
    out << '\n';
  }
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::runtime, "io.write_failed", "cannot write manifest: " + path.string());
  write_manifest(out, manifest);
  if (!out) fail(ErrorKind::runtime, "io.write_failed", "error writing manifest: " + path.string());
}

double class_weight(std::size_t n_real, std::size_t n_fake) {
  if (n_real == 0 || n_fake == 0)
    fail(ErrorKind::data, "data.single_class",
         "class weight undefined: n_real=" + std::to_string(n_real) +
             " n_fake=" + std::to_string(n_fake));
  return static_cast<double>(n_fake) / static_cast<double>(n_real);
}

}  // namespace dfdetect
