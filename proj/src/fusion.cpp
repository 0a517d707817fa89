#include "dfdetect/fusion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dfdetect/error.hpp"

namespace dfdetect {

ScoreSet::ScoreSet(std::string model_id, std::vector<ScoreEntry> entries)
    : model_id_(std::move(model_id)), entries_(std::move(entries)) {
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!std::isfinite(e.score) || e.score < 0.0 || e.score > 1.0)
      fail(ErrorKind::data, "scores.out_of_range",
           "score for " + e.sample_id + " in " + model_id_ + " is outside [0, 1]");
    if (!index_.emplace(e.sample_id, i).second)
      fail(ErrorKind::data, "scores.duplicate_id", "duplicate sample_id in " + model_id_ + ": " + e.sample_id);
  }
}

std::optional<double> ScoreSet::find(std::string_view sample_id) const {
  auto it = index_.find(std::string(sample_id));
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].score;
}

namespace {

std::string join(std::span<const std::string> items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

void check_coverage(const ScoreSet& first, const ScoreSet& other) {
  std::set<std::string> diff;
  for (const auto& e : first.entries())
    if (!other.find(e.sample_id)) diff.insert(e.sample_id);
  for (const auto& e : other.entries())
    if (!first.find(e.sample_id)) diff.insert(e.sample_id);
  if (diff.empty()) return;
  const std::vector<std::string> ids(diff.begin(), diff.end());
  fail(ErrorKind::data, "fusion.coverage_mismatch",
       "sample_id sets differ between '" + first.model_id() + "' and '" + other.model_id() +
           "': {" + join(ids, ", ") + "}");
}

}  // namespace

FusedScores fuse(std::span<const ScoreSet> members) {
  if (members.empty()) fail(ErrorKind::usage, "fusion.no_members", "fuse needs at least one member");
  for (std::size_t m = 1; m < members.size(); ++m) check_coverage(members[0], members[m]);

  FusedScores out;
  for (const auto& m : members) out.member_ids.push_back(m.model_id());

  std::vector<ScoreEntry> fused;
  fused.reserve(members[0].size());
  std::vector<double> values(members.size());
  for (const auto& e : members[0].entries()) {
    for (std::size_t m = 0; m < members.size(); ++m) values[m] = *members[m].find(e.sample_id);
    // Summing in sorted order makes the result independent of member order.
    // The extended-precision sum rounds once at the end, so e.g. the mean of
    // 0.9, 0.8, 0.7 is 0.8; the clamp keeps rounding inside the members' range.
    std::sort(values.begin(), values.end());
    long double sum = 0.0L;
    for (double v : values) sum += v;
    const double mean = std::clamp(static_cast<double>(sum / static_cast<long double>(values.size())),
                                   values.front(), values.back());
    fused.push_back(ScoreEntry{e.sample_id, mean});
  }
  out.scores = ScoreSet(join(out.member_ids, "+"), std::move(fused));
  return out;
}

std::vector<int> classify(std::span<const double> scores, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    fail(ErrorKind::usage, "classify.bad_threshold", "threshold must lie in [0, 1]");
  std::vector<int> labels;
  labels.reserve(scores.size());
  for (double s : scores) labels.push_back(s >= threshold ? 1 : 0);
  return labels;
}

std::map<std::string, int> classify(const ScoreSet& scores, double threshold) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& e : scores.entries()) values.push_back(e.score);
  const auto labels = classify(values, threshold);
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.emplace(scores.entries()[i].sample_id, labels[i]);
  return out;
}

void write_score_file(std::ostream& out, const ScoreSet& scores, std::span<const std::string> member_ids) {
  out << "# model_id=" << scores.model_id() << '\n';
  if (!member_ids.empty()) out << "# member_ids=" << join(member_ids, ",") << '\n';
  out << "sample_id,score\n";
  char buf[64];
  for (const auto& e : scores.entries()) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, e.score);
    out << e.sample_id << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf)) << '\n';
  }
}

void write_score_file(const std::filesystem::path& path, const ScoreSet& scores,
                      std::span<const std::string> member_ids) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::runtime, "io.write_failed", "cannot write score file: " + path.string());
  write_score_file(out, scores, member_ids);
  if (!out) fail(ErrorKind::runtime, "io.write_failed", "error writing score file: " + path.string());
}

ScoreSet read_score_file(const std::filesystem::path& path, std::vector<std::string>* member_ids) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::data, "scores.missing_file", "cannot open score file: " + path.string());

  const auto bad = [&](std::size_t line_no, const std::string& what) {
    fail(ErrorKind::data, "scores.malformed",
         path.string() + ": line " + std::to_string(line_no) + ": " + what);
  };

  std::string model_id = path.stem().string();
  std::vector<std::string> members;
  std::vector<ScoreEntry> entries;
  bool header_seen = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = line.substr(line.find_first_not_of("# ") == std::string::npos
                                        ? line.size()
                                        : line.find_first_not_of("# "));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const auto key = body.substr(0, eq);
      const auto value = body.substr(eq + 1);
      if (key == "model_id") {
        model_id = value;
      } else if (key == "member_ids") {
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) members.push_back(item);
      }
      continue;
    }
    if (!header_seen) {
      if (line != "sample_id,score") bad(line_no, "expected header 'sample_id,score'");
      header_seen = true;
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos || comma == 0) bad(line_no, "expected 'sample_id,score'");
    double score = 0.0;
    const char* first = line.data() + comma + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, score);
    if (ec != std::errc() || ptr != last) bad(line_no, "score is not a number");
    entries.push_back(ScoreEntry{line.substr(0, comma), score});
  }
  if (!header_seen) fail(ErrorKind::data, "scores.malformed", path.string() + ": missing header");
  if (member_ids) *member_ids = std::move(members);
  return ScoreSet(std::move(model_id), std::move(entries));
}

}  // namespace dfdetect
