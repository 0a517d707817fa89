#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dfdetect {

struct ScoreEntry {
  std::string sample_id;
  double score = 0.0;

  friend bool operator==(const ScoreEntry&, const ScoreEntry&) = default;
};

/// Per-sample probability-of-fake from one model. Entry order is preserved;
/// ids are unique and every score is finite and inside [0, 1].
class ScoreSet {
 public:
  ScoreSet() = default;
  ScoreSet(std::string model_id, std::vector<ScoreEntry> entries);

  const std::string& model_id() const { return model_id_; }
  const std::vector<ScoreEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::optional<double> find(std::string_view sample_id) const;

 private:
  std::string model_id_;
  std::vector<ScoreEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct FusedScores {
  std::vector<std::string> member_ids;
  ScoreSet scores;  // model_id is the member ids joined with '+'
};

/// Unweighted mean of member scores per sample, in the first member's order.
/// Members must cover identical sample sets.
FusedScores fuse(std::span<const ScoreSet> members);

/// 1 (fake) iff score >= threshold; threshold must lie in [0, 1].
std::vector<int> classify(std::span<const double> scores, double threshold);
std::map<std::string, int> classify(const ScoreSet& scores, double threshold);

// Score files: optional `# key=value` metadata lines (model_id, member_ids),
// then the header `sample_id,score`, then one `id,score` row per sample.
// Scores are written in shortest round-trip form.

void write_score_file(std::ostream& out, const ScoreSet& scores,
                      std::span<const std::string> member_ids = {});
void write_score_file(const std::filesystem::path& path, const ScoreSet& scores,
                      std::span<const std::string> member_ids = {});

/// model_id comes from the metadata line, else the file stem.
ScoreSet read_score_file(const std::filesystem::path& path,
                         std::vector<std::string>* member_ids = nullptr);

}  // namespace dfdetect
