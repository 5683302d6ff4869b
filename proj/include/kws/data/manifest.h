// Manifest-based dataset layer. A manifest is line-delimited JSON, one
// utterance record per line with fields: path, phrase, source ("real" or
// "tts"), speaker_id and optional prosody_id.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace kws::data {

enum class Source { real, tts };

const char* source_name(Source s);
Source parse_source(const std::string& s);

struct UtteranceRecord {
  std::string path;
  std::string phrase;  // lowercased and trimmed on construction
  Source source = Source::real;
  std::string speaker_id;
  std::optional<std::string> prosody_id;

  bool operator==(const UtteranceRecord&) const = default;
};

// Normalizes a phrase: trim ASCII whitespace, lowercase.
std::string normalize_phrase(const std::string& phrase);

class Manifest {
 public:
  Manifest() = default;

  // Throws DuplicatePathError if the path is already present.
  void add(UtteranceRecord record);

  const std::vector<UtteranceRecord>& records() const { return records_; }
  const UtteranceRecord& record(size_t id) const { return records_[id]; }
  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Phrase -> record ids, ordered by first appearance.
  const std::vector<std::string>& phrases() const { return phrase_order_; }
  const std::vector<size_t>& records_of(const std::string& phrase) const;
  size_t num_phrases() const { return phrase_order_.size(); }

  // Directory the manifest was loaded from; relative record paths resolve
  // against it. Empty for in-memory manifests.
  const std::filesystem::path& base_dir() const { return base_dir_; }
  void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }
  std::filesystem::path resolve_path(const UtteranceRecord& record) const;

  bool operator==(const Manifest& other) const { return records_ == other.records_; }

 private:
  std::vector<UtteranceRecord> records_;
  std::vector<std::string> phrase_order_;
  std::map<std::string, std::vector<size_t>> phrase_index_;
  std::unordered_set<std::string> paths_;
  std::filesystem::path base_dir_;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// n_phrases distinct phrases uniformly without replacement, then per_phrase
// utterances per chosen phrase, deterministic for a given seed.
Manifest sample_subset(const Manifest& manifest, size_t n_phrases, size_t per_phrase,
                       uint64_t seed);

// Flat utterance sample, ignoring phrase structure (used for real-data
// budget scenarios).
Manifest sample_utterances(const Manifest& manifest, size_t count, uint64_t seed);

// Concatenation; path sets must be disjoint.
Manifest mix(const Manifest& real, const Manifest& synthetic);

}  // namespace kws::data
