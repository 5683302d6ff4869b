#include "kws/data/manifest.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "kws/common/errors.h"
#include "kws/common/rng.h"

namespace kws::data {

using nlohmann::json;

const char* source_name(Source s) { return s == Source::real ? "real" : "tts"; }

Source parse_source(const std::string& s) {
  if (s == "real") return Source::real;
  if (s == "tts") return Source::tts;
  throw DataError("unknown source '" + s + "' (expected real|tts)");
}

std::string normalize_phrase(const std::string& phrase) {
  size_t b = 0, e = phrase.size();
  while (b < e && std::isspace(static_cast<unsigned char>(phrase[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(phrase[e - 1]))) --e;
  std::string out = phrase.substr(b, e - b);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

void Manifest::add(UtteranceRecord record) {
  record.phrase = normalize_phrase(record.phrase);
  if (record.phrase.empty()) throw DataError("record with empty phrase: " + record.path);
  if (record.path.empty()) throw DataError("record with empty path");
  if (!paths_.insert(record.path).second)
    throw DuplicatePathError("duplicate path: " + record.path);
  const size_t id = records_.size();
  auto [it, inserted] = phrase_index_.try_emplace(record.phrase);
  if (inserted) phrase_order_.push_back(record.phrase);
  it->second.push_back(id);
  records_.push_back(std::move(record));
}

const std::vector<size_t>& Manifest::records_of(const std::string& phrase) const {
  static const std::vector<size_t> kEmpty;
  const auto it = phrase_index_.find(phrase);
  return it == phrase_index_.end() ? kEmpty : it->second;
}

std::filesystem::path Manifest::resolve_path(const UtteranceRecord& record) const {
  std::filesystem::path p(record.path);
  if (p.is_absolute() || base_dir_.empty()) return p;
  return base_dir_ / p;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path.string());
  Manifest m;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("manifest JSON error: ") + e.what(), line_no);
    }
    try {
      UtteranceRecord r;
      r.path = j.at("path").get<std::string>();
      r.phrase = j.at("phrase").get<std::string>();
      r.source = parse_source(j.at("source").get<std::string>());
      r.speaker_id = j.at("speaker_id").get<std::string>();
      if (j.contains("prosody_id") && !j.at("prosody_id").is_null())
        r.prosody_id = j.at("prosody_id").get<std::string>();
      m.add(std::move(r));
    } catch (const DuplicatePathError&) {
      throw;
    } catch (const json::exception& e) {
      throw ParseError(std::string("manifest record error: ") + e.what(), line_no);
    } catch (const DataError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  m.set_base_dir(path.parent_path());
  return m;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open manifest for writing: " + path.string());
  for (const UtteranceRecord& r : manifest.records()) {
    json j;
    j["path"] = r.path;
    j["phrase"] = r.phrase;
    j["source"] = source_name(r.source);
    j["speaker_id"] = r.speaker_id;
    if (r.prosody_id) j["prosody_id"] = *r.prosody_id;
    os << j.dump() << '\n';
  }
  if (!os) throw IoError("short write to manifest: " + path.string());
}

Manifest sample_subset(const Manifest& manifest, size_t n_phrases, size_t per_phrase,
                       uint64_t seed) {
  const auto& phrases = manifest.phrases();
  if (phrases.size() < n_phrases)
    throw InsufficientPhrasesError("requested " + std::to_string(n_phrases) + " phrases, have " +
                                   std::to_string(phrases.size()));
  Rng rng(seed);
  const auto phrase_pick = rng.sample_without_replacement(phrases.size(), n_phrases);
  Manifest out;
  out.set_base_dir(manifest.base_dir());
  for (size_t pi : phrase_pick) {
    const std::string& phrase = phrases[pi];
    const auto& ids = manifest.records_of(phrase);
    if (ids.size() < per_phrase)
      throw InsufficientUtterancesError("phrase '" + phrase + "' has " +
                                        std::to_string(ids.size()) + " utterances, need " +
                                        std::to_string(per_phrase));
    const auto utt_pick = rng.sample_without_replacement(ids.size(), per_phrase);
    for (size_t ui : utt_pick) out.add(manifest.record(ids[ui]));
  }
  return out;
}

Manifest sample_utterances(const Manifest& manifest, size_t count, uint64_t seed) {
  if (manifest.size() < count)
    throw InsufficientUtterancesError("requested " + std::to_string(count) + " utterances, have " +
                                      std::to_string(manifest.size()));
  Rng rng(seed);
  const auto pick = rng.sample_without_replacement(manifest.size(), count);
  Manifest out;
  out.set_base_dir(manifest.base_dir());
  for (size_t id : pick) out.add(manifest.record(id));
  return out;
}

Manifest mix(const Manifest& real, const Manifest& synthetic) {
  Manifest out;
  const bool same_base = real.empty() || synthetic.empty() ||
                         real.base_dir() == synthetic.base_dir();
  if (same_base)
    out.set_base_dir(real.empty() ? synthetic.base_dir() : real.base_dir());
  // With differing base dirs, relative paths are rewritten so every record
  // still resolves from the mixed manifest.
  const auto add_from = [&](const Manifest& src) {
    for (const UtteranceRecord& r : src.records()) {
      if (same_base) {
        out.add(r);
      } else {
        UtteranceRecord abs = r;
        abs.path = src.resolve_path(r).string();
        out.add(std::move(abs));
      }
    }
  };
  add_from(real);
  add_from(synthetic);
  return out;
}

}  // namespace kws::data
