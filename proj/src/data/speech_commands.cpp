#include "kws/data/speech_commands.h"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "kws/common/errors.h"

namespace kws::data {

namespace {

std::unordered_set<std::string> read_list(const std::filesystem::path& path) {
  std::unordered_set<std::string> out;
  std::ifstream is(path);
  if (!is) return out;  // older snapshots may lack validation_list.txt
  std::string line;
  while (std::getline(is, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

std::string speaker_from_filename(const std::string& stem) {
  const size_t pos = stem.find("_nohash");
  return pos == std::string::npos ? stem : stem.substr(0, pos);
}

}  // namespace

SpeechCommandsSplit parse_split(const std::string& s) {
  if (s == "train" || s == "training") return SpeechCommandsSplit::train;
  if (s == "validation") return SpeechCommandsSplit::validation;
  if (s == "test" || s == "testing") return SpeechCommandsSplit::test;
  throw UsageError("unknown split '" + s + "' (expected train|validation|test)");
}

Manifest import_speech_commands(const std::filesystem::path& root, SpeechCommandsSplit split) {
  if (!std::filesystem::is_directory(root))
    throw IoError("not a directory: " + root.string());

  const auto testing = read_list(root / "testing_list.txt");
  const auto validation = read_list(root / "validation_list.txt");
  if (split == SpeechCommandsSplit::test && testing.empty())
    throw DataError("missing or empty testing_list.txt under " + root.string());

  // Walk phrase directories in sorted order so import is deterministic.
  std::vector<std::filesystem::path> phrase_dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (name == "_background_noise_" || name.starts_with('.')) continue;
    phrase_dirs.push_back(entry.path());
  }
  std::sort(phrase_dirs.begin(), phrase_dirs.end());

  Manifest manifest;
  manifest.set_base_dir(root);
  for (const auto& dir : phrase_dirs) {
    const std::string phrase = dir.filename().string();
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".wav") continue;
      files.push_back(entry.path().filename().string());
    }
    std::sort(files.begin(), files.end());
    for (const std::string& file : files) {
      const std::string rel = phrase + "/" + file;
      const bool in_test = testing.contains(rel);
      const bool in_val = validation.contains(rel);
      const bool keep = (split == SpeechCommandsSplit::test && in_test) ||
                        (split == SpeechCommandsSplit::validation && in_val) ||
                        (split == SpeechCommandsSplit::train && !in_test && !in_val);
      if (!keep) continue;
      UtteranceRecord rec;
      rec.path = rel;
      rec.phrase = phrase;
      rec.source = Source::real;
      rec.speaker_id = speaker_from_filename(std::filesystem::path(file).stem().string());
      manifest.add(std::move(rec));
    }
  }
  if (manifest.empty()) throw DataError("no records imported from " + root.string());
  return manifest;
}

}  // namespace kws::data
