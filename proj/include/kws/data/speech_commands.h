// Importer for the Speech Commands archive layout: one directory per
// phrase containing WAV files, plus testing_list.txt / validation_list.txt
// naming the held-out files as "<phrase>/<file>.wav". The speaker id is the
// filename's "<speaker>_nohash_<n>" prefix.
#pragma once

#include <filesystem>

#include "kws/data/manifest.h"

namespace kws::data {

enum class SpeechCommandsSplit { train, validation, test };

SpeechCommandsSplit parse_split(const std::string& s);

Manifest import_speech_commands(const std::filesystem::path& root, SpeechCommandsSplit split);

}  // namespace kws::data
