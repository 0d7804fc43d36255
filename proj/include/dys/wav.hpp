// Copyright 2026 The dysarthria-severity Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DYS_WAV_HPP
#define DYS_WAV_HPP

#include <filesystem>
#include <string>

#include "dys/corpus.hpp"

namespace dys {

/// Reads a mono RIFF/WAVE file: 16-bit PCM or 32-bit IEEE float.
AudioClip read_wav(const std::filesystem::path& path);

/// Encodes a clip as 16-bit PCM mono. Samples are clipped to [-1, 1].
std::string encode_wav(const AudioClip& clip);
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

}  // namespace dys

#endif  // DYS_WAV_HPP
