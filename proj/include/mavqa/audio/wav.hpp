// Copyright 2026 The mavqa Authors.
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "mavqa/audio/clip.hpp"

namespace mavqa::audio {

class WavError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class WavEncoding { kPcm16, kFloat32 };

/// Reads RIFF/WAVE with PCM 16-bit or IEEE float 32-bit samples. Multi-channel
/// input is downmixed by averaging the channels.
AudioClip read_wav(const std::filesystem::path& path);
AudioClip decode_wav(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding enc = WavEncoding::kFloat32);
void write_wav(const std::filesystem::path& path, const AudioClip& clip, WavEncoding enc = WavEncoding::kFloat32);

}  // namespace mavqa::audio
