// Copyright 2026 The bamt Authors.
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

#ifndef BAMT_HASH_H_
#define BAMT_HASH_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace bamt {

// 64-bit FNV-1a. Used for content and config fingerprints, not security.
class Fnv1a {
 public:
  void Update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
  }
  void Update(const void *data, std::size_t size) {
    Update(std::string_view(static_cast<const char *>(data), size));
  }
  std::uint64_t Digest() const { return state_; }
  std::string HexDigest() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string HashHex(std::string_view bytes);

}  // namespace bamt

#endif  // BAMT_HASH_H_
