// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <random>

namespace risbeam {

using Rng = std::mt19937_64;

// Named sub-streams derived from a master seed. Each component draws from its
// own stream so it can be re-seeded without perturbing the others.
enum class Stream : std::uint64_t {
    scene = 0x5343454e45ULL,
    channel = 0x4348414e4eULL,
    detector = 0x4445544543ULL,
    init = 0x494e4954ULL,
    shuffle = 0x5348554646ULL,
    split = 0x53504c4954ULL,
};

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0,
                                    std::uint64_t sub = 0)
{
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ static_cast<std::uint64_t>(stream));
    h = mix64(h ^ index);
    return mix64(h ^ sub);
}

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0, std::uint64_t sub = 0)
{
    return Rng(derive_seed(seed, stream, index, sub));
}

} // namespace risbeam
