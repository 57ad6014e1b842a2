/*
 * Copyright 2026 The FedSV Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSV_COMMON_SEEDING_H_
#define FEDSV_COMMON_SEEDING_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace fedsv {

// Counter-based seed derivation. A child seed depends only on the parent seed,
// the stream name and the index, so adding a new stream or drawing more values
// from one stream never perturbs another.
std::uint64_t DeriveSeed(std::uint64_t parent, std::string_view stream,
                         std::uint64_t index = 0);

// Two-level convenience: DeriveSeed(DeriveSeed(parent, stream, a), "", b).
std::uint64_t DeriveSeed(std::uint64_t parent, std::string_view stream,
                         std::uint64_t a, std::uint64_t b);

using Rng = std::mt19937_64;

inline Rng MakeRng(std::uint64_t seed) { return Rng(seed); }

}  // namespace fedsv

#endif  // FEDSV_COMMON_SEEDING_H_
