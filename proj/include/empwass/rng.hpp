/* Copyright 2026 The empwass Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef EMPWASS_RNG_HPP_
#define EMPWASS_RNG_HPP_

#include <cstdint>
#include <random>

namespace empwass {

// Independent random stream addressed by (seed, stream, substream). Streams
// are derived through std::seed_seq, so no generator state is ever shared.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream = 0,
         std::uint64_t substream = 0);

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1).
  double uniform();
  // Uniform on (0, 1].
  double uniform_open_low();
  // Standard normal via Box-Muller; the spare deviate is cached.
  double normal();
  // Uniformly distributed sign.
  double sign() { return (engine_() >> 63) != 0 ? -1.0 : 1.0; }
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace empwass

#endif  // EMPWASS_RNG_HPP_
