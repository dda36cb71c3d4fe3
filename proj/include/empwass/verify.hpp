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

#ifndef EMPWASS_VERIFY_HPP_
#define EMPWASS_VERIFY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace empwass::verify {

// Faults that can be injected to check that the suite notices them.
enum class Fault { kNone, kCellBoundary };

Fault parse_fault(const std::string& text);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct GroupResult {
  std::string name;
  std::vector<Check> checks;
  bool passed() const;
};

struct VerifyOptions {
  std::optional<std::string> group;
  Fault fault = Fault::kNone;
  std::uint64_t seed = 20260101;
};

std::vector<std::string> group_names();

// Unknown group names raise InputError.
std::vector<GroupResult> run(const VerifyOptions& options);

}  // namespace empwass::verify

#endif  // EMPWASS_VERIFY_HPP_
