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

#ifndef EMPWASS_ERRORS_HPP_
#define EMPWASS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace empwass {

// Malformed input: bad files, bad specs, mismatched dimensions.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A well-formed request the library declines to run (divergent moments,
// underpowered experiments, solver caps).
class Refusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Process exit codes shared by the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitInput = 2,
  kExitRefusal = 3,
  kExitInconsistent = 4,
};

}  // namespace empwass

#endif  // EMPWASS_ERRORS_HPP_
