// Copyright 2026 The MIBCI Authors.
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

#ifndef MIBCI_ERRORS_HPP
#define MIBCI_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace mibci {

// All failures surface as Error with a stable machine-readable kind
// (e.g. "TruncatedFile", "DigestMismatch") plus a human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& detail)
      : std::runtime_error(kind + ": " + detail), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

[[noreturn]] inline void fail(std::string kind, const std::string& detail) {
  throw Error(std::move(kind), detail);
}

}  // namespace mibci

#endif  // MIBCI_ERRORS_HPP
