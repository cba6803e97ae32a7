// Copyright 2026 The PyramidNet Authors
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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pyramidnet/network.hpp"

namespace pyramidnet::cli {

enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,
  kConfigError = 2,
  kDataError = 3,
  kCheckFailure = 4,
};

/// Raised for invalid command configuration; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// "4,4,2" -> {4, 4, 2}. Every entry must be positive and no layer may widen.
std::vector<int> parse_architecture(std::string_view text);
std::vector<int> parse_int_list(std::string_view text);

void save_network_json(const Network& net, const std::filesystem::path& path);
Network load_network_json(const std::filesystem::path& path);

/// Expands a flat JSON object into "--key value" arguments. Arrays become
/// comma lists, true booleans become bare flags and false ones "--no-key".
std::vector<std::string> config_to_args(const std::filesystem::path& path);

/// Entry point of the `pyramidnet` tool. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pyramidnet::cli
