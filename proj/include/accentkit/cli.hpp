// include/accentkit/cli.hpp
//
// Copyright 2026 The accentkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ACCENTKIT_CLI_HPP_
#define ACCENTKIT_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace accentkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Runs one subcommand. `args` excludes the program name. Output without
// --out goes to `out`; diagnostics and usage go to `err`.
int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace accentkit::cli

#endif  // ACCENTKIT_CLI_HPP_
