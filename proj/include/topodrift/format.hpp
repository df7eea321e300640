// Copyright 2026 The topodrift Authors.
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

#ifndef TOPODRIFT_FORMAT_HPP_
#define TOPODRIFT_FORMAT_HPP_

#include <optional>
#include <string>
#include <string_view>

namespace topodrift {

// Shortest representation that parses back to the same double.
std::string format_double(double value);

// Full-string numeric parse; nullopt on trailing garbage or empty input.
std::optional<double> parse_double(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace topodrift

#endif  // TOPODRIFT_FORMAT_HPP_
