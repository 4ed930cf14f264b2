// Copyright 2026 The asd Authors. All Rights Reserved.
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

#ifndef ASD_TEXT_FORMAT_H_
#define ASD_TEXT_FORMAT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace asd {

// Shortest decimal text that survives a strtod round trip (%.17g).
std::string FormatDouble(double value);

// Strict parsers: the whole of |text| must be consumed. Throw DataError.
double ParseDouble(std::string_view text);
std::int64_t ParseInt(std::string_view text);

std::string_view Trim(std::string_view text);
std::vector<std::string_view> SplitFields(std::string_view line, char sep);

// Ordered `key=value` lines. Blank lines and lines starting with '#' are
// skipped. A line without '=' throws DataError naming the line number.
using KeyValueList = std::vector<std::pair<std::string, std::string>>;
KeyValueList ParseKeyValueText(std::string_view text);
KeyValueList ReadKeyValueFile(const std::string& path);

std::string ReadFileToString(const std::string& path);

}  // namespace asd

#endif  // ASD_TEXT_FORMAT_H_
