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

#include "asd/text_format.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "asd/model_core.h"

namespace asd {
namespace {

TEST(FormatDoubleTest, RoundTripsExactly) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> bits;
  int checked = 0;
  while (checked < 2000) {
    const std::uint64_t b = bits(rng);
    double x;
    std::memcpy(&x, &b, sizeof(x));
    if (!std::isfinite(x)) continue;
    const double back = ParseDouble(FormatDouble(x));
    ASSERT_EQ(std::memcmp(&x, &back, sizeof(x)), 0) << FormatDouble(x);
    ++checked;
  }
}

TEST(ParseTest, StrictNumbers) {
  EXPECT_EQ(ParseDouble("2.5"), 2.5);
  EXPECT_EQ(ParseDouble(" -1e3 "), -1000.0);
  EXPECT_EQ(ParseInt("42"), 42);
  EXPECT_THROW(ParseDouble("2.5x"), DataError);
  EXPECT_THROW(ParseDouble(""), DataError);
  EXPECT_THROW(ParseInt("4.0"), DataError);
  EXPECT_THROW(ParseInt("seven"), DataError);
}

TEST(SplitFieldsTest, KeepsEmptyFields) {
  const auto f = SplitFields("a,,b", ',');
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0], "a");
  EXPECT_EQ(f[1], "");
  EXPECT_EQ(f[2], "b");
}

TEST(KeyValueTest, SkipsCommentsAndBlankLines) {
  const KeyValueList kv = ParseKeyValueText("# header\n\n a = 1 \nb=two=2\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0].first, "a");
  EXPECT_EQ(kv[0].second, "1");
  EXPECT_EQ(kv[1].first, "b");
  EXPECT_EQ(kv[1].second, "two=2");
}

TEST(KeyValueTest, MissingEqualsNamesLine) {
  try {
    ParseKeyValueText("a=1\nbroken\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

}  // namespace
}  // namespace asd
