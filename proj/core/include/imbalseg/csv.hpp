/* Copyright 2026 The imbalseg Authors. All Rights Reserved.

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
#ifndef IMBALSEG_CSV_HPP_
#define IMBALSEG_CSV_HPP_

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace imbalseg::csv {

// RFC 4180 quoting. Empty fields are written as "" so they survive a
// round trip distinguishable from a missing column.
std::string quote(std::string_view field);

// Splits one CSV record (no embedded newlines).
std::vector<std::string> split(std::string_view line);

// Reads all non-empty records.
std::vector<std::vector<std::string>> read_all(std::istream& in);

}  // namespace imbalseg::csv

#endif  // IMBALSEG_CSV_HPP_
