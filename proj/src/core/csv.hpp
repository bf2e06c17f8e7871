// Copyright 2026 The SPINE Authors
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

#ifndef SPINE_CORE_CSV_HPP
#define SPINE_CORE_CSV_HPP

#include <string>
#include <vector>

namespace spine {

/// Quotes a field when it contains a comma, quote, or newline.
std::string csv_escape(const std::string& field);

/// Splits one CSV line into fields, honoring double-quoted fields.
std::vector<std::string> csv_split(const std::string& line);

}  // namespace spine

#endif  // SPINE_CORE_CSV_HPP
