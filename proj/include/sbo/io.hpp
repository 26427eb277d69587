/*
 * Copyright 2026 The sbo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SBO_IO_HPP
#define SBO_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sbo::io {

/// Shortest decimal form that parses back to the identical double.
std::string format_number(double value);

double parse_number(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);

/// Opens `path` for writing, creating parent directories. Throws sbo::Error on failure.
std::ofstream open_output(const std::filesystem::path& path);

} // namespace sbo::io

#endif
