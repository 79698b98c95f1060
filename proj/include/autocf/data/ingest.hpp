/*
 * Copyright 2026 The AutoCF Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef AUTOCF_DATA_INGEST_HPP_
#define AUTOCF_DATA_INGEST_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace autocf {

struct RawInteraction {
  std::string user;
  std::string item;
  std::optional<double> rating;
  std::optional<std::int64_t> timestamp;

  friend bool operator==(const RawInteraction&,
                         const RawInteraction&) = default;
};

// Column layout of a delimited interaction file. Column indices are 0-based;
// a negative index means the column is absent.
struct FormatSpec {
  std::string delimiter = "\t";
  int user_column = 0;
  int item_column = 1;
  int rating_column = 2;
  int timestamp_column = 3;
  int header_lines = 0;
  double rating_min = 1.0;
  double rating_max = 5.0;

  // user \t item \t rating \t timestamp, no header (ML-100K u.data).
  static FormatSpec MovieLens100K();
  // user::item::rating::timestamp (ML-1M ratings.dat).
  static FormatSpec MovieLens1M();
};

struct IngestResult {
  std::vector<RawInteraction> records;
  std::size_t lines_read = 0;
  std::size_t malformed = 0;
  std::vector<long> malformed_lines;  // first few offending line numbers
};

// Parses one record per valid line. Lines that fail to parse, or whose rating
// lies outside [rating_min, rating_max], are counted as malformed. Throws
// IngestError if the file cannot be read or if the first data line does not
// have enough fields for the column mapping.
IngestResult Ingest(const std::filesystem::path& path,
                    const FormatSpec& format);
IngestResult ParseInteractions(std::istream& in, const FormatSpec& format);

enum class FilterSide { kBoth, kUsers, kItems };

// Iteratively drops users and items (or only the chosen side) with fewer than
// `threshold` records until no such user or item remains. Record order is
// preserved.
std::vector<RawInteraction> FilterMinCount(std::vector<RawInteraction> records,
                                           std::size_t threshold,
                                           FilterSide side = FilterSide::kBoth);

}  // namespace autocf

#endif  // AUTOCF_DATA_INGEST_HPP_
