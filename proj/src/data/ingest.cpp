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

#include "autocf/data/ingest.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <string_view>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "autocf/errors.hpp"

namespace autocf {

namespace {

constexpr std::size_t kMaxReportedMalformed = 20;

std::vector<std::string_view> SplitFields(std::string_view line,
                                          std::string_view delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + delimiter.size();
  }
  return fields;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool ParseNumber(std::string_view s, T& out) {
  s = Trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

int RequiredFields(const FormatSpec& f) {
  int needed = std::max(f.user_column, f.item_column);
  needed = std::max(needed, f.rating_column);
  needed = std::max(needed, f.timestamp_column);
  return needed + 1;
}

}  // namespace

FormatSpec FormatSpec::MovieLens100K() { return FormatSpec{}; }

FormatSpec FormatSpec::MovieLens1M() {
  FormatSpec f;
  f.delimiter = "::";
  return f;
}

IngestResult ParseInteractions(std::istream& in, const FormatSpec& format) {
  if (format.user_column < 0 || format.item_column < 0) {
    throw IngestError("user and item columns are required", 0);
  }
  if (format.delimiter.empty()) {
    throw IngestError("empty delimiter", 0);
  }
  const int required = RequiredFields(format);
  IngestResult result;
  std::string line;
  long line_no = 0;
  bool checked_layout = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no <= format.header_lines) continue;
    std::string_view view = Trim(line);
    if (view.empty()) continue;
    ++result.lines_read;
    const auto fields = SplitFields(view, format.delimiter);
    if (!checked_layout) {
      checked_layout = true;
      if (static_cast<int>(fields.size()) < required) {
        throw IngestError("column mapping needs " + std::to_string(required) +
                              " fields but the first data line has " +
                              std::to_string(fields.size()),
                          line_no);
      }
    }
    auto malformed = [&] {
      ++result.malformed;
      if (result.malformed_lines.size() < kMaxReportedMalformed) {
        result.malformed_lines.push_back(line_no);
      }
    };
    if (static_cast<int>(fields.size()) < required) {
      malformed();
      continue;
    }
    RawInteraction record;
    record.user = std::string(Trim(fields[format.user_column]));
    record.item = std::string(Trim(fields[format.item_column]));
    if (record.user.empty() || record.item.empty()) {
      malformed();
      continue;
    }
    if (format.rating_column >= 0) {
      double rating = 0.0;
      if (!ParseNumber(fields[format.rating_column], rating) ||
          rating < format.rating_min || rating > format.rating_max) {
        malformed();
        continue;
      }
      record.rating = rating;
    }
    if (format.timestamp_column >= 0) {
      std::int64_t ts = 0;
      if (!ParseNumber(fields[format.timestamp_column], ts)) {
        // Some exports write timestamps as floats.
        double ts_real = 0.0;
        if (!ParseNumber(fields[format.timestamp_column], ts_real)) {
          malformed();
          continue;
        }
        ts = static_cast<std::int64_t>(ts_real);
      }
      record.timestamp = ts;
    }
    result.records.push_back(std::move(record));
  }
  if (result.records.empty()) {
    spdlog::warn("ingest: no interaction records found");
  }
  if (result.malformed > 0) {
    spdlog::warn("ingest: skipped {} malformed line(s), first at line {}",
                 result.malformed, result.malformed_lines.front());
  }
  return result;
}

IngestResult Ingest(const std::filesystem::path& path,
                    const FormatSpec& format) {
  std::ifstream in(path);
  if (!in) {
    throw IngestError("cannot read interaction file '" + path.string() + "'",
                      0);
  }
  return ParseInteractions(in, format);
}

std::vector<RawInteraction> FilterMinCount(std::vector<RawInteraction> records,
                                           std::size_t threshold,
                                           FilterSide side) {
  if (threshold == 0) return records;
  const bool users = side != FilterSide::kItems;
  const bool items = side != FilterSide::kUsers;
  while (true) {
    std::unordered_map<std::string, std::size_t> user_count;
    std::unordered_map<std::string, std::size_t> item_count;
    for (const auto& r : records) {
      ++user_count[r.user];
      ++item_count[r.item];
    }
    std::vector<RawInteraction> kept;
    kept.reserve(records.size());
    for (auto& r : records) {
      if ((!users || user_count[r.user] >= threshold) &&
          (!items || item_count[r.item] >= threshold)) {
        kept.push_back(std::move(r));
      }
    }
    const bool stable = kept.size() == records.size();
    records = std::move(kept);
    if (stable) return records;
  }
}

}  // namespace autocf
