// Copyright 2026 The pricerank authors
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

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pricerank/domain.hpp"

namespace pricerank {

namespace detail {

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

inline double parse_double_field(std::string_view field, std::string_view name,
                                 std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("line " + std::to_string(line_no) + ": field '" +
                         std::string(name) + "' is not a number: '" +
                         std::string(field) + "'",
                     line_no);
  }
  return value;
}

inline std::int64_t parse_int_field(std::string_view field, std::string_view name,
                                    std::size_t line_no) {
  std::int64_t value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("line " + std::to_string(line_no) + ": field '" +
                         std::string(name) + "' is not an integer: '" +
                         std::string(field) + "'",
                     line_no);
  }
  return value;
}

inline std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file for reading: " + path);
  return in;
}

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  return out;
}

}  // namespace detail

inline constexpr std::string_view kInteractionsHeader =
    "customer_id,item_id,action,timestamp";
inline constexpr std::string_view kCatalogHeader = "item_id,retail_price,price";

/// Reads an interactions CSV. Exact header required; action is "view" or
/// "purchase". Throws ParseError with the offending line number.
inline std::vector<Interaction> read_interactions_csv(const std::string& path) {
  std::ifstream in = detail::open_for_read(path);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError(path + ": empty file", 0);
  line_no = 1;
  if (detail::strip_cr(line) != kInteractionsHeader) {
    throw ParseError(path + ": expected header '" + std::string(kInteractionsHeader) +
                         "', got '" + std::string(detail::strip_cr(line)) + "'",
                     line_no);
  }

  std::vector<Interaction> out;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = detail::strip_cr(line);
    if (row.empty()) continue;
    const auto fields = detail::split_fields(row);
    if (fields.size() != 4) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError("line " + std::to_string(line_no) + ": empty id field", line_no);
    }
    Interaction ev;
    ev.customer_id = std::string(fields[0]);
    ev.item_id = std::string(fields[1]);
    if (fields[2] == "view") {
      ev.action = Action::kView;
    } else if (fields[2] == "purchase") {
      ev.action = Action::kPurchase;
    } else {
      throw ParseError("line " + std::to_string(line_no) +
                           ": action must be 'view' or 'purchase', got '" +
                           std::string(fields[2]) + "'",
                       line_no);
    }
    ev.timestamp = detail::parse_int_field(fields[3], "timestamp", line_no);
    out.push_back(std::move(ev));
  }
  return out;
}

/// Reads a catalog CSV. Exact header required; duplicate item ids rejected.
inline std::map<std::string, ItemRecord> read_catalog_csv(const std::string& path) {
  std::ifstream in = detail::open_for_read(path);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError(path + ": empty file", 0);
  line_no = 1;
  if (detail::strip_cr(line) != kCatalogHeader) {
    throw ParseError(path + ": expected header '" + std::string(kCatalogHeader) +
                         "', got '" + std::string(detail::strip_cr(line)) + "'",
                     line_no);
  }

  std::map<std::string, ItemRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = detail::strip_cr(line);
    if (row.empty()) continue;
    const auto fields = detail::split_fields(row);
    if (fields.size() != 3) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    if (fields[0].empty()) {
      throw ParseError("line " + std::to_string(line_no) + ": empty item_id", line_no);
    }
    ItemRecord rec;
    rec.item_id = std::string(fields[0]);
    rec.retail_price = detail::parse_double_field(fields[1], "retail_price", line_no);
    rec.price = detail::parse_double_field(fields[2], "price", line_no);
    if (!out.emplace(rec.item_id, rec).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate item_id '" +
                           rec.item_id + "'",
                       line_no);
    }
  }
  return out;
}

inline Dataset load_dataset(const std::string& interactions_path,
                            const std::string& catalog_path) {
  Dataset d;
  d.interactions = read_interactions_csv(interactions_path);
  d.catalog = read_catalog_csv(catalog_path);
  return d;
}

inline void write_interactions_csv(std::ostream& out,
                                   const std::vector<Interaction>& interactions) {
  out << kInteractionsHeader << '\n';
  for (const Interaction& ev : interactions) {
    out << ev.customer_id << ',' << ev.item_id << ','
        << (ev.action == Action::kPurchase ? "purchase" : "view") << ',' << ev.timestamp
        << '\n';
  }
}

inline void write_interactions_csv(const std::string& path,
                                   const std::vector<Interaction>& interactions) {
  std::ofstream out = detail::open_for_write(path);
  write_interactions_csv(out, interactions);
  if (!out) throw ParseError("write failed: " + path);
}

inline void write_catalog_csv(std::ostream& out,
                              const std::map<std::string, ItemRecord>& catalog) {
  out << kCatalogHeader << '\n';
  char buf[64];
  for (const auto& [id, rec] : catalog) {
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f", rec.retail_price, rec.price);
    out << id << ',' << buf << '\n';
  }
}

inline void write_catalog_csv(const std::string& path,
                              const std::map<std::string, ItemRecord>& catalog) {
  std::ofstream out = detail::open_for_write(path);
  write_catalog_csv(out, catalog);
  if (!out) throw ParseError("write failed: " + path);
}

/// FNV-1a 64-bit hash of a file's bytes, as 16 hex digits. Used in run
/// manifests so reruns can prove they saw identical inputs.
inline std::string file_fnv1a64(const std::string& path) {
  std::ifstream in = detail::open_for_read(path);
  std::uint64_t h = 14695981039346656037ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace pricerank
