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

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace pricerank {

/// A domain or validation failure (bad input values, broken invariants).
/// CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An I/O or parse failure (unreadable file, garbled row, bad format tag).
/// CLI maps these to exit code 2.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg, std::size_t line = 0)
      : std::runtime_error(msg), line_(line) {}
  /// 1-based line number of the offending input line, 0 if not applicable.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class Action { kView, kPurchase };

/// One customer action from the event log.
struct Interaction {
  std::string customer_id;
  std::string item_id;
  Action action = Action::kView;
  std::int64_t timestamp = 0;  // seconds since epoch, non-negative
};

/// Catalog entry: what the customer pays and what the retailer paid.
struct ItemRecord {
  std::string item_id;
  double retail_price = 0.0;  // selling price, > 0
  double price = 0.0;         // retailer's purchase cost, > 0

  /// Relative profit margin; negative for loss-leader items.
  double margin() const { return (retail_price - price) / price; }
};

/// Event log plus the catalog it references.
struct Dataset {
  std::vector<Interaction> interactions;
  std::map<std::string, ItemRecord> catalog;
};

struct CustomerProfile {
  std::string customer_id;
  double avg_purchase_retail_price = 0.0;  // > 0
};

/// The two re-ranking knobs; both restricted to [-1, 1].
struct HyperParams {
  double alpha = 0.0;  // profit influence
  double beta = 0.0;   // price-preference influence
};

inline void validate_hyper(const HyperParams& h) {
  if (!(h.alpha >= -1.0 && h.alpha <= 1.0)) {
    throw ValidationError("alpha must lie in [-1, 1]");
  }
  if (!(h.beta >= -1.0 && h.beta <= 1.0)) {
    throw ValidationError("beta must lie in [-1, 1]");
  }
}

/// One candidate item after scoring and adjustment.
struct ScoredItem {
  std::string item_id;
  double baseline_score = 0.0;       // model score in (0, 1)
  double adjusted_multiplier = 0.0;  // price/profit multiplier, > 0
  double final_score = 0.0;          // adjusted_multiplier * baseline_score
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace detail

/// A single data problem found by validate_dataset. Violations are data,
/// not exceptions; the message names the offending item or event.
struct Violation {
  std::string message;
};

/// Checks every Dataset invariant: positive prices, non-negative
/// timestamps, and catalog coverage of all referenced items.
/// Returns an empty list iff the dataset is well formed.
inline std::vector<Violation> validate_dataset(const Dataset& d) {
  std::vector<Violation> out;
  for (const auto& [id, rec] : d.catalog) {
    if (!(rec.retail_price > 0.0)) {
      out.push_back({"catalog item '" + id + "': retail_price must be > 0 (got " +
                     detail::fmt_double(rec.retail_price) + ")"});
    }
    if (!(rec.price > 0.0)) {
      out.push_back({"catalog item '" + id + "': price must be > 0 (got " +
                     detail::fmt_double(rec.price) + ")"});
    }
  }
  for (std::size_t n = 0; n < d.interactions.size(); ++n) {
    const Interaction& ev = d.interactions[n];
    if (ev.timestamp < 0) {
      out.push_back({"interaction #" + std::to_string(n + 1) + " (customer '" +
                     ev.customer_id + "'): negative timestamp " +
                     std::to_string(ev.timestamp)});
    }
    if (d.catalog.find(ev.item_id) == d.catalog.end()) {
      out.push_back({"interaction #" + std::to_string(n + 1) +
                     " references unknown item '" + ev.item_id + "'"});
    }
  }
  return out;
}

/// Per-customer average purchase price plus the global fallback used for
/// customers without purchase history.
struct CustomerProfiles {
  std::map<std::string, CustomerProfile> by_customer;
  double fallback_avg_price = 0.0;

  /// Price profile for any customer id; unknown customers get the fallback.
  double avg_price_for(const std::string& customer_id) const {
    auto it = by_customer.find(customer_id);
    return it == by_customer.end() ? fallback_avg_price
                                   : it->second.avg_purchase_retail_price;
  }
};

/// Builds price profiles from the training log. Customers with purchases
/// get the mean retail price over their purchase events (duplicates count
/// per event); view-only customers get the global purchase mean; if the log
/// has no purchases at all the fallback is the unweighted catalog mean.
inline CustomerProfiles build_customer_profiles(const Dataset& train) {
  if (train.catalog.empty()) {
    throw ValidationError("cannot build customer profiles from an empty catalog");
  }

  std::map<std::string, std::pair<double, std::size_t>> sums;  // id -> (sum, count)
  double global_sum = 0.0;
  std::size_t global_count = 0;
  for (const Interaction& ev : train.interactions) {
    auto& entry = sums[ev.customer_id];  // registers view-only customers too
    if (ev.action != Action::kPurchase) continue;
    auto it = train.catalog.find(ev.item_id);
    if (it == train.catalog.end()) {
      throw ValidationError("interaction references unknown item '" + ev.item_id + "'");
    }
    entry.first += it->second.retail_price;
    entry.second += 1;
    global_sum += it->second.retail_price;
    global_count += 1;
  }

  double fallback = 0.0;
  if (global_count > 0) {
    fallback = global_sum / static_cast<double>(global_count);
  } else {
    double catalog_sum = 0.0;
    for (const auto& [id, rec] : train.catalog) catalog_sum += rec.retail_price;
    fallback = catalog_sum / static_cast<double>(train.catalog.size());
  }

  CustomerProfiles profiles;
  profiles.fallback_avg_price = fallback;
  for (const auto& [id, acc] : sums) {
    const double avg =
        acc.second > 0 ? acc.first / static_cast<double>(acc.second) : fallback;
    profiles.by_customer.emplace(id, CustomerProfile{id, avg});
  }
  return profiles;
}

}  // namespace pricerank
