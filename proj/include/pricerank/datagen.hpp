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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pricerank/domain.hpp"
#include "pricerank/rng.hpp"

namespace pricerank {

struct GenConfig {
  std::size_t n_customers = 0;
  std::size_t n_items = 0;
  std::size_t n_segments = 3;
  std::vector<double> segment_price_means;       // one per segment, > 0
  double margin_mean = 0.0;                      // relative margin, > -0.9
  double margin_spread = 0.0;                    // stddev, > 0
  double interactions_per_customer_mean = 0.0;   // >= 1
  double purchase_rate = 0.0;                    // in (0, 1)
  double price_affinity_strength = 0.0;          // >= 0; 0 = segment-blind
  std::uint64_t seed = 0;
};

inline void validate_gen_config(const GenConfig& cfg) {
  if (cfg.n_customers == 0) throw ValidationError("n_customers must be > 0");
  if (cfg.n_items == 0) throw ValidationError("n_items must be > 0");
  if (cfg.n_segments == 0) throw ValidationError("n_segments must be > 0");
  if (cfg.segment_price_means.size() != cfg.n_segments) {
    throw ValidationError("segment_price_means must list exactly n_segments values");
  }
  for (double m : cfg.segment_price_means) {
    if (!(m > 0.0)) throw ValidationError("segment price means must be > 0");
  }
  if (!(cfg.margin_mean > -0.9)) {
    throw ValidationError("margin_mean must be > -0.9");
  }
  if (!(cfg.margin_spread > 0.0)) throw ValidationError("margin_spread must be > 0");
  if (!(cfg.interactions_per_customer_mean >= 1.0)) {
    throw ValidationError("interactions_per_customer_mean must be >= 1");
  }
  if (!(cfg.purchase_rate > 0.0 && cfg.purchase_rate < 1.0)) {
    throw ValidationError("purchase_rate must lie strictly between 0 and 1");
  }
  if (!(cfg.price_affinity_strength >= 0.0)) {
    throw ValidationError("price_affinity_strength must be >= 0");
  }
}

/// Mirrors a catalog of mid-priced fashion items with strong margins and
/// fairly active customers (roughly 9.5 events each, 161% average margin).
inline GenConfig fashion_large_config() {
  GenConfig cfg;
  cfg.n_customers = 5000;
  cfg.n_items = 2000;
  cfg.n_segments = 3;
  cfg.segment_price_means = {40.0, 90.0, 220.0};
  cfg.margin_mean = 1.61;
  cfg.margin_spread = 0.35;
  cfg.interactions_per_customer_mean = 9.46;
  cfg.purchase_rate = 0.60;
  cfg.price_affinity_strength = 1.5;
  cfg.seed = 1;
  return cfg;
}

/// Lower-margin, lower-activity variant (87% average margin, about 6.5
/// events per customer).
inline GenConfig fashion_small_config() {
  GenConfig cfg;
  cfg.n_customers = 5000;
  cfg.n_items = 2000;
  cfg.n_segments = 3;
  cfg.segment_price_means = {25.0, 55.0, 120.0};
  cfg.margin_mean = 0.87;
  cfg.margin_spread = 0.30;
  cfg.interactions_per_customer_mean = 6.45;
  cfg.purchase_rate = 0.41;
  cfg.price_affinity_strength = 1.5;
  cfg.seed = 2;
  return cfg;
}

/// Generated dataset plus the planted segment assignments, for tests that
/// check the association between segments and purchased price levels.
struct GenOutput {
  Dataset dataset;
  std::vector<std::size_t> customer_segment;  // by customer index
  std::vector<std::size_t> item_segment;      // by item index
};

namespace detail {

inline constexpr double kPriceSigma = 0.35;          // log-normal price width
inline constexpr std::int64_t kWindowStart = 1546300800;  // 2019-01-01 UTC
inline constexpr std::int64_t kWindowLength = 63072000;   // two years

inline std::string gen_item_id(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "i%06zu", i);
  return buf;
}

inline std::string gen_customer_id(std::size_t c) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "c%06zu", c);
  return buf;
}

inline double round_price(double v) {
  return std::max(0.01, std::round(v * 100.0) / 100.0);
}

}  // namespace detail

/// Seeded synthetic dataset with planted price segments.
///
/// Items: a random segment, log-normal retail price around the segment
/// mean, margin ~ Normal(margin_mean, margin_spread) resampled while
/// <= -0.9, cost = retail / (1 + margin). Customers: a random segment and
/// a geometric event count with the configured mean. Events: items drawn
/// with weight exp(-strength * |ln(retail / segment mean)|), so strength 0
/// is segment-blind; each event is a purchase with probability
/// purchase_rate, nudged up for items close to the customer's price level.
inline GenOutput generate_full(const GenConfig& cfg) {
  validate_gen_config(cfg);
  Rng rng(cfg.seed);
  GenOutput out;
  Dataset& d = out.dataset;

  std::vector<std::string> item_ids(cfg.n_items);
  std::vector<double> item_retail(cfg.n_items);
  out.item_segment.resize(cfg.n_items);
  for (std::size_t i = 0; i < cfg.n_items; ++i) {
    const std::size_t seg = rng.uniform_index(cfg.n_segments);
    out.item_segment[i] = seg;
    const double retail = detail::round_price(
        cfg.segment_price_means[seg] * std::exp(rng.normal(0.0, detail::kPriceSigma)));
    double margin = 0.0;
    do {
      margin = rng.normal(cfg.margin_mean, cfg.margin_spread);
    } while (margin <= -0.9);
    const double price = detail::round_price(retail / (1.0 + margin));
    item_ids[i] = detail::gen_item_id(i);
    item_retail[i] = retail;
    d.catalog.emplace(item_ids[i], ItemRecord{item_ids[i], retail, price});
  }

  // Per-segment sampling tables: weight decays with the log-price gap to
  // the segment mean.
  std::vector<std::vector<double>> seg_cumsum(cfg.n_segments);
  for (std::size_t s = 0; s < cfg.n_segments; ++s) {
    seg_cumsum[s].resize(cfg.n_items);
    double acc = 0.0;
    for (std::size_t i = 0; i < cfg.n_items; ++i) {
      const double gap = std::fabs(std::log(item_retail[i] / cfg.segment_price_means[s]));
      acc += std::exp(-cfg.price_affinity_strength * gap);
      seg_cumsum[s][i] = acc;
    }
  }

  out.customer_segment.resize(cfg.n_customers);
  const double log_keep = std::log1p(-1.0 / cfg.interactions_per_customer_mean);
  for (std::size_t c = 0; c < cfg.n_customers; ++c) {
    const std::size_t seg = rng.uniform_index(cfg.n_segments);
    out.customer_segment[c] = seg;
    const std::string customer_id = detail::gen_customer_id(c);

    std::size_t n_events = 1;
    if (cfg.interactions_per_customer_mean > 1.0) {
      double u = 0.0;
      do {
        u = rng.uniform();
      } while (u <= 0.0);
      n_events = 1 + static_cast<std::size_t>(std::floor(std::log(u) / log_keep));
    }

    const std::vector<double>& cumsum = seg_cumsum[seg];
    const double total = cumsum.back();
    for (std::size_t e = 0; e < n_events; ++e) {
      const double target = rng.uniform() * total;
      const std::size_t i = static_cast<std::size_t>(
          std::upper_bound(cumsum.begin(), cumsum.end(), target) - cumsum.begin());
      const std::size_t item = std::min(i, cfg.n_items - 1);

      const double closeness =
          std::exp(-std::fabs(std::log(item_retail[item] / cfg.segment_price_means[seg])));
      const double p_buy = std::clamp(
          cfg.purchase_rate *
              (1.0 + 0.25 * cfg.price_affinity_strength * (closeness - 0.5)),
          0.0, 0.995);

      Interaction ev;
      ev.customer_id = customer_id;
      ev.item_id = item_ids[item];
      ev.action = rng.uniform() < p_buy ? Action::kPurchase : Action::kView;
      ev.timestamp = detail::kWindowStart +
                     static_cast<std::int64_t>(rng.uniform_index(
                         static_cast<std::size_t>(detail::kWindowLength)));
      d.interactions.push_back(std::move(ev));
    }
  }
  return out;
}

inline Dataset generate(const GenConfig& cfg) { return generate_full(cfg).dataset; }

namespace detail {

/// Percentile by linear interpolation between order statistics:
/// h = (n - 1) * q, result = x[floor(h)] + frac(h) * (x[floor(h)+1] - x[floor(h)]).
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

}  // namespace detail

struct DatasetStats {
  std::size_t n_customers = 0;
  std::size_t n_items = 0;
  std::size_t n_actions = 0;
  std::size_t n_purchases = 0;
  double avg_interactions_per_customer = 0.0;
  double avg_purchases_per_customer = 0.0;
  double share_customers_lt3_actions = 0.0;
  double avg_product_margin = 0.0;
  double median_product_margin = 0.0;
  double p75_actions_per_customer = 0.0;
  double p95_actions_per_customer = 0.0;
};

inline DatasetStats describe(const Dataset& d) {
  DatasetStats s;
  s.n_items = d.catalog.size();
  s.n_actions = d.interactions.size();

  std::map<std::string, std::size_t> actions_per_customer;
  for (const Interaction& ev : d.interactions) {
    actions_per_customer[ev.customer_id] += 1;
    if (ev.action == Action::kPurchase) ++s.n_purchases;
  }
  s.n_customers = actions_per_customer.size();

  if (s.n_customers > 0) {
    const double n_cust = static_cast<double>(s.n_customers);
    s.avg_interactions_per_customer = static_cast<double>(s.n_actions) / n_cust;
    s.avg_purchases_per_customer = static_cast<double>(s.n_purchases) / n_cust;
    std::size_t lt3 = 0;
    std::vector<double> counts;
    counts.reserve(s.n_customers);
    for (const auto& [id, count] : actions_per_customer) {
      if (count < 3) ++lt3;
      counts.push_back(static_cast<double>(count));
    }
    s.share_customers_lt3_actions = static_cast<double>(lt3) / n_cust;
    s.p75_actions_per_customer = detail::percentile(counts, 0.75);
    s.p95_actions_per_customer = detail::percentile(counts, 0.95);
  }

  if (!d.catalog.empty()) {
    std::vector<double> margins;
    margins.reserve(d.catalog.size());
    double margin_sum = 0.0;
    for (const auto& [id, rec] : d.catalog) {
      margins.push_back(rec.margin());
      margin_sum += rec.margin();
    }
    s.avg_product_margin = margin_sum / static_cast<double>(margins.size());
    s.median_product_margin = detail::percentile(std::move(margins), 0.5);
  }
  return s;
}

}  // namespace pricerank
