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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "pricerank/domain.hpp"
#include "pricerank/mf.hpp"

namespace pricerank {

namespace detail {

/// The bracket base shared by both adjustment terms:
/// 1 + log10(0.1 + 0.9 * num / den). Strictly positive for positive prices
/// because the log argument stays above 0.1.
inline double price_bracket(double num, double den, const char* num_name,
                            const char* den_name) {
  if (!(num > 0.0)) {
    throw ValidationError(std::string(num_name) + " must be > 0 (got " +
                          fmt_double(num) + ")");
  }
  if (!(den > 0.0)) {
    throw ValidationError(std::string(den_name) + " must be > 0 (got " +
                          fmt_double(den) + ")");
  }
  return 1.0 + std::log10(0.1 + 0.9 * (num / den));
}

inline void check_exponent(double e, const char* name) {
  if (!(e >= -1.0 && e <= 1.0)) {
    throw ValidationError(std::string(name) + " must lie in [-1, 1]");
  }
}

/// Shortest round-trip decimal form; keeps report files byte-stable.
inline std::string fmt_shortest(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Profit component: [1 + log10(0.1 + 0.9 * retail/price)]^alpha.
inline double profit_term(double retail_price, double price, double alpha) {
  detail::check_exponent(alpha, "alpha");
  return std::pow(detail::price_bracket(retail_price, price, "retail_price", "price"),
                  alpha);
}

/// Price-preference component:
/// [1 + log10(0.1 + 0.9 * retail / avg_retail_u)]^beta.
inline double preference_term(double retail_price, double avg_retail_price,
                              double beta) {
  detail::check_exponent(beta, "beta");
  return std::pow(detail::price_bracket(retail_price, avg_retail_price,
                                        "retail_price", "avg_retail_price"),
                  beta);
}

struct AdjustmentInputs {
  double retail_price_i = 0.0;
  double price_i = 0.0;
  double avg_retail_price_u = 0.0;
  HyperParams hyper;
};

/// The score multiplier s_ui: sum of the profit and preference terms.
/// Equals exactly 2 when alpha = beta = 0, whatever the prices.
inline double adjust_score(const AdjustmentInputs& in) {
  return profit_term(in.retail_price_i, in.price_i, in.hyper.alpha) +
         preference_term(in.retail_price_i, in.avg_retail_price_u, in.hyper.beta);
}

/// Final score: multiplier times the baseline relevance.
inline double combine(double s_ui, double baseline) { return s_ui * baseline; }

/// Highest-final-score items first; ties broken by ascending item_id.
inline std::vector<ScoredItem> top_n(std::vector<ScoredItem> scored, std::size_t n) {
  if (n == 0) throw ValidationError("top_n requires n >= 1");
  const std::size_t keep = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                    [](const ScoredItem& a, const ScoredItem& b) {
                      if (a.final_score != b.final_score) {
                        return a.final_score > b.final_score;
                      }
                      return a.item_id < b.item_id;
                    });
  scored.resize(keep);
  return scored;
}

/// Catalog flattened to dense arrays in sorted item-id order, with the
/// profit bracket precomputed once per item.
struct IndexedItems {
  std::vector<std::string> ids;        // ascending
  std::vector<double> retail;
  std::vector<double> price;
  std::vector<double> margin;          // (retail - price) / price
  std::vector<double> profit_base;     // bracket(retail, price)
  std::map<std::string, std::uint32_t> index;

  static IndexedItems from_catalog(const std::map<std::string, ItemRecord>& catalog) {
    if (catalog.empty()) throw ValidationError("catalog is empty");
    IndexedItems out;
    out.ids.reserve(catalog.size());
    for (const auto& [id, rec] : catalog) {
      out.index.emplace(id, static_cast<std::uint32_t>(out.ids.size()));
      out.ids.push_back(id);
      out.retail.push_back(rec.retail_price);
      out.price.push_back(rec.price);
      out.margin.push_back(rec.margin());
      out.profit_base.push_back(
          detail::price_bracket(rec.retail_price, rec.price, "retail_price", "price"));
    }
    return out;
  }
};

/// Per-customer scoring inputs: candidate items (catalog minus the
/// customer's training purchases), their baseline scores, and the
/// customer-dependent preference brackets.
struct CandidateBlock {
  std::vector<std::uint32_t> items;  // catalog indices, ascending
  std::vector<double> baseline;      // model score per candidate
  std::vector<double> pref_base;     // bracket(retail_i, avg_u) per candidate
};

/// Scores and re-ranks candidates for one customer at a time. Customers
/// unknown to the model fall back to item-bias-only baseline scores, so
/// they are still rankable and still re-ranked.
class Recommender {
 public:
  Recommender(const TrainedModel& model, const CustomerProfiles& profiles,
              const Dataset& train)
      : model_(model), profiles_(profiles), items_(IndexedItems::from_catalog(train.catalog)) {
    if (model_.item_ids.size() != items_.ids.size() ||
        !std::equal(model_.item_ids.begin(), model_.item_ids.end(),
                    items_.ids.begin())) {
      throw ValidationError("model item ids do not match the catalog");
    }
    for (const Interaction& ev : train.interactions) {
      if (ev.action != Action::kPurchase) continue;
      auto it = items_.index.find(ev.item_id);
      if (it == items_.index.end()) {
        throw ValidationError("training purchase references unknown item '" +
                              ev.item_id + "'");
      }
      purchased_[ev.customer_id].push_back(it->second);
    }
    for (auto& [id, v] : purchased_) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }

  const IndexedItems& items() const { return items_; }
  const TrainedModel& model() const { return model_; }
  const CustomerProfiles& profiles() const { return profiles_; }

  bool is_cold_start(const std::string& customer_id) const {
    return model_.customer_index.find(customer_id) == model_.customer_index.end();
  }

  CandidateBlock candidate_block(const std::string& customer_id) const {
    CandidateBlock block;
    const std::vector<std::uint32_t>* excluded = nullptr;
    if (auto it = purchased_.find(customer_id); it != purchased_.end()) {
      excluded = &it->second;
    }
    const std::size_t n_items = items_.ids.size();
    block.items.reserve(n_items - (excluded ? excluded->size() : 0));
    for (std::uint32_t i = 0; i < n_items; ++i) {
      if (excluded &&
          std::binary_search(excluded->begin(), excluded->end(), i)) {
        continue;
      }
      block.items.push_back(i);
    }

    block.baseline.reserve(block.items.size());
    auto cu = model_.customer_index.find(customer_id);
    if (cu != model_.customer_index.end()) {
      const std::size_t u = cu->second;
      for (std::uint32_t i : block.items) {
        block.baseline.push_back(predict_score(model_.params, u, i));
      }
    } else {
      for (std::uint32_t i : block.items) {
        block.baseline.push_back(sigmoid(model_.params.item_bias[i]));
      }
    }

    const double avg_u = profiles_.avg_price_for(customer_id);
    block.pref_base.reserve(block.items.size());
    for (std::uint32_t i : block.items) {
      block.pref_base.push_back(detail::price_bracket(items_.retail[i], avg_u,
                                                      "retail_price",
                                                      "avg_retail_price"));
    }
    return block;
  }

  /// Top-n recommendations for one customer. With baseline_only the
  /// multiplier is pinned to 1 and the ranking is the raw model ranking.
  std::vector<ScoredItem> recommend(const std::string& customer_id,
                                    const HyperParams& hyper, std::size_t n,
                                    bool baseline_only = false) const {
    validate_hyper(hyper);
    if (n == 0) throw ValidationError("recommend requires n >= 1");
    const CandidateBlock block = candidate_block(customer_id);
    std::vector<ScoredItem> scored;
    scored.reserve(block.items.size());
    for (std::size_t j = 0; j < block.items.size(); ++j) {
      const std::uint32_t i = block.items[j];
      ScoredItem item;
      item.item_id = items_.ids[i];
      item.baseline_score = block.baseline[j];
      item.adjusted_multiplier =
          baseline_only ? 1.0
                        : std::pow(items_.profit_base[i], hyper.alpha) +
                              std::pow(block.pref_base[j], hyper.beta);
      item.final_score = combine(item.adjusted_multiplier, item.baseline_score);
      scored.push_back(std::move(item));
    }
    return top_n(std::move(scored), n);
  }

 private:
  const TrainedModel& model_;
  const CustomerProfiles& profiles_;
  IndexedItems items_;
  std::map<std::string, std::vector<std::uint32_t>> purchased_;
};

/// CSV rows: customer_id,rank,item_id,baseline_score,multiplier,final_score.
inline void write_recommendations_csv(std::ostream& out,
                                      const std::string& customer_id,
                                      const std::vector<ScoredItem>& items,
                                      bool with_header = true) {
  if (with_header) {
    out << "customer_id,rank,item_id,baseline_score,multiplier,final_score\n";
  }
  for (std::size_t r = 0; r < items.size(); ++r) {
    const ScoredItem& it = items[r];
    out << customer_id << ',' << (r + 1) << ',' << it.item_id << ','
        << detail::fmt_shortest(it.baseline_score) << ','
        << detail::fmt_shortest(it.adjusted_multiplier) << ','
        << detail::fmt_shortest(it.final_score) << '\n';
  }
}

}  // namespace pricerank
