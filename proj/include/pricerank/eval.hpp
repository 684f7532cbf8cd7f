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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "pricerank/domain.hpp"
#include "pricerank/rerank.hpp"

namespace pricerank {

struct SplitSpec {
  double train_fraction = 0.8;
  // When set, the cut is taken inside each customer's own event sequence
  // instead of once across the global timeline.
  bool per_customer = false;
};

inline void validate_split_spec(const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ValidationError("train_fraction must lie strictly between 0 and 1");
  }
}

namespace detail {

inline std::size_t split_point(double fraction, std::size_t n) {
  // The 1e-9 guard keeps exact products like 0.8 * 10 from ceiling up
  // when the double arithmetic lands a hair above the true integer.
  const std::size_t cut = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::min(cut, n);
}

}  // namespace detail

/// Chronological split: events sorted by (timestamp, customer_id, item_id),
/// the first ceil(train_fraction * N) go to train, the rest to test. With
/// per_customer set, the same ceiling cut is applied to every customer's own
/// sequence. Both halves carry the full catalog.
inline std::pair<Dataset, Dataset> time_split(const Dataset& d,
                                              const SplitSpec& spec) {
  validate_split_spec(spec);
  if (d.interactions.empty()) {
    throw ValidationError("cannot split an empty dataset");
  }
  std::vector<Interaction> sorted = d.interactions;
  std::sort(sorted.begin(), sorted.end(),
            [](const Interaction& a, const Interaction& b) {
              if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
              if (a.customer_id != b.customer_id) return a.customer_id < b.customer_id;
              return a.item_id < b.item_id;
            });

  Dataset train;
  Dataset test;
  train.catalog = d.catalog;
  test.catalog = d.catalog;
  if (!spec.per_customer) {
    const std::size_t n_train = detail::split_point(spec.train_fraction, sorted.size());
    train.interactions.assign(sorted.begin(), sorted.begin() + n_train);
    test.interactions.assign(sorted.begin() + n_train, sorted.end());
    return {std::move(train), std::move(test)};
  }

  std::map<std::string, std::size_t> counts;
  for (const Interaction& ev : sorted) counts[ev.customer_id] += 1;
  std::map<std::string, std::size_t> cuts;
  for (const auto& [customer_id, n] : counts) {
    cuts.emplace(customer_id, detail::split_point(spec.train_fraction, n));
  }
  std::map<std::string, std::size_t> seen;
  for (Interaction& ev : sorted) {
    std::size_t& rank = seen[ev.customer_id];
    (rank < cuts[ev.customer_id] ? train : test).interactions.push_back(std::move(ev));
    ++rank;
  }
  return {std::move(train), std::move(test)};
}

/// Distinct items the customer purchased in the test window.
inline std::set<std::string> relevant_items(const Dataset& test,
                                            const std::string& customer_id) {
  std::set<std::string> out;
  for (const Interaction& ev : test.interactions) {
    if (ev.action == Action::kPurchase && ev.customer_id == customer_id) {
      out.insert(ev.item_id);
    }
  }
  return out;
}

namespace detail {

inline std::size_t hits_in_top_k(const std::vector<std::string>& recommended,
                                 const std::set<std::string>& relevant,
                                 std::size_t k) {
  std::size_t hits = 0;
  const std::size_t upto = std::min(k, recommended.size());
  for (std::size_t r = 0; r < upto; ++r) {
    if (relevant.count(recommended[r])) ++hits;
  }
  return hits;
}

}  // namespace detail

inline double precision_at_k(const std::vector<std::string>& recommended,
                             const std::set<std::string>& relevant, std::size_t k) {
  if (k == 0) throw ValidationError("k must be >= 1");
  return static_cast<double>(detail::hits_in_top_k(recommended, relevant, k)) /
         static_cast<double>(k);
}

inline double recall_at_k(const std::vector<std::string>& recommended,
                          const std::set<std::string>& relevant, std::size_t k) {
  if (k == 0) throw ValidationError("k must be >= 1");
  if (relevant.empty()) return 0.0;
  return static_cast<double>(detail::hits_in_top_k(recommended, relevant, k)) /
         static_cast<double>(relevant.size());
}

/// Sum of precision-at-hit-rank over the top-k, normalized by
/// min(|relevant|, k).
inline double average_precision_at_k(const std::vector<std::string>& recommended,
                                     const std::set<std::string>& relevant,
                                     std::size_t k) {
  if (k == 0) throw ValidationError("k must be >= 1");
  if (relevant.empty()) return 0.0;
  double ap_sum = 0.0;
  std::size_t hits = 0;
  const std::size_t upto = std::min(k, recommended.size());
  for (std::size_t r = 0; r < upto; ++r) {
    if (relevant.count(recommended[r])) {
      ++hits;
      ap_sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return ap_sum / static_cast<double>(std::min(relevant.size(), k));
}

/// How the profit-at-hit aggregate handles its two denominators.
/// kPerUserMean: mean hit margin per user, averaged over users with >= 1
/// hit. kLiteral: pooled mean hit margin divided once more by the number
/// of evaluated users (a stricter, double-discounted reading).
enum class PahMode { kPerUserMean, kLiteral };

struct PahResult {
  double value = 0.0;
  std::size_t n_users_hit = 0;
};

/// Profit-at-hit over aligned per-user recommendation lists and relevant
/// sets. Margins come from the catalog; a hit item missing from the catalog
/// is an evaluation error.
inline PahResult pah_at_k(
    const std::vector<std::vector<std::string>>& per_user_recommendations,
    const std::vector<std::set<std::string>>& relevant_sets,
    const std::map<std::string, ItemRecord>& catalog, std::size_t k,
    PahMode mode = PahMode::kPerUserMean) {
  if (k == 0) throw ValidationError("k must be >= 1");
  if (per_user_recommendations.size() != relevant_sets.size()) {
    throw ValidationError("recommendation and relevant lists differ in length");
  }
  double per_user_mean_sum = 0.0;
  double pooled_margin_sum = 0.0;
  std::size_t pooled_hits = 0;
  std::size_t n_users_hit = 0;
  for (std::size_t u = 0; u < per_user_recommendations.size(); ++u) {
    const auto& recommended = per_user_recommendations[u];
    const auto& relevant = relevant_sets[u];
    double margin_sum = 0.0;
    std::size_t hits = 0;
    const std::size_t upto = std::min(k, recommended.size());
    for (std::size_t r = 0; r < upto; ++r) {
      if (!relevant.count(recommended[r])) continue;
      auto it = catalog.find(recommended[r]);
      if (it == catalog.end()) {
        throw ValidationError("recommended item '" + recommended[r] +
                              "' missing from catalog");
      }
      margin_sum += it->second.margin();
      ++hits;
    }
    if (hits > 0) {
      ++n_users_hit;
      per_user_mean_sum += margin_sum / static_cast<double>(hits);
      pooled_margin_sum += margin_sum;
      pooled_hits += hits;
    }
  }
  PahResult res;
  res.n_users_hit = n_users_hit;
  if (mode == PahMode::kPerUserMean) {
    res.value = n_users_hit == 0
                    ? 0.0
                    : per_user_mean_sum / static_cast<double>(n_users_hit);
  } else {
    res.value = pooled_hits == 0
                    ? 0.0
                    : (pooled_margin_sum / static_cast<double>(pooled_hits)) /
                          static_cast<double>(per_user_recommendations.size());
  }
  return res;
}

/// One grid cell's worth of metrics. n_users_evaluated records the number
/// of users with at least one hit in their top-k (the profit-at-hit
/// denominator).
struct MetricsRow {
  double alpha = 0.0;
  double beta = 0.0;
  double precision_at_k = 0.0;
  double recall_at_k = 0.0;
  double map_at_k = 0.0;
  double pah_at_k = 0.0;
  std::size_t k = 0;
  std::size_t n_users_evaluated = 0;

  bool operator==(const MetricsRow&) const = default;
};

/// Precomputes per-user candidate blocks once, then scores any number of
/// (alpha, beta) cells against them. Construction fixes the evaluated user
/// set: test users with at least one test purchase, in id order. All
/// evaluate calls are const and safe to run concurrently.
class Evaluator {
 public:
  Evaluator(const Recommender& rec, const Dataset& test, std::size_t k = 10,
            PahMode mode = PahMode::kPerUserMean)
      : rec_(rec), k_(k), mode_(mode) {
    if (k_ == 0) throw ValidationError("k must be >= 1");
    std::map<std::string, std::set<std::uint32_t>> relevant_by_user;
    const IndexedItems& items = rec.items();
    for (const Interaction& ev : test.interactions) {
      if (ev.action != Action::kPurchase) continue;
      auto it = items.index.find(ev.item_id);
      if (it == items.index.end()) {
        throw ValidationError("test purchase references unknown item '" +
                              ev.item_id + "'");
      }
      relevant_by_user[ev.customer_id].insert(it->second);
    }
    if (relevant_by_user.empty()) {
      throw ValidationError("no test user has purchases; nothing to evaluate");
    }
    users_.reserve(relevant_by_user.size());
    for (const auto& [customer_id, relevant] : relevant_by_user) {
      UserCtx ctx;
      ctx.customer_id = customer_id;
      ctx.block = rec.candidate_block(customer_id);
      ctx.relevant.assign(relevant.begin(), relevant.end());
      users_.push_back(std::move(ctx));
    }
  }

  std::size_t n_users() const { return users_.size(); }
  std::size_t k() const { return k_; }
  const Recommender& recommender() const { return rec_; }

  /// Metrics for one (alpha, beta) cell.
  MetricsRow evaluate_cell(const HyperParams& hyper) const {
    validate_hyper(hyper);
    const IndexedItems& items = rec_.items();
    std::vector<double> profit_pow(items.ids.size());
    for (std::size_t i = 0; i < items.ids.size(); ++i) {
      profit_pow[i] = std::pow(items.profit_base[i], hyper.alpha);
    }
    std::vector<double> final_scores;
    auto score_user = [&](const UserCtx& ctx) {
      const std::size_t n = ctx.block.items.size();
      final_scores.resize(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double s = profit_pow[ctx.block.items[j]] +
                         std::pow(ctx.block.pref_base[j], hyper.beta);
        final_scores[j] = s * ctx.block.baseline[j];
      }
    };
    MetricsRow row = run(score_user, &final_scores);
    row.alpha = hyper.alpha;
    row.beta = hyper.beta;
    return row;
  }

  /// Metrics for the unadjusted model ranking (multiplier pinned to 1).
  MetricsRow evaluate_baseline() const {
    std::vector<double> final_scores;
    auto score_user = [&](const UserCtx& ctx) {
      final_scores.assign(ctx.block.baseline.begin(), ctx.block.baseline.end());
    };
    return run(score_user, &final_scores);
  }

 private:
  struct UserCtx {
    std::string customer_id;
    CandidateBlock block;
    std::vector<std::uint32_t> relevant;  // catalog indices, ascending
  };

  template <typename ScoreUser>
  MetricsRow run(ScoreUser&& score_user, std::vector<double>* final_scores) const {
    const IndexedItems& items = rec_.items();
    double precision_sum = 0.0;
    double recall_sum = 0.0;
    double ap_sum = 0.0;
    double per_user_margin_mean_sum = 0.0;
    double pooled_margin_sum = 0.0;
    std::size_t pooled_hits = 0;
    std::size_t n_users_hit = 0;

    std::vector<std::uint32_t> order;
    for (const UserCtx& ctx : users_) {
      score_user(ctx);
      const std::vector<double>& scores = *final_scores;
      const std::size_t n = ctx.block.items.size();
      const std::size_t top = std::min(k_, n);
      order.resize(n);
      for (std::size_t j = 0; j < n; ++j) order[j] = static_cast<std::uint32_t>(j);
      std::partial_sort(order.begin(), order.begin() + top, order.end(),
                        [&scores](std::uint32_t a, std::uint32_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;  // candidates are in ascending id order
                        });

      std::size_t hits = 0;
      double ap_user = 0.0;
      double margin_sum = 0.0;
      for (std::size_t r = 0; r < top; ++r) {
        const std::uint32_t item = ctx.block.items[order[r]];
        if (!std::binary_search(ctx.relevant.begin(), ctx.relevant.end(), item)) {
          continue;
        }
        ++hits;
        ap_user += static_cast<double>(hits) / static_cast<double>(r + 1);
        margin_sum += items.margin[item];
      }
      precision_sum += static_cast<double>(hits) / static_cast<double>(k_);
      recall_sum += static_cast<double>(hits) / static_cast<double>(ctx.relevant.size());
      ap_sum += ap_user / static_cast<double>(std::min(ctx.relevant.size(), k_));
      if (hits > 0) {
        ++n_users_hit;
        per_user_margin_mean_sum += margin_sum / static_cast<double>(hits);
        pooled_margin_sum += margin_sum;
        pooled_hits += hits;
      }
    }

    const double n_eval = static_cast<double>(users_.size());
    MetricsRow row;
    row.k = k_;
    row.precision_at_k = precision_sum / n_eval;
    row.recall_at_k = recall_sum / n_eval;
    row.map_at_k = ap_sum / n_eval;
    row.n_users_evaluated = n_users_hit;
    if (mode_ == PahMode::kPerUserMean) {
      row.pah_at_k = n_users_hit == 0 ? 0.0
                                      : per_user_margin_mean_sum /
                                            static_cast<double>(n_users_hit);
    } else {
      row.pah_at_k =
          pooled_hits == 0
              ? 0.0
              : (pooled_margin_sum / static_cast<double>(pooled_hits)) / n_eval;
    }
    return row;
  }

  const Recommender& rec_;
  std::size_t k_;
  PahMode mode_;
  std::vector<UserCtx> users_;
};

/// Convenience wrapper: one-off evaluation at a single hyperparameter
/// setting.
inline MetricsRow evaluate(const Recommender& rec, const Dataset& test,
                           const HyperParams& hyper, std::size_t k = 10,
                           PahMode mode = PahMode::kPerUserMean) {
  Evaluator ev(rec, test, k, mode);
  return ev.evaluate_cell(hyper);
}

/// Inclusive hyperparameter interval; bounds must be integer multiples of
/// the sweep step.
struct GridRange {
  double lo = -1.0;
  double hi = 1.0;
};

/// Grid points lo, lo+step, ..., hi computed as integer multiples of step
/// so repeated addition cannot drift.
inline std::vector<double> grid_values(const GridRange& range, double step) {
  if (!(step > 0.0)) throw ValidationError("step must be > 0");
  if (!(range.lo <= range.hi)) throw ValidationError("grid range is reversed");
  if (!(range.lo >= -1.0 && range.hi <= 1.0)) {
    throw ValidationError("grid range must lie within [-1, 1]");
  }
  const auto to_index = [step](double v) {
    const double q = v / step;
    const long i = std::lround(q);
    if (std::fabs(q - static_cast<double>(i)) > 1e-9) {
      throw ValidationError("grid bound " + detail::fmt_double(v) +
                            " is not a multiple of step " + detail::fmt_double(step));
    }
    return i;
  };
  const long lo_i = to_index(range.lo);
  const long hi_i = to_index(range.hi);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(hi_i - lo_i + 1));
  for (long i = lo_i; i <= hi_i; ++i) out.push_back(static_cast<double>(i) * step);
  return out;
}

struct SweepReport {
  std::vector<MetricsRow> rows;  // beta varies fastest, alpha slowest
  std::size_t k = 0;
  double step = 0.1;
};

/// Evaluates every (alpha, beta) grid cell. Cells are distributed over
/// `jobs` worker threads; each row lands at its grid position, so the
/// report is identical for any worker count.
inline SweepReport grid_sweep(const Evaluator& ev, const GridRange& alpha_range,
                              const GridRange& beta_range, double step = 0.1,
                              std::size_t jobs = 1) {
  if (jobs == 0) throw ValidationError("jobs must be >= 1");
  const std::vector<double> alphas = grid_values(alpha_range, step);
  const std::vector<double> betas = grid_values(beta_range, step);
  SweepReport report;
  report.k = ev.k();
  report.step = step;
  report.rows.resize(alphas.size() * betas.size());

  std::atomic<std::size_t> next{0};
  const std::size_t total = report.rows.size();
  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= total) break;
      const double alpha = alphas[idx / betas.size()];
      const double beta = betas[idx % betas.size()];
      report.rows[idx] = ev.evaluate_cell({alpha, beta});
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return report;
}

/// Wide CSV: alpha,beta,precision,recall,map,pah,k,n_users. Grid labels use
/// 12 significant digits (an exact multiple like 3 * 0.1 would otherwise
/// print its full 17-digit form); metric values keep shortest round-trip
/// precision.
inline void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  out << "alpha,beta,precision,recall,map,pah,k,n_users\n";
  for (const MetricsRow& row : report.rows) {
    out << detail::fmt_double(row.alpha) << ',' << detail::fmt_double(row.beta)
        << ',' << detail::fmt_shortest(row.precision_at_k) << ','
        << detail::fmt_shortest(row.recall_at_k) << ','
        << detail::fmt_shortest(row.map_at_k) << ','
        << detail::fmt_shortest(row.pah_at_k) << ',' << row.k << ','
        << row.n_users_evaluated << '\n';
  }
}

/// Long-format CSV for plotting: alpha,beta,metric,value.
inline void write_sweep_long_csv(std::ostream& out, const SweepReport& report) {
  out << "alpha,beta,metric,value\n";
  for (const MetricsRow& row : report.rows) {
    const std::pair<const char*, double> metrics[] = {
        {"precision", row.precision_at_k},
        {"recall", row.recall_at_k},
        {"map", row.map_at_k},
        {"pah", row.pah_at_k},
    };
    for (const auto& [name, value] : metrics) {
      out << detail::fmt_double(row.alpha) << ',' << detail::fmt_double(row.beta)
          << ',' << name << ',' << detail::fmt_shortest(value) << '\n';
    }
  }
}

}  // namespace pricerank
