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
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pricerank/domain.hpp"
#include "pricerank/rng.hpp"

namespace pricerank {

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t latent_dim = 50;
  std::size_t epochs = 50;
  std::size_t max_warp_trials = 100;
  double regularization = 0.0;  // L2 weight decay per update; off by default
  double max_norm = 5.0;        // L2 cap on factor rows, projected after updates
  std::uint64_t seed = 42;
};

inline void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) {
    throw ValidationError("learning_rate must be > 0");
  }
  if (cfg.latent_dim == 0) throw ValidationError("latent_dim must be > 0");
  if (cfg.max_warp_trials == 0) throw ValidationError("max_warp_trials must be > 0");
  if (cfg.regularization < 0.0) throw ValidationError("regularization must be >= 0");
  if (!(cfg.max_norm > 0.0)) throw ValidationError("max_norm must be > 0");
}

/// Numerically stable logistic function.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Factor matrices and bias vectors, indexed by dense customer/item indices.
/// Factors are stored row-major in flat arrays.
struct ModelParams {
  std::size_t dim = 0;
  std::size_t n_customers = 0;
  std::size_t n_items = 0;
  std::vector<double> customer_factors;  // n_customers * dim
  std::vector<double> item_factors;      // n_items * dim
  std::vector<double> customer_bias;     // n_customers
  std::vector<double> item_bias;         // n_items

  std::span<double> customer_row(std::size_t u) {
    return {customer_factors.data() + u * dim, dim};
  }
  std::span<const double> customer_row(std::size_t u) const {
    return {customer_factors.data() + u * dim, dim};
  }
  std::span<double> item_row(std::size_t i) {
    return {item_factors.data() + i * dim, dim};
  }
  std::span<const double> item_row(std::size_t i) const {
    return {item_factors.data() + i * dim, dim};
  }

  bool all_finite() const {
    auto ok = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return ok(customer_factors) && ok(item_factors) && ok(customer_bias) &&
           ok(item_bias);
  }
};

/// Factors uniform in [-1/sqrt(d), +1/sqrt(d)] from the seeded generator,
/// biases zero. Draw order: customer factor rows, then item factor rows.
inline ModelParams init_model(std::size_t n_customers, std::size_t n_items,
                              const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (n_customers == 0 || n_items == 0) {
    throw ValidationError("init_model requires at least one customer and one item");
  }
  ModelParams m;
  m.dim = cfg.latent_dim;
  m.n_customers = n_customers;
  m.n_items = n_items;
  m.customer_factors.resize(n_customers * m.dim);
  m.item_factors.resize(n_items * m.dim);
  m.customer_bias.assign(n_customers, 0.0);
  m.item_bias.assign(n_items, 0.0);

  const double scale = 1.0 / std::sqrt(static_cast<double>(m.dim));
  Rng rng(cfg.seed);
  for (double& x : m.customer_factors) x = rng.uniform(-scale, scale);
  for (double& x : m.item_factors) x = rng.uniform(-scale, scale);
  return m;
}

/// Pre-sigmoid score q_u . p_i + b_u + b_i.
inline double predict_raw(const ModelParams& m, std::size_t u, std::size_t i) {
  if (u >= m.n_customers) throw std::out_of_range("customer index out of range");
  if (i >= m.n_items) throw std::out_of_range("item index out of range");
  const auto qu = m.customer_row(u);
  const auto pi = m.item_row(i);
  double dot = 0.0;
  for (std::size_t k = 0; k < m.dim; ++k) dot += qu[k] * pi[k];
  return dot + m.customer_bias[u] + m.item_bias[i];
}

/// Predicted relevance in [0, 1]; extreme raw scores round onto the bounds.
inline double predict_score(const ModelParams& m, std::size_t u, std::size_t i) {
  return sigmoid(predict_raw(m, u, i));
}

/// Rank-estimate weight for a violation found on trial t out of n_items
/// candidates: ln(floor((n_items - 1) / t) + 1).
inline double warp_rank_weight(std::size_t n_items, std::size_t trial) {
  const std::size_t rank_estimate = (n_items - 1) / trial;
  return std::log(static_cast<double>(rank_estimate + 1));
}

/// One ranking update for (customer u, positive item pos). Samples negatives
/// uniformly outside `positives` (sorted item indices) until the raw margin
/// is violated or cfg.max_warp_trials is spent. Returns true if a step was
/// taken. The customer bias cancels from the pos/neg score difference, so
/// only factors and item biases move. Touched factor rows are projected back
/// onto the L2 ball of radius cfg.max_norm; without the cap, users with
/// overlapping tastes keep finding violations against each other and the
/// shared factor directions grow without bound.
inline bool warp_update(ModelParams& m, std::size_t u, std::size_t pos,
                        std::span<const std::size_t> positives, const TrainConfig& cfg,
                        Rng& rng) {
  if (positives.size() >= m.n_items) return false;  // nothing left to sample

  const double raw_pos = predict_raw(m, u, pos);
  std::size_t neg = 0;
  double raw_neg = 0.0;
  bool violated = false;
  std::size_t trial = 0;
  while (trial < cfg.max_warp_trials) {
    ++trial;
    std::size_t candidate;
    do {
      candidate = rng.uniform_index(m.n_items);
    } while (std::binary_search(positives.begin(), positives.end(), candidate));
    const double raw = predict_raw(m, u, candidate);
    if (raw > raw_pos - 1.0) {
      neg = candidate;
      raw_neg = raw;
      violated = true;
      break;
    }
  }
  if (!violated) return false;
  (void)raw_neg;

  const double step = warp_rank_weight(m.n_items, trial) * cfg.learning_rate;
  const double decay = cfg.regularization * cfg.learning_rate;
  auto qu = m.customer_row(u);
  auto a = m.item_row(pos);
  auto b = m.item_row(neg);
  for (std::size_t k = 0; k < m.dim; ++k) {
    const double quk = qu[k];
    const double ak = a[k];
    const double bk = b[k];
    qu[k] = quk + step * (ak - bk) - decay * quk;
    a[k] = ak + step * quk - decay * ak;
    b[k] = bk - step * quk - decay * bk;
  }
  m.item_bias[pos] += step - decay * m.item_bias[pos];
  m.item_bias[neg] -= step + decay * m.item_bias[neg];

  const auto project = [&cfg](std::span<double> row) {
    double sq = 0.0;
    for (double x : row) sq += x * x;
    if (sq > cfg.max_norm * cfg.max_norm) {
      const double scale = cfg.max_norm / std::sqrt(sq);
      for (double& x : row) x *= scale;
    }
  };
  project(qu);
  project(a);
  project(b);
  return true;
}

/// Model plus the id maps needed to score real customers and items.
struct TrainedModel {
  ModelParams params;
  std::vector<std::string> customer_ids;  // index -> id, sorted
  std::vector<std::string> item_ids;      // index -> id, sorted
  std::map<std::string, std::size_t> customer_index;
  std::map<std::string, std::size_t> item_index;
};

namespace detail {

// Training stream seed is decoupled from the init seed so that a model
// trained for zero epochs is bitwise-equal to init_model(cfg).
inline constexpr std::uint64_t kTrainStreamSalt = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/// Trains on the purchase events of `train`. Customers are indexed from
/// the event log, items from the catalog, both in sorted id order. Each
/// epoch visits every distinct (customer, purchased item) pair once in
/// shuffled order.
inline TrainedModel fit(const Dataset& train, const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (train.catalog.empty()) throw ValidationError("fit requires a non-empty catalog");

  TrainedModel model;
  {
    std::set<std::string> customers;
    for (const Interaction& ev : train.interactions) customers.insert(ev.customer_id);
    model.customer_ids.assign(customers.begin(), customers.end());
  }
  for (const auto& [id, rec] : train.catalog) model.item_ids.push_back(id);
  if (model.customer_ids.empty()) {
    throw ValidationError("fit requires at least one interaction");
  }
  for (std::size_t idx = 0; idx < model.customer_ids.size(); ++idx) {
    model.customer_index.emplace(model.customer_ids[idx], idx);
  }
  for (std::size_t idx = 0; idx < model.item_ids.size(); ++idx) {
    model.item_index.emplace(model.item_ids[idx], idx);
  }

  std::set<std::pair<std::size_t, std::size_t>> pair_set;
  for (const Interaction& ev : train.interactions) {
    if (ev.action != Action::kPurchase) continue;
    auto it = model.item_index.find(ev.item_id);
    if (it == model.item_index.end()) {
      throw ValidationError("purchase references unknown item '" + ev.item_id + "'");
    }
    pair_set.emplace(model.customer_index.at(ev.customer_id), it->second);
  }
  if (pair_set.empty()) {
    throw ValidationError("fit requires at least one purchase event");
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs(pair_set.begin(),
                                                         pair_set.end());
  std::vector<std::vector<std::size_t>> positives(model.customer_ids.size());
  for (const auto& [u, i] : pairs) positives[u].push_back(i);  // sorted by construction

  model.params = init_model(model.customer_ids.size(), model.item_ids.size(), cfg);

  Rng rng(cfg.seed ^ detail::kTrainStreamSalt);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(pairs);
    for (const auto& [u, i] : pairs) {
      warp_update(model.params, u, i, positives[u], cfg, rng);
    }
    if (!model.params.all_finite()) {
      throw std::runtime_error("training diverged: non-finite parameters after epoch " +
                               std::to_string(epoch + 1));
    }
  }
  return model;
}

/// predict_score for each candidate, input order preserved.
inline std::vector<std::pair<std::size_t, double>> score_candidates(
    const ModelParams& m, std::size_t u, std::span<const std::size_t> candidates) {
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(candidates.size());
  for (std::size_t i : candidates) out.emplace_back(i, predict_score(m, u, i));
  return out;
}

namespace detail {

inline constexpr char kModelMagic[4] = {'P', 'R', 'N', 'K'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

inline void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::ifstream& in, void* p, std::size_t n,
                       const std::string& what) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw ParseError("model file truncated while reading " + what);
  }
}

inline void write_u32(std::ofstream& out, std::uint32_t v) { write_bytes(out, &v, 4); }
inline void write_u64(std::ofstream& out, std::uint64_t v) { write_bytes(out, &v, 8); }

inline std::uint32_t read_u32(std::ifstream& in, const std::string& what) {
  std::uint32_t v = 0;
  read_bytes(in, &v, 4, what);
  return v;
}

inline std::uint64_t read_u64(std::ifstream& in, const std::string& what) {
  std::uint64_t v = 0;
  read_bytes(in, &v, 8, what);
  return v;
}

inline void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  write_bytes(out, v.data(), v.size() * sizeof(double));
}

inline void read_doubles(std::ifstream& in, std::vector<double>& v, std::size_t n,
                         const std::string& what) {
  v.resize(n);
  read_bytes(in, v.data(), n * sizeof(double), what);
}

inline void write_id_table(std::ofstream& out, const std::vector<std::string>& ids) {
  write_u64(out, ids.size());
  for (const std::string& id : ids) {
    write_u32(out, static_cast<std::uint32_t>(id.size()));
    write_bytes(out, id.data(), id.size());
  }
}

inline std::vector<std::string> read_id_table(std::ifstream& in, std::size_t expected,
                                              const std::string& what) {
  const std::uint64_t n = read_u64(in, what + " count");
  if (n != expected) {
    throw ParseError("model file corrupt: " + what + " count mismatch");
  }
  std::vector<std::string> ids(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    const std::uint32_t len = read_u32(in, what + " id length");
    std::string id(len, '\0');
    if (len > 0) read_bytes(in, id.data(), len, what + " id");
    ids[k] = std::move(id);
  }
  return ids;
}

}  // namespace detail

/// Binary model file: magic "PRNK", format version, shapes, the four
/// parameter arrays, then the customer and item id tables.
inline void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open model file for writing: " + path);
  detail::write_bytes(out, detail::kModelMagic, 4);
  detail::write_u32(out, detail::kModelFormatVersion);
  detail::write_u64(out, model.params.dim);
  detail::write_u64(out, model.params.n_customers);
  detail::write_u64(out, model.params.n_items);
  detail::write_doubles(out, model.params.customer_factors);
  detail::write_doubles(out, model.params.item_factors);
  detail::write_doubles(out, model.params.customer_bias);
  detail::write_doubles(out, model.params.item_bias);
  detail::write_id_table(out, model.customer_ids);
  detail::write_id_table(out, model.item_ids);
  if (!out) throw ParseError("write failed: " + path);
}

inline TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file: " + path);
  char magic[4] = {};
  detail::read_bytes(in, magic, 4, "magic");
  if (std::memcmp(magic, detail::kModelMagic, 4) != 0) {
    throw ParseError("not a model file: bad magic in " + path);
  }
  const std::uint32_t version = detail::read_u32(in, "format version");
  if (version != detail::kModelFormatVersion) {
    throw ParseError("unsupported model format version " + std::to_string(version));
  }
  TrainedModel model;
  model.params.dim = detail::read_u64(in, "dim");
  model.params.n_customers = detail::read_u64(in, "n_customers");
  model.params.n_items = detail::read_u64(in, "n_items");
  if (model.params.dim == 0 || model.params.n_customers == 0 ||
      model.params.n_items == 0) {
    throw ParseError("model file corrupt: zero dimension in header");
  }
  detail::read_doubles(in, model.params.customer_factors,
                       model.params.n_customers * model.params.dim,
                       "customer factors");
  detail::read_doubles(in, model.params.item_factors,
                       model.params.n_items * model.params.dim, "item factors");
  detail::read_doubles(in, model.params.customer_bias, model.params.n_customers,
                       "customer biases");
  detail::read_doubles(in, model.params.item_bias, model.params.n_items,
                       "item biases");
  model.customer_ids =
      detail::read_id_table(in, model.params.n_customers, "customer");
  model.item_ids = detail::read_id_table(in, model.params.n_items, "item");
  for (std::size_t idx = 0; idx < model.customer_ids.size(); ++idx) {
    if (!model.customer_index.emplace(model.customer_ids[idx], idx).second) {
      throw ParseError("model file corrupt: duplicate customer id");
    }
  }
  for (std::size_t idx = 0; idx < model.item_ids.size(); ++idx) {
    if (!model.item_index.emplace(model.item_ids[idx], idx).second) {
      throw ParseError("model file corrupt: duplicate item id");
    }
  }
  if (!model.params.all_finite()) {
    throw ParseError("model file corrupt: non-finite parameters");
  }
  return model;
}

}  // namespace pricerank
