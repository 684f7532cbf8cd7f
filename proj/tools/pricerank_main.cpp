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

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pricerank/pricerank.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace pricerank;

namespace {

// Set by command callbacks that finish without throwing but still need a
// nonzero exit (validate with violations).
int g_exit_code = 0;

constexpr int kFormatVersion = 1;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw ParseError("write failed: " + path);
}

void write_json_file(const std::string& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

// `label` is the path recorded in the manifest (relative to the manifest's own
// directory so reruns match bytewise); `path` is the file actually hashed.
json file_entry(const std::string& label, const std::string& path) {
  return json{{"path", label}, {"fnv1a64", file_fnv1a64(path)}};
}

json file_entry(const std::string& path) { return file_entry(path, path); }

Dataset load_valid_dataset(const std::string& interactions_path,
                           const std::string& catalog_path) {
  Dataset d = load_dataset(interactions_path, catalog_path);
  const std::vector<Violation> violations = validate_dataset(d);
  if (!violations.empty()) {
    std::string msg = "dataset failed validation (" +
                      std::to_string(violations.size()) + " violation(s)); first: " +
                      violations.front().message;
    throw ValidationError(msg);
  }
  return d;
}

json metrics_row_json(const MetricsRow& r) {
  return json{{"alpha", r.alpha},
              {"beta", r.beta},
              {"precision", r.precision_at_k},
              {"recall", r.recall_at_k},
              {"map", r.map_at_k},
              {"pah", r.pah_at_k},
              {"k", r.k},
              {"n_users", r.n_users_evaluated}};
}

void write_metrics_row_csv(std::ostream& out, const MetricsRow& row) {
  out << "alpha,beta,precision,recall,map,pah,k,n_users\n";
  out << detail::fmt_double(row.alpha) << ',' << detail::fmt_double(row.beta)
      << ',' << detail::fmt_shortest(row.precision_at_k) << ','
      << detail::fmt_shortest(row.recall_at_k) << ','
      << detail::fmt_shortest(row.map_at_k) << ','
      << detail::fmt_shortest(row.pah_at_k) << ',' << row.k << ','
      << row.n_users_evaluated << '\n';
}

json stats_json(const DatasetStats& s) {
  return json{{"n_customers", s.n_customers},
              {"n_items", s.n_items},
              {"n_actions", s.n_actions},
              {"n_purchases", s.n_purchases},
              {"avg_interactions_per_customer", s.avg_interactions_per_customer},
              {"avg_purchases_per_customer", s.avg_purchases_per_customer},
              {"share_customers_lt3_actions", s.share_customers_lt3_actions},
              {"avg_product_margin", s.avg_product_margin},
              {"median_product_margin", s.median_product_margin},
              {"p75_actions_per_customer", s.p75_actions_per_customer},
              {"p95_actions_per_customer", s.p95_actions_per_customer}};
}

struct ValidateOpts {
  std::string interactions;
  std::string catalog;
};

void run_validate(const ValidateOpts& o) {
  const Dataset d = load_dataset(o.interactions, o.catalog);
  const std::vector<Violation> violations = validate_dataset(d);
  for (const Violation& v : violations) std::cout << v.message << '\n';
  if (!violations.empty()) {
    std::cerr << violations.size() << " violation(s) found\n";
    g_exit_code = 1;
  }
}

struct GenerateOpts {
  std::string preset;
  std::string out_dir;
  std::uint64_t n_customers = 0;
  std::uint64_t n_items = 0;
  std::uint64_t n_segments = 0;
  std::string segment_price_means;
  double margin_mean = 0.0;
  double margin_spread = 0.0;
  double interactions_mean = 0.0;
  double purchase_rate = 0.0;
  double price_affinity = 0.0;
  std::uint64_t seed = 0;

  CLI::Option* o_n_customers = nullptr;
  CLI::Option* o_n_items = nullptr;
  CLI::Option* o_n_segments = nullptr;
  CLI::Option* o_means = nullptr;
  CLI::Option* o_margin_mean = nullptr;
  CLI::Option* o_margin_spread = nullptr;
  CLI::Option* o_interactions_mean = nullptr;
  CLI::Option* o_purchase_rate = nullptr;
  CLI::Option* o_affinity = nullptr;
  CLI::Option* o_seed = nullptr;
};

std::vector<double> parse_means_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t consumed = 0;
      const double v = std::stod(part, &consumed);
      if (consumed != part.size()) throw std::invalid_argument(part);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError("segment price means: '" + part + "' is not a number");
    }
  }
  return out;
}

void run_generate(const GenerateOpts& o) {
  GenConfig cfg;
  if (o.preset == "fashion-large") {
    cfg = fashion_large_config();
  } else if (o.preset == "fashion-small") {
    cfg = fashion_small_config();
  } else if (!o.preset.empty()) {
    throw ValidationError("unknown preset '" + o.preset +
                          "' (expected fashion-large or fashion-small)");
  }
  if (o.o_n_customers->count() > 0) cfg.n_customers = o.n_customers;
  if (o.o_n_items->count() > 0) cfg.n_items = o.n_items;
  if (o.o_n_segments->count() > 0) cfg.n_segments = o.n_segments;
  if (o.o_means->count() > 0) {
    cfg.segment_price_means = parse_means_list(o.segment_price_means);
  }
  if (o.o_margin_mean->count() > 0) cfg.margin_mean = o.margin_mean;
  if (o.o_margin_spread->count() > 0) cfg.margin_spread = o.margin_spread;
  if (o.o_interactions_mean->count() > 0) {
    cfg.interactions_per_customer_mean = o.interactions_mean;
  }
  if (o.o_purchase_rate->count() > 0) cfg.purchase_rate = o.purchase_rate;
  if (o.o_affinity->count() > 0) cfg.price_affinity_strength = o.price_affinity;
  if (o.o_seed->count() > 0) cfg.seed = o.seed;

  const Dataset d = generate(cfg);

  fs::create_directories(o.out_dir);
  const std::string interactions_path = (fs::path(o.out_dir) / "interactions.csv").string();
  const std::string catalog_path = (fs::path(o.out_dir) / "catalog.csv").string();
  const std::string stats_path = (fs::path(o.out_dir) / "stats.json").string();
  const std::string manifest_path = (fs::path(o.out_dir) / "manifest.json").string();

  write_interactions_csv(interactions_path, d.interactions);
  write_catalog_csv(catalog_path, d.catalog);
  write_json_file(stats_path, stats_json(describe(d)));

  json manifest{
      {"format_version", kFormatVersion},
      {"command", "generate"},
      {"config",
       {{"n_customers", cfg.n_customers},
        {"n_items", cfg.n_items},
        {"n_segments", cfg.n_segments},
        {"segment_price_means", cfg.segment_price_means},
        {"margin_mean", cfg.margin_mean},
        {"margin_spread", cfg.margin_spread},
        {"interactions_per_customer_mean", cfg.interactions_per_customer_mean},
        {"purchase_rate", cfg.purchase_rate},
        {"price_affinity_strength", cfg.price_affinity_strength},
        {"seed", cfg.seed}}},
      {"outputs",
       {{"interactions", file_entry("interactions.csv", interactions_path)},
        {"catalog", file_entry("catalog.csv", catalog_path)},
        {"stats", file_entry("stats.json", stats_path)}}}};
  write_json_file(manifest_path, manifest);
}

struct TrainOpts {
  std::string interactions;
  std::string catalog;
  std::string out = "model.bin";
  double learning_rate = 0.05;
  std::uint64_t latent_dim = 50;
  std::uint64_t epochs = 50;
  std::uint64_t max_warp_trials = 100;
  double regularization = 0.0;
  double max_norm = 5.0;
  std::uint64_t seed = 42;
  double train_fraction = 0.8;
  bool split_per_customer = false;
};

void run_train(const TrainOpts& o) {
  const Dataset d = load_valid_dataset(o.interactions, o.catalog);
  const auto [train, test] =
      time_split(d, SplitSpec{o.train_fraction, o.split_per_customer});

  TrainConfig cfg;
  cfg.learning_rate = o.learning_rate;
  cfg.latent_dim = o.latent_dim;
  cfg.epochs = o.epochs;
  cfg.max_warp_trials = o.max_warp_trials;
  cfg.regularization = o.regularization;
  cfg.max_norm = o.max_norm;
  cfg.seed = o.seed;

  const TrainedModel model = fit(train, cfg);
  save_model(model, o.out);

  json manifest{
      {"format_version", kFormatVersion},
      {"command", "train"},
      {"inputs",
       {{"interactions", file_entry(o.interactions)},
        {"catalog", file_entry(o.catalog)}}},
      {"config",
       {{"learning_rate", cfg.learning_rate},
        {"latent_dim", cfg.latent_dim},
        {"epochs", cfg.epochs},
        {"max_warp_trials", cfg.max_warp_trials},
        {"regularization", cfg.regularization},
        {"max_norm", cfg.max_norm},
        {"seed", cfg.seed},
        {"train_fraction", o.train_fraction},
        {"split_per_customer", o.split_per_customer}}},
      {"split",
       {{"n_train_events", train.interactions.size()},
        {"n_test_events", test.interactions.size()}}},
      {"model",
       {{"path", o.out},
        {"fnv1a64", file_fnv1a64(o.out)},
        {"dim", model.params.dim},
        {"n_customers", model.params.n_customers},
        {"n_items", model.params.n_items}}}};
  write_json_file(o.out + ".manifest.json", manifest);
}

struct RecommendOpts {
  std::string model;
  std::string interactions;
  std::string catalog;
  std::string customer;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t k = 10;
  double train_fraction = 0.8;
  bool split_per_customer = false;
  bool baseline_only = false;
};

void run_recommend(const RecommendOpts& o) {
  const Dataset d = load_valid_dataset(o.interactions, o.catalog);
  const auto [train, test] =
      time_split(d, SplitSpec{o.train_fraction, o.split_per_customer});
  const TrainedModel model = load_model(o.model);
  const CustomerProfiles profiles = build_customer_profiles(train);
  const Recommender rec(model, profiles, train);
  if (rec.is_cold_start(o.customer)) {
    std::cerr << "warning: customer '" << o.customer
              << "' not seen in training; using item-bias-only scores\n";
  }
  const std::vector<ScoredItem> items =
      rec.recommend(o.customer, HyperParams{o.alpha, o.beta}, o.k, o.baseline_only);
  write_recommendations_csv(std::cout, o.customer, items);
}

struct EvaluateOpts {
  std::string model;
  std::string interactions;
  std::string catalog;
  std::string out;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t k = 10;
  double train_fraction = 0.8;
  bool split_per_customer = false;
  bool pah_literal = false;
};

void run_evaluate(const EvaluateOpts& o) {
  const Dataset d = load_valid_dataset(o.interactions, o.catalog);
  const auto [train, test] =
      time_split(d, SplitSpec{o.train_fraction, o.split_per_customer});
  const TrainedModel model = load_model(o.model);
  const CustomerProfiles profiles = build_customer_profiles(train);
  const Recommender rec(model, profiles, train);
  const PahMode mode = o.pah_literal ? PahMode::kLiteral : PahMode::kPerUserMean;
  const Evaluator ev(rec, test, o.k, mode);
  const MetricsRow row = ev.evaluate_cell(HyperParams{o.alpha, o.beta});
  write_metrics_row_csv(std::cout, row);

  if (!o.out.empty()) {
    json doc{{"format_version", kFormatVersion},
             {"command", "evaluate"},
             {"metadata",
              {{"model", file_entry(o.model)},
               {"interactions", file_entry(o.interactions)},
               {"catalog", file_entry(o.catalog)},
               {"train_fraction", o.train_fraction},
               {"split_per_customer", o.split_per_customer},
               {"k", o.k},
               {"pah_mode", o.pah_literal ? "literal" : "per_user_mean"}}},
             {"row", metrics_row_json(row)}};
    write_json_file(o.out, doc);
  }
}

struct SweepOpts {
  std::string model;
  std::string interactions;
  std::string catalog;
  std::string out_dir = "sweep_out";
  double alpha_lo = -1.0;
  double alpha_hi = 1.0;
  double beta_lo = -1.0;
  double beta_hi = 1.0;
  double step = 0.1;
  std::uint64_t k = 10;
  double train_fraction = 0.8;
  bool split_per_customer = false;
  bool pah_literal = false;
  std::uint64_t jobs = 0;  // 0 = number of processors
  std::uint64_t seed = 42;
};

void run_sweep(const SweepOpts& o) {
  const Dataset d = load_valid_dataset(o.interactions, o.catalog);
  const auto [train, test] =
      time_split(d, SplitSpec{o.train_fraction, o.split_per_customer});
  const TrainedModel model = load_model(o.model);
  const CustomerProfiles profiles = build_customer_profiles(train);
  const Recommender rec(model, profiles, train);
  const PahMode mode = o.pah_literal ? PahMode::kLiteral : PahMode::kPerUserMean;
  const Evaluator ev(rec, test, o.k, mode);

  std::size_t jobs = static_cast<std::size_t>(o.jobs);
  if (jobs == 0) {
    jobs = std::max(1u, std::thread::hardware_concurrency());
  }
  const SweepReport report = grid_sweep(ev, GridRange{o.alpha_lo, o.alpha_hi},
                                        GridRange{o.beta_lo, o.beta_hi}, o.step, jobs);

  fs::create_directories(o.out_dir);
  const std::string csv_path = (fs::path(o.out_dir) / "sweep.csv").string();
  const std::string long_path = (fs::path(o.out_dir) / "sweep_long.csv").string();
  const std::string json_path = (fs::path(o.out_dir) / "sweep.json").string();

  {
    std::ostringstream buf;
    write_sweep_csv(buf, report);
    write_text_file(csv_path, buf.str());
  }
  {
    std::ostringstream buf;
    write_sweep_long_csv(buf, report);
    write_text_file(long_path, buf.str());
  }

  // Worker count is deliberately left out of the report: it cannot affect
  // the rows, so it must not affect the bytes either.
  json doc{{"format_version", kFormatVersion},
           {"command", "sweep"},
           {"metadata",
            {{"model", file_entry(o.model)},
             {"interactions", file_entry(o.interactions)},
             {"catalog", file_entry(o.catalog)},
             {"train_fraction", o.train_fraction},
             {"split_per_customer", o.split_per_customer},
             {"k", o.k},
             {"step", o.step},
             {"alpha_range", json::array({o.alpha_lo, o.alpha_hi})},
             {"beta_range", json::array({o.beta_lo, o.beta_hi})},
             {"pah_mode", o.pah_literal ? "literal" : "per_user_mean"},
             {"seed", o.seed},
             {"n_users_with_test_purchases", ev.n_users()}}},
           {"rows", json::array()}};
  for (const MetricsRow& row : report.rows) {
    doc["rows"].push_back(metrics_row_json(row));
  }
  write_json_file(json_path, doc);
}

// A config file is a plain key=value list, one entry per line, with '#' or
// ';' starting a comment line. Keys are option names without the leading
// dashes. Values given on the command line always win over file values.

std::string trim_ws(std::string s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::pair<std::string, std::string>> read_config_pairs(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  while (std::getline(in, line)) {
    line = trim_ws(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line is not key=value: " + line);
    }
    std::string key = trim_ws(line.substr(0, eq));
    std::string value = trim_ws(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    const auto hit = std::find_if(pairs.begin(), pairs.end(),
                                  [&](const auto& p) { return p.first == key; });
    if (hit != pairs.end()) {
      hit->second = value;  // later lines override earlier ones
    } else {
      pairs.emplace_back(std::move(key), std::move(value));
    }
  }
  return pairs;
}

// Expands `--config FILE` by appending `--key=value` tokens for every file
// entry that names an option of the chosen subcommand and was not already
// given on the command line. Unknown keys are ignored so one file can serve
// several subcommands.
void expand_config_args(CLI::App& app, std::vector<std::string>& args) {
  if (args.empty() || args.front().empty() || args.front()[0] == '-') return;
  CLI::App* sub = app.get_subcommand_no_throw(args.front());
  if (sub == nullptr) return;

  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) return;

  const auto given = [&args](const std::string& flag) {
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };

  for (const auto& [key, value] : read_config_pairs(config_path)) {
    const std::string flag = "--" + key;
    CLI::Option* op = sub->get_option_no_throw(flag);
    if (op == nullptr || given(flag)) continue;
    if (op->get_items_expected_max() != 1 &&
        value.find(',') != std::string::npos) {
      std::stringstream ss(value);  // comma lists feed multi-value options
      std::string piece;
      while (std::getline(ss, piece, ',')) args.push_back(flag + "=" + trim_ws(piece));
    } else {
      args.push_back(flag + "=" + value);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Profit- and price-preference-aware recommender toolkit"};
  app.require_subcommand(1);

  // The option itself is a sink; expand_config_args below reads the file and
  // injects the values before CLI11 sees the argument list.
  auto add_config_flag = [](CLI::App* sub) {
    sub->add_option_function<std::string>(
        "--config", [](const std::string&) {}, "Read defaults from a key=value file");
  };

  auto validate_opts = std::make_shared<ValidateOpts>();
  CLI::App* cmd_validate = app.add_subcommand(
      "validate", "Check an interactions/catalog pair for data violations");
  add_config_flag(cmd_validate);
  cmd_validate->add_option("--interactions", validate_opts->interactions,
                           "Interactions CSV path")->required();
  cmd_validate->add_option("--catalog", validate_opts->catalog, "Catalog CSV path")
      ->required();
  cmd_validate->callback([validate_opts]() { run_validate(*validate_opts); });

  auto generate_opts = std::make_shared<GenerateOpts>();
  CLI::App* cmd_generate =
      app.add_subcommand("generate", "Generate a synthetic dataset");
  add_config_flag(cmd_generate);
  cmd_generate->add_option("--preset", generate_opts->preset,
                           "Start from a named config: fashion-large or fashion-small");
  cmd_generate->add_option("--out", generate_opts->out_dir, "Output directory")
      ->required();
  generate_opts->o_n_customers =
      cmd_generate->add_option("--n-customers", generate_opts->n_customers,
                               "Number of customers");
  generate_opts->o_n_items =
      cmd_generate->add_option("--n-items", generate_opts->n_items, "Number of items");
  generate_opts->o_n_segments = cmd_generate->add_option(
      "--n-segments", generate_opts->n_segments, "Number of price segments");
  generate_opts->o_means = cmd_generate->add_option(
      "--segment-price-means", generate_opts->segment_price_means,
      "Comma-separated segment mean prices, e.g. 40,90,220");
  generate_opts->o_margin_mean = cmd_generate->add_option(
      "--margin-mean", generate_opts->margin_mean, "Mean relative item margin");
  generate_opts->o_margin_spread = cmd_generate->add_option(
      "--margin-spread", generate_opts->margin_spread, "Margin standard deviation");
  generate_opts->o_interactions_mean = cmd_generate->add_option(
      "--interactions-mean", generate_opts->interactions_mean,
      "Mean events per customer");
  generate_opts->o_purchase_rate = cmd_generate->add_option(
      "--purchase-rate", generate_opts->purchase_rate,
      "Base probability that an event is a purchase");
  generate_opts->o_affinity = cmd_generate->add_option(
      "--price-affinity", generate_opts->price_affinity,
      "Strength of the segment price preference (0 = none)");
  generate_opts->o_seed =
      cmd_generate->add_option("--seed", generate_opts->seed, "Generator seed");
  cmd_generate->callback([generate_opts]() { run_generate(*generate_opts); });

  auto train_opts = std::make_shared<TrainOpts>();
  CLI::App* cmd_train =
      app.add_subcommand("train", "Fit the ranking model on the train split");
  add_config_flag(cmd_train);
  cmd_train->add_option("--interactions", train_opts->interactions,
                        "Interactions CSV path")->required();
  cmd_train->add_option("--catalog", train_opts->catalog, "Catalog CSV path")
      ->required();
  cmd_train->add_option("--out", train_opts->out, "Model output path");
  cmd_train->add_option("--learning-rate", train_opts->learning_rate,
                        "SGD learning rate");
  cmd_train->add_option("--latent-dim", train_opts->latent_dim,
                        "Latent dimensionality");
  cmd_train->add_option("--epochs", train_opts->epochs,
                        "Training epochs (0 keeps the random initialization)");
  cmd_train->add_option("--max-warp-trials", train_opts->max_warp_trials,
                        "Negative-sampling budget per update");
  cmd_train->add_option("--regularization", train_opts->regularization,
                        "L2 weight decay");
  cmd_train->add_option("--max-norm", train_opts->max_norm,
                        "L2 cap on factor rows");
  cmd_train->add_option("--seed", train_opts->seed, "Training seed");
  cmd_train->add_option("--train-fraction", train_opts->train_fraction,
                        "Chronological share of events used for training");
  cmd_train->add_flag("--split-per-customer", train_opts->split_per_customer,
                      "Cut each customer's own timeline instead of the global one");
  cmd_train->callback([train_opts]() { run_train(*train_opts); });

  auto recommend_opts = std::make_shared<RecommendOpts>();
  CLI::App* cmd_recommend = app.add_subcommand(
      "recommend", "Print top-k recommendations for one customer as CSV");
  add_config_flag(cmd_recommend);
  cmd_recommend->add_option("--model", recommend_opts->model, "Model file path")
      ->required();
  cmd_recommend->add_option("--interactions", recommend_opts->interactions,
                            "Interactions CSV path")->required();
  cmd_recommend->add_option("--catalog", recommend_opts->catalog, "Catalog CSV path")
      ->required();
  cmd_recommend->add_option("--customer", recommend_opts->customer, "Customer id")
      ->required();
  cmd_recommend->add_option("--alpha", recommend_opts->alpha,
                            "Profit influence in [-1, 1]");
  cmd_recommend->add_option("--beta", recommend_opts->beta,
                            "Price-preference influence in [-1, 1]");
  cmd_recommend->add_option("--k", recommend_opts->k, "Number of items to return");
  cmd_recommend->add_option("--train-fraction", recommend_opts->train_fraction,
                            "Chronological share of events treated as history");
  cmd_recommend->add_flag("--split-per-customer", recommend_opts->split_per_customer,
                          "Cut each customer's own timeline instead of the global one");
  cmd_recommend->add_flag("--baseline-only", recommend_opts->baseline_only,
                          "Skip the price adjustment (multiplier pinned to 1)");
  cmd_recommend->callback([recommend_opts]() { run_recommend(*recommend_opts); });

  auto evaluate_opts = std::make_shared<EvaluateOpts>();
  CLI::App* cmd_evaluate = app.add_subcommand(
      "evaluate", "Compute ranking and profit metrics on the test split");
  add_config_flag(cmd_evaluate);
  cmd_evaluate->add_option("--model", evaluate_opts->model, "Model file path")
      ->required();
  cmd_evaluate->add_option("--interactions", evaluate_opts->interactions,
                           "Interactions CSV path")->required();
  cmd_evaluate->add_option("--catalog", evaluate_opts->catalog, "Catalog CSV path")
      ->required();
  cmd_evaluate->add_option("--alpha", evaluate_opts->alpha,
                           "Profit influence in [-1, 1]");
  cmd_evaluate->add_option("--beta", evaluate_opts->beta,
                           "Price-preference influence in [-1, 1]");
  cmd_evaluate->add_option("--k", evaluate_opts->k, "Cutoff for the @k metrics");
  cmd_evaluate->add_option("--train-fraction", evaluate_opts->train_fraction,
                           "Chronological share of events used for training");
  cmd_evaluate->add_flag("--split-per-customer", evaluate_opts->split_per_customer,
                         "Cut each customer's own timeline instead of the global one");
  cmd_evaluate->add_flag("--pah-literal", evaluate_opts->pah_literal,
                         "Use the double-discounted profit-at-hit denominator");
  cmd_evaluate->add_option("--out", evaluate_opts->out,
                           "Optional JSON report path");
  cmd_evaluate->callback([evaluate_opts]() { run_evaluate(*evaluate_opts); });

  auto sweep_opts = std::make_shared<SweepOpts>();
  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep", "Evaluate every (alpha, beta) grid cell and write reports");
  add_config_flag(cmd_sweep);
  cmd_sweep->add_option("--model", sweep_opts->model, "Model file path")->required();
  cmd_sweep->add_option("--interactions", sweep_opts->interactions,
                        "Interactions CSV path")->required();
  cmd_sweep->add_option("--catalog", sweep_opts->catalog, "Catalog CSV path")
      ->required();
  cmd_sweep->add_option("--out", sweep_opts->out_dir, "Output directory");
  cmd_sweep->add_option("--alpha-lo", sweep_opts->alpha_lo, "Lowest alpha");
  cmd_sweep->add_option("--alpha-hi", sweep_opts->alpha_hi, "Highest alpha");
  cmd_sweep->add_option("--beta-lo", sweep_opts->beta_lo, "Lowest beta");
  cmd_sweep->add_option("--beta-hi", sweep_opts->beta_hi, "Highest beta");
  cmd_sweep->add_option("--step", sweep_opts->step, "Grid step");
  cmd_sweep->add_option("--k", sweep_opts->k, "Cutoff for the @k metrics");
  cmd_sweep->add_option("--train-fraction", sweep_opts->train_fraction,
                        "Chronological share of events used for training");
  cmd_sweep->add_flag("--split-per-customer", sweep_opts->split_per_customer,
                      "Cut each customer's own timeline instead of the global one");
  cmd_sweep->add_flag("--pah-literal", sweep_opts->pah_literal,
                      "Use the double-discounted profit-at-hit denominator");
  cmd_sweep->add_option("--jobs", sweep_opts->jobs,
                        "Worker threads (0 = number of processors)");
  cmd_sweep->add_option("--seed", sweep_opts->seed,
                        "Seed recorded in the report metadata");
  cmd_sweep->callback([sweep_opts]() { run_sweep(*sweep_opts); });

  app.name(fs::path(argv[0]).filename().string());
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    expand_config_args(app, args);
    std::reverse(args.begin(), args.end());  // App::parse wants reversed tokens
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::logic_error& e) {  // out_of_range, invalid_argument
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::runtime_error& e) {  // training divergence and kin
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return g_exit_code;
}
