// End-to-end tests that drive the command-line binary as a subprocess.
// Usage: cli_tests <path-to-cli> <scratch-dir>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pricerank/pricerank.hpp"

#include "../support/proc.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace pricerank;
using testsupport::CommandResult;
using testsupport::read_file;
using testsupport::write_file;

namespace {

std::string g_cli;
std::string g_scratch;
int g_checks = 0;
int g_failures = 0;

void check(bool ok, const std::string& label) {
  ++g_checks;
  if (!ok) {
    ++g_failures;
    std::cout << "[FAIL] " << label << '\n';
  }
}

CommandResult run(const std::string& args) {
  return testsupport::run_command(g_cli + " " + args, g_scratch);
}

std::string path_in_scratch(const std::string& name) {
  return (fs::path(g_scratch) / name).string();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(part);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

/// Data rows of a CSV body (header dropped), split into fields.
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  const std::vector<std::string> lines = split_lines(text);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (!lines[i].empty()) rows.push_back(split_fields(lines[i]));
  }
  return rows;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

void test_validate() {
  const std::string good_inter = path_in_scratch("good_inter.csv");
  const std::string good_cat = path_in_scratch("good_cat.csv");
  write_file(good_inter,
             "customer_id,item_id,action,timestamp\n"
             "u1,A,view,100\n"
             "u1,A,purchase,110\n");
  write_file(good_cat,
             "item_id,retail_price,price\n"
             "A,10.00,5.00\n");

  CommandResult r = run("validate --interactions " + good_inter + " --catalog " + good_cat);
  check(r.exit_code == 0, "validate: clean pair exits 0");
  check(r.out.empty(), "validate: clean pair prints nothing");

  const std::string bad_inter = path_in_scratch("bad_inter.csv");
  write_file(bad_inter,
             "customer_id,item_id,action,timestamp\n"
             "u1,ghost,view,100\n"
             "u1,A,view,-5\n");
  r = run("validate --interactions " + bad_inter + " --catalog " + good_cat);
  check(r.exit_code == 1, "validate: violations exit 1");
  check(r.out.find("ghost") != std::string::npos, "validate: names the unknown item");
  check(r.err.find("violation") != std::string::npos, "validate: stderr counts violations");

  r = run("validate --interactions " + path_in_scratch("nope.csv") + " --catalog " + good_cat);
  check(r.exit_code == 2, "validate: missing file exits 2");

  const std::string bad_header = path_in_scratch("bad_header.csv");
  write_file(bad_header, "who,what,when\nu1,A,view,100\n");
  r = run("validate --interactions " + bad_header + " --catalog " + good_cat);
  check(r.exit_code == 2, "validate: malformed header exits 2");
}

void test_generate() {
  const std::string dir_a = path_in_scratch("gen_a");
  const std::string dir_b = path_in_scratch("gen_b");
  const std::string flags =
      " --preset fashion-small --n-customers 150 --n-items 60 --seed 9";
  CommandResult r = run("generate --out " + dir_a + flags);
  check(r.exit_code == 0, "generate: preset run exits 0");
  r = run("generate --out " + dir_b + flags);
  check(r.exit_code == 0, "generate: second run exits 0");

  for (const char* name : {"interactions.csv", "catalog.csv", "stats.json", "manifest.json"}) {
    const std::string a = read_file((fs::path(dir_a) / name).string());
    const std::string b = read_file((fs::path(dir_b) / name).string());
    check(!a.empty(), std::string("generate: ") + name + " non-empty");
    check(a == b, std::string("generate: ") + name + " identical across reruns");
  }

  const json stats = json::parse(read_file((fs::path(dir_a) / "stats.json").string()));
  check(stats.at("n_customers").get<std::size_t>() == 150,
        "generate: stats count matches the flag override");
  check(stats.at("n_items").get<std::size_t>() == 60, "generate: item count override");

  const json manifest = json::parse(read_file((fs::path(dir_a) / "manifest.json").string()));
  check(manifest.at("config").at("seed").get<std::uint64_t>() == 9,
        "generate: manifest records the seed");
  check(manifest.at("outputs").at("interactions").contains("fnv1a64"),
        "generate: manifest hashes outputs");

  r = run("generate --out " + path_in_scratch("gen_c") + " --preset no-such-preset");
  check(r.exit_code == 1, "generate: unknown preset exits 1");

  r = run("validate --interactions " + (fs::path(dir_a) / "interactions.csv").string() +
          " --catalog " + (fs::path(dir_a) / "catalog.csv").string());
  check(r.exit_code == 0, "generate: output passes validate");
}

void test_train() {
  const std::string inter = (fs::path(path_in_scratch("gen_a")) / "interactions.csv").string();
  const std::string cat = (fs::path(path_in_scratch("gen_a")) / "catalog.csv").string();
  const std::string model_path = path_in_scratch("model.bin");
  const std::string cmd = "train --interactions " + inter + " --catalog " + cat +
                          " --out " + model_path +
                          " --latent-dim 8 --epochs 3 --seed 42";
  CommandResult r = run(cmd);
  check(r.exit_code == 0, "train: exits 0");
  const std::string model_bytes = read_file(model_path);
  const std::string manifest_bytes = read_file(model_path + ".manifest.json");
  check(!model_bytes.empty(), "train: model file written");
  check(!manifest_bytes.empty(), "train: manifest written");

  r = run(cmd);
  check(r.exit_code == 0, "train: rerun exits 0");
  check(read_file(model_path) == model_bytes, "train: rerun model byte-identical");
  check(read_file(model_path + ".manifest.json") == manifest_bytes,
        "train: rerun manifest byte-identical");

  const json manifest = json::parse(manifest_bytes);
  check(manifest.at("model").at("dim").get<std::size_t>() == 8,
        "train: manifest records the dimensionality");
  check(manifest.at("config").at("seed").get<std::uint64_t>() == 42,
        "train: manifest records the seed");

  // Zero epochs must reproduce the seeded initialization exactly.
  const std::string init_path = path_in_scratch("model_init.bin");
  r = run("train --interactions " + inter + " --catalog " + cat + " --out " +
          init_path + " --latent-dim 6 --epochs 0 --seed 7");
  check(r.exit_code == 0, "train: zero-epoch run exits 0");
  const TrainedModel loaded = load_model(init_path);
  const Dataset d = load_dataset(inter, cat);
  const auto [train_split, test_split] = time_split(d, SplitSpec{0.8});
  std::set<std::string> customers;
  for (const Interaction& ev : train_split.interactions) customers.insert(ev.customer_id);
  TrainConfig cfg;
  cfg.latent_dim = 6;
  cfg.epochs = 0;
  cfg.seed = 7;
  const ModelParams expected =
      init_model(customers.size(), train_split.catalog.size(), cfg);
  check(loaded.params.dim == expected.dim, "train: zero-epoch dim matches");
  check(loaded.params.customer_factors == expected.customer_factors,
        "train: zero-epoch customer factors match the seeded init");
  check(loaded.params.item_factors == expected.item_factors,
        "train: zero-epoch item factors match the seeded init");
  check(loaded.params.customer_bias == expected.customer_bias &&
            loaded.params.item_bias == expected.item_bias,
        "train: zero-epoch biases match the seeded init");
  check(loaded.customer_ids == std::vector<std::string>(customers.begin(), customers.end()),
        "train: model lists train-split customers in order");

  r = run("train --interactions " + inter + " --catalog " + cat + " --out " +
          path_in_scratch("m.bin") + " --learning-rate 0");
  check(r.exit_code == 1, "train: non-positive learning rate exits 1");
}

std::string warm_customer() {
  // The customer holding the earliest event is guaranteed to land in train.
  const std::string inter = (fs::path(path_in_scratch("gen_a")) / "interactions.csv").string();
  const std::vector<std::vector<std::string>> rows = csv_rows(read_file(inter));
  std::string best_customer;
  long long best_ts = 0;
  bool first = true;
  for (const auto& row : rows) {
    const long long ts = std::stoll(row[3]);
    if (first || ts < best_ts) {
      best_ts = ts;
      best_customer = row[0];
      first = false;
    }
  }
  return best_customer;
}

void test_recommend() {
  const std::string inter = (fs::path(path_in_scratch("gen_a")) / "interactions.csv").string();
  const std::string cat = (fs::path(path_in_scratch("gen_a")) / "catalog.csv").string();
  const std::string model_path = path_in_scratch("model.bin");
  const std::string base = "recommend --model " + model_path + " --interactions " +
                           inter + " --catalog " + cat;
  const std::string customer = warm_customer();

  CommandResult r = run(base + " --customer " + customer);
  check(r.exit_code == 0, "recommend: warm customer exits 0");
  check(r.err.empty(), "recommend: warm customer gets no warning");
  const std::vector<std::string> lines = split_lines(r.out);
  check(!lines.empty() &&
            lines[0] == "customer_id,rank,item_id,baseline_score,multiplier,final_score",
        "recommend: header");
  check(csv_rows(r.out).size() == 10, "recommend: default k yields 10 rows");
  const auto rows = csv_rows(r.out);
  bool ranks_ok = rows.size() == 10;
  for (std::size_t i = 0; i < rows.size() && ranks_ok; ++i) {
    ranks_ok = rows[i][0] == customer && rows[i][1] == std::to_string(i + 1);
  }
  check(ranks_ok, "recommend: rank column counts from 1");

  const CommandResult zero = run(base + " --customer " + customer + " --alpha 0 --beta 0");
  const CommandResult flat = run(base + " --customer " + customer + " --baseline-only");
  const auto zero_rows = csv_rows(zero.out);
  const auto flat_rows = csv_rows(flat.out);
  bool same_items = zero_rows.size() == flat_rows.size();
  bool multipliers_ok = same_items;
  for (std::size_t i = 0; i < zero_rows.size() && same_items; ++i) {
    same_items = zero_rows[i][2] == flat_rows[i][2];
    multipliers_ok = multipliers_ok && zero_rows[i][4] == "2" && flat_rows[i][4] == "1";
  }
  check(same_items, "recommend: zero cell ranks exactly like baseline-only");
  check(multipliers_ok, "recommend: multiplier columns print 2 and 1");

  r = run(base + " --customer nosuchcustomer --k 4");
  check(r.exit_code == 0, "recommend: cold start exits 0");
  check(r.err.find("not seen in training") != std::string::npos,
        "recommend: cold start warns on stderr");
  check(csv_rows(r.out).size() == 4, "recommend: --k bounds the row count");

  r = run(base + " --customer " + customer + " --alpha 1.5");
  check(r.exit_code == 1, "recommend: out-of-range alpha exits 1");
  r = run("recommend --model " + path_in_scratch("no_model.bin") + " --interactions " +
          inter + " --catalog " + cat + " --customer " + customer);
  check(r.exit_code == 2, "recommend: missing model exits 2");
}

struct FixtureFiles {
  std::string model;
  std::string interactions;
  std::string catalog;
};

/// A five-item catalog with known baselines (via item biases), one warm
/// customer, and a 120.0 global average price.
FixtureFiles write_fixture() {
  FixtureFiles f;
  f.model = path_in_scratch("fixture_model.bin");
  f.interactions = path_in_scratch("fixture_inter.csv");
  f.catalog = path_in_scratch("fixture_cat.csv");

  TrainedModel m;
  m.params.dim = 1;
  m.params.n_customers = 1;
  m.params.n_items = 5;
  m.customer_ids = {"u0"};
  m.customer_index.emplace("u0", 0);
  m.params.customer_factors = {0.0};
  m.params.customer_bias = {0.0};
  const std::vector<std::pair<std::string, double>> items = {
      {"A", 0.30}, {"B", 0.50}, {"C", 0.40}, {"D", 0.45}, {"E", 0.20}};
  for (std::size_t i = 0; i < items.size(); ++i) {
    m.item_ids.push_back(items[i].first);
    m.item_index.emplace(items[i].first, i);
    m.params.item_factors.push_back(0.0);
    m.params.item_bias.push_back(logit(items[i].second));
  }
  save_model(m, f.model);

  write_file(f.interactions,
             "customer_id,item_id,action,timestamp\n"
             "u0,D,purchase,100\n");
  write_file(f.catalog,
             "item_id,retail_price,price\n"
             "A,100.00,50.00\n"
             "B,200.00,210.00\n"
             "C,60.00,20.00\n"
             "D,120.00,120.00\n"
             "E,300.00,100.00\n");
  return f;
}

void test_recommend_fixture() {
  const FixtureFiles f = write_fixture();
  const std::string base = "recommend --model " + f.model + " --interactions " +
                           f.interactions + " --catalog " + f.catalog;

  CommandResult r = run(base + " --customer ghost --alpha 0.6 --beta -0.4 --k 5");
  check(r.exit_code == 0, "fixture: cold-start recommend exits 0");
  const auto rows = csv_rows(r.out);
  check(rows.size() == 5, "fixture: five rows");

  const std::vector<std::string> want_order = {"B", "C", "D", "A", "E"};
  const std::vector<double> want_multiplier = {
      1.9169357488375052, 2.3760472874443797, 2.0,
      2.1886809086375738, 2.1296798423422962};
  const std::vector<double> want_final = {
      0.95846787441875259, 0.95041891497775188, 0.9,
      0.65660427259127208, 0.42593596846845927};
  bool order_ok = rows.size() == 5;
  bool values_ok = order_ok;
  for (std::size_t i = 0; i < rows.size() && order_ok; ++i) {
    order_ok = rows[i][2] == want_order[i];
    values_ok = values_ok &&
                std::fabs(std::stod(rows[i][4]) - want_multiplier[i]) < 1e-9 &&
                std::fabs(std::stod(rows[i][5]) - want_final[i]) < 1e-9;
  }
  check(order_ok, "fixture: price-aware order is B,C,D,A,E");
  check(values_ok, "fixture: multipliers and final scores match hand computation");

  r = run(base + " --customer u0 --alpha 0.6 --beta -0.4 --k 5");
  const auto u0_rows = csv_rows(r.out);
  bool excluded = u0_rows.size() == 4;
  for (const auto& row : u0_rows) excluded = excluded && row[2] != "D";
  check(excluded, "fixture: purchased item excluded for its buyer");
}

void test_config_file() {
  const FixtureFiles f = write_fixture();
  const std::string cfg_path = path_in_scratch("rec.cfg");
  write_file(cfg_path,
             "alpha=0.6\n"
             "beta=-0.4\n"
             "k=3\n"
             "mystery=1\n");
  const std::string base = "recommend --model " + f.model + " --interactions " +
                           f.interactions + " --catalog " + f.catalog +
                           " --customer ghost --config " + cfg_path;

  CommandResult r = run(base);
  check(r.exit_code == 0, "config: unknown keys are tolerated");
  auto rows = csv_rows(r.out);
  check(rows.size() == 3, "config: k comes from the file");
  check(rows.size() == 3 && rows[0][2] == "B" && rows[1][2] == "C" && rows[2][2] == "D",
        "config: alpha and beta come from the file");

  r = run(base + " --alpha 0 --beta 0");
  rows = csv_rows(r.out);
  check(rows.size() == 3 && rows[0][2] == "B" && rows[1][2] == "D" && rows[2][2] == "C",
        "config: command-line flags override file values");
  check(rows.size() == 3 && rows[0][4] == "2", "config: overridden cell is the zero cell");
}

void test_evaluate() {
  const std::string inter = (fs::path(path_in_scratch("gen_a")) / "interactions.csv").string();
  const std::string cat = (fs::path(path_in_scratch("gen_a")) / "catalog.csv").string();
  const std::string model_path = path_in_scratch("model.bin");
  const std::string base = "evaluate --model " + model_path + " --interactions " +
                           inter + " --catalog " + cat;

  CommandResult a = run(base + " --alpha 0 --beta 0");
  check(a.exit_code == 0, "evaluate: exits 0");
  CommandResult b = run(base + " --alpha 0 --beta 0");
  check(a.out == b.out, "evaluate: rerun output byte-identical");
  const std::vector<std::string> lines = split_lines(a.out);
  check(lines.size() == 2 && lines[0] == "alpha,beta,precision,recall,map,pah,k,n_users",
        "evaluate: header plus one row");

  const std::string json_path = path_in_scratch("eval.json");
  CommandResult r = run(base + " --alpha 0.5 --beta -0.5 --out " + json_path);
  check(r.exit_code == 0, "evaluate: JSON report run exits 0");
  const json doc = json::parse(read_file(json_path));
  check(doc.at("row").at("alpha").get<double>() == 0.5, "evaluate: JSON row alpha");
  check(doc.at("row").at("k").get<std::size_t>() == 10, "evaluate: JSON row k");
  check(doc.at("metadata").at("model").contains("fnv1a64"),
        "evaluate: JSON metadata hashes the model");
  const auto row_fields = csv_rows(r.out);
  check(row_fields.size() == 1 &&
            std::stod(row_fields[0][2]) == doc.at("row").at("precision").get<double>(),
        "evaluate: CSV and JSON agree on precision");

  r = run(base + " --alpha 2 --beta 0");
  check(r.exit_code == 1, "evaluate: out-of-range alpha exits 1");
  r = run("evaluate --model " + path_in_scratch("no_model.bin") + " --interactions " +
          inter + " --catalog " + cat);
  check(r.exit_code == 2, "evaluate: missing model exits 2");
}

void test_sweep() {
  const std::string inter = (fs::path(path_in_scratch("gen_a")) / "interactions.csv").string();
  const std::string cat = (fs::path(path_in_scratch("gen_a")) / "catalog.csv").string();
  const std::string model_path = path_in_scratch("model.bin");
  const std::string base = "sweep --model " + model_path + " --interactions " + inter +
                           " --catalog " + cat;

  const std::string dir_a = path_in_scratch("sweep_a");
  const std::string dir_b = path_in_scratch("sweep_b");
  CommandResult r = run(base + " --out " + dir_a + " --jobs 1");
  check(r.exit_code == 0, "sweep: serial run exits 0");
  const std::string csv_a = read_file((fs::path(dir_a) / "sweep.csv").string());
  const std::string long_a = read_file((fs::path(dir_a) / "sweep_long.csv").string());
  const std::string json_a = read_file((fs::path(dir_a) / "sweep.json").string());

  r = run(base + " --out " + dir_b + " --jobs 4");
  check(r.exit_code == 0, "sweep: threaded run exits 0");
  check(read_file((fs::path(dir_b) / "sweep.csv").string()) == csv_a,
        "sweep: worker count cannot change the wide CSV");
  check(read_file((fs::path(dir_b) / "sweep_long.csv").string()) == long_a,
        "sweep: worker count cannot change the long CSV");
  check(read_file((fs::path(dir_b) / "sweep.json").string()) == json_a,
        "sweep: worker count cannot change the JSON report");

  r = run(base + " --out " + dir_a + " --jobs 2");
  check(read_file((fs::path(dir_a) / "sweep.csv").string()) == csv_a,
        "sweep: rerun report byte-identical");

  check(split_lines(csv_a).size() == 442, "sweep: default grid yields 441 rows");
  check(split_lines(long_a).size() == 1765, "sweep: long format has 4 rows per cell");

  const json doc = json::parse(json_a);
  check(doc.at("rows").size() == 441, "sweep: JSON carries all rows");
  check(doc.at("rows")[220].at("alpha").get<double>() == 0.0 &&
            doc.at("rows")[220].at("beta").get<double>() == 0.0,
        "sweep: center cell sits at index 220");
  check(doc.at("metadata").at("interactions").contains("fnv1a64"),
        "sweep: metadata hashes the dataset");

  // A single-cell sweep at the origin must reproduce the evaluate row.
  const std::string dir_c = path_in_scratch("sweep_c");
  r = run(base + " --out " + dir_c +
          " --alpha-lo 0 --alpha-hi 0 --beta-lo 0 --beta-hi 0");
  const auto cell_lines = split_lines(read_file((fs::path(dir_c) / "sweep.csv").string()));
  const CommandResult eval_zero = run("evaluate --model " + model_path +
                                      " --interactions " + inter + " --catalog " + cat +
                                      " --alpha 0 --beta 0");
  const auto eval_lines = split_lines(eval_zero.out);
  check(cell_lines.size() == 2 && eval_lines.size() == 2 && cell_lines[1] == eval_lines[1],
        "sweep: origin cell row equals the standalone evaluation row");

  r = run(base + " --out " + path_in_scratch("sweep_bad") + " --step 0");
  check(r.exit_code == 1, "sweep: zero step exits 1");
}

void test_cli_surface() {
  CommandResult r = run("");
  check(r.exit_code == 2, "cli: missing subcommand exits 2");
  r = run("--help");
  check(r.exit_code == 0, "cli: --help exits 0");
  check(r.out.find("validate") != std::string::npos &&
            r.out.find("sweep") != std::string::npos,
        "cli: --help lists subcommands");
  r = run("evaluate --help");
  check(r.exit_code == 0, "cli: subcommand --help exits 0");
  r = run("train --no-such-flag");
  check(r.exit_code == 2, "cli: unknown flag exits 2");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: cli_tests <cli-path> <scratch-dir>\n";
    return 2;
  }
  g_cli = argv[1];
  g_scratch = argv[2];
  fs::create_directories(g_scratch);

  test_validate();
  test_generate();
  test_train();
  test_recommend();
  test_recommend_fixture();
  test_config_file();
  test_evaluate();
  test_sweep();
  test_cli_surface();

  std::cout << (g_checks - g_failures) << "/" << g_checks << " checks passed\n";
  return g_failures == 0 ? 0 : 1;
}
