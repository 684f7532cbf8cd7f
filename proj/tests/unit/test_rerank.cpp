#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "pricerank/rerank.hpp"

using namespace pricerank;
using Catch::Matchers::WithinAbs;

TEST_CASE("profit term at unit ratio is one", "[rerank]") {
  REQUIRE(profit_term(100.0, 100.0, 1.0) == 1.0);
  REQUIRE(profit_term(37.5, 37.5, -0.6) == 1.0);
}

TEST_CASE("profit term matches hand-derived values", "[rerank]") {
  // 1 + log10(0.1 + 0.9 * 2) = 1 + log10(1.9)
  REQUIRE_THAT(profit_term(100.0, 50.0, 1.0),
               WithinAbs(1.2787536009528290, 1e-12));
  // Reciprocal of the value above.
  REQUIRE_THAT(profit_term(100.0, 50.0, -1.0),
               WithinAbs(0.7820114830995407, 1e-12));
  // Below-cost item: 1 + log10(0.1 + 0.09) = 1 + log10(0.19)
  REQUIRE_THAT(profit_term(10.0, 100.0, 1.0),
               WithinAbs(0.2787536009528290, 1e-12));
}

TEST_CASE("profit term is monotone in the margin ratio", "[rerank]") {
  REQUIRE(profit_term(120.0, 50.0, 1.0) > profit_term(100.0, 50.0, 1.0));
  REQUIRE(profit_term(120.0, 50.0, -1.0) < profit_term(100.0, 50.0, -1.0));
  REQUIRE(profit_term(120.0, 50.0, 0.0) == 1.0);
}

TEST_CASE("profit term validates its inputs", "[rerank]") {
  REQUIRE_THROWS_AS(profit_term(0.0, 50.0, 1.0), ValidationError);
  REQUIRE_THROWS_AS(profit_term(100.0, -1.0, 1.0), ValidationError);
  REQUIRE_THROWS_AS(profit_term(100.0, 50.0, 1.5), ValidationError);
}

TEST_CASE("preference term matches hand-derived values", "[rerank]") {
  REQUIRE(preference_term(100.0, 100.0, 0.7) == 1.0);
  // 1 + log10(0.1 + 0.45) = 1 + log10(0.55)
  REQUIRE_THAT(preference_term(100.0, 200.0, 1.0),
               WithinAbs(0.7403626894942438, 1e-12));
  REQUIRE(preference_term(83.0, 191.0, 0.0) == 1.0);
  REQUIRE_THROWS_AS(preference_term(100.0, 0.0, 1.0), ValidationError);
}

TEST_CASE("adjustment collapses to exactly two at zero exponents", "[rerank]") {
  AdjustmentInputs in;
  in.retail_price_i = 73.19;
  in.price_i = 12.07;
  in.avg_retail_price_u = 310.55;
  in.hyper = {0.0, 0.0};
  REQUIRE(adjust_score(in) == 2.0);

  // Unit ratios also pin the score to 2 for any exponents.
  in.price_i = in.retail_price_i;
  in.avg_retail_price_u = in.retail_price_i;
  in.hyper = {0.83, -0.41};
  REQUIRE(adjust_score(in) == 2.0);
}

TEST_CASE("adjustment sums the two terms", "[rerank]") {
  AdjustmentInputs in;
  in.retail_price_i = 100.0;
  in.price_i = 50.0;
  in.avg_retail_price_u = 200.0;
  in.hyper = {1.0, 1.0};
  REQUIRE_THAT(adjust_score(in), WithinAbs(2.0191162904470728, 1e-12));
}

TEST_CASE("combine scales the baseline", "[rerank]") {
  REQUIRE(combine(1.7, 0.0) == 0.0);
  REQUIRE(combine(2.0, 0.4) == 0.8);
}

TEST_CASE("top_n orders by score then id", "[rerank]") {
  std::vector<ScoredItem> scored = {
      {"c", 0.0, 1.0, 0.1},
      {"a", 0.0, 1.0, 0.5},
      {"b", 0.0, 1.0, 0.3},
  };
  const auto top2 = top_n(scored, 2);
  REQUIRE(top2.size() == 2);
  REQUIRE(top2[0].item_id == "a");
  REQUIRE(top2[1].item_id == "b");

  const auto all = top_n(scored, 10);
  REQUIRE(all.size() == 3);
  REQUIRE(all[2].item_id == "c");

  std::vector<ScoredItem> tied = {
      {"zz", 0.0, 1.0, 0.4},
      {"aa", 0.0, 1.0, 0.4},
  };
  const auto ordered = top_n(tied, 2);
  REQUIRE(ordered[0].item_id == "aa");
  REQUIRE(ordered[1].item_id == "zz");

  REQUIRE_THROWS_AS(top_n(scored, 0), ValidationError);
}

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

/// Five items with hand-set prices and baseline scores, served to a
/// cold-start customer via item biases (sigmoid(logit(s)) == s).
struct FiveItemWorld {
  TrainedModel model;
  CustomerProfiles profiles;
  Dataset train;
  Recommender make() const { return Recommender(model, profiles, train); }

  FiveItemWorld() {
    const struct {
      const char* id;
      double retail;
      double price;
      double baseline;
    } rows[] = {
        {"A", 100.0, 50.0, 0.30},  {"B", 200.0, 210.0, 0.50},
        {"C", 60.0, 20.0, 0.40},   {"D", 120.0, 120.0, 0.45},
        {"E", 300.0, 100.0, 0.20},
    };
    model.params.dim = 1;
    model.params.n_customers = 1;
    model.params.n_items = 5;
    model.params.customer_factors = {0.0};
    model.params.customer_bias = {0.0};
    model.customer_ids = {"u0"};
    model.customer_index = {{"u0", 0}};
    for (const auto& r : rows) {
      model.item_ids.push_back(r.id);
      model.item_index.emplace(r.id, model.item_index.size());
      model.params.item_factors.push_back(0.0);
      model.params.item_bias.push_back(logit(r.baseline));
      train.catalog.emplace(r.id, ItemRecord{r.id, r.retail, r.price});
    }
    profiles.fallback_avg_price = 120.0;
  }
};

}  // namespace

TEST_CASE("five-item fixture ranks as brute force predicts", "[rerank]") {
  const FiveItemWorld world;
  const Recommender rec = world.make();
  const auto top = rec.recommend("ghost", HyperParams{0.6, -0.4}, 5);

  REQUIRE(top.size() == 5);
  REQUIRE(top[0].item_id == "B");
  REQUIRE(top[1].item_id == "C");
  REQUIRE(top[2].item_id == "D");
  REQUIRE(top[3].item_id == "A");
  REQUIRE(top[4].item_id == "E");

  REQUIRE_THAT(top[0].adjusted_multiplier, WithinAbs(1.9169357488375052, 1e-9));
  REQUIRE_THAT(top[0].final_score, WithinAbs(0.95846787441875259, 1e-9));
  REQUIRE_THAT(top[1].adjusted_multiplier, WithinAbs(2.3760472874443797, 1e-9));
  REQUIRE_THAT(top[1].final_score, WithinAbs(0.95041891497775188, 1e-9));
  REQUIRE_THAT(top[2].adjusted_multiplier, WithinAbs(2.0, 1e-9));
  REQUIRE_THAT(top[2].final_score, WithinAbs(0.9, 1e-9));
  REQUIRE_THAT(top[3].adjusted_multiplier, WithinAbs(2.1886809086375738, 1e-9));
  REQUIRE_THAT(top[3].final_score, WithinAbs(0.65660427259127208, 1e-9));
  REQUIRE_THAT(top[4].adjusted_multiplier, WithinAbs(2.1296798423422962, 1e-9));
  REQUIRE_THAT(top[4].final_score, WithinAbs(0.42593596846845927, 1e-9));
}

TEST_CASE("zero hyperparameters reproduce the baseline ranking", "[rerank]") {
  const FiveItemWorld world;
  const Recommender rec = world.make();
  const auto adjusted = rec.recommend("ghost", HyperParams{0.0, 0.0}, 5);
  const auto baseline = rec.recommend("ghost", HyperParams{0.0, 0.0}, 5, true);
  REQUIRE(adjusted.size() == baseline.size());
  for (std::size_t i = 0; i < adjusted.size(); ++i) {
    REQUIRE(adjusted[i].item_id == baseline[i].item_id);
    REQUIRE(adjusted[i].adjusted_multiplier == 2.0);
    REQUIRE(baseline[i].adjusted_multiplier == 1.0);
  }
}

TEST_CASE("equal baselines break toward higher margin under alpha", "[rerank]") {
  FiveItemWorld world;
  // Give A (margin 1.0) and D (margin 0.0) identical baselines.
  world.model.params.item_bias[world.model.item_index.at("A")] = logit(0.45);
  const Recommender rec = world.make();
  const auto top = rec.recommend("ghost", HyperParams{1.0, 0.0}, 5);
  std::size_t pos_a = 99;
  std::size_t pos_d = 99;
  for (std::size_t i = 0; i < top.size(); ++i) {
    if (top[i].item_id == "A") pos_a = i;
    if (top[i].item_id == "D") pos_d = i;
  }
  REQUIRE(pos_a < pos_d);
}

TEST_CASE("training purchases are excluded from candidates", "[rerank]") {
  FiveItemWorld world;
  world.train.interactions.push_back({"u0", "C", Action::kPurchase, 1});
  const Recommender rec = world.make();
  const auto top = rec.recommend("u0", HyperParams{0.0, 0.0}, 5);
  REQUIRE(top.size() == 4);
  for (const auto& item : top) REQUIRE(item.item_id != "C");

  // Another customer still sees C.
  const auto ghost_top = rec.recommend("ghost", HyperParams{0.0, 0.0}, 5);
  REQUIRE(ghost_top.size() == 5);
}

TEST_CASE("model and catalog must agree on items", "[rerank]") {
  FiveItemWorld world;
  world.train.catalog.emplace("X", ItemRecord{"X", 10.0, 5.0});
  REQUIRE_THROWS_AS(world.make(), ValidationError);
}

TEST_CASE("recommend validates its arguments", "[rerank]") {
  const FiveItemWorld world;
  const Recommender rec = world.make();
  REQUIRE_THROWS_AS(rec.recommend("ghost", HyperParams{2.0, 0.0}, 5), ValidationError);
  REQUIRE_THROWS_AS(rec.recommend("ghost", HyperParams{0.0, 0.0}, 0), ValidationError);
}

TEST_CASE("recommendation CSV is rank-ordered", "[rerank]") {
  const FiveItemWorld world;
  const Recommender rec = world.make();
  const auto top = rec.recommend("ghost", HyperParams{0.0, 0.0}, 3);
  std::ostringstream out;
  write_recommendations_csv(out, "ghost", top);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  REQUIRE(line == "customer_id,rank,item_id,baseline_score,multiplier,final_score");
  std::getline(lines, line);
  REQUIRE(line.rfind("ghost,1,B,", 0) == 0);
  std::getline(lines, line);
  REQUIRE(line.rfind("ghost,2,D,", 0) == 0);
  std::getline(lines, line);
  REQUIRE(line.rfind("ghost,3,C,", 0) == 0);
}
