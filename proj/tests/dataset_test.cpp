#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "vsl/dataset.hpp"
#include "vsl/errors.hpp"

using namespace vsl;

namespace {

struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    static std::atomic<int> counter{0};
    dir = std::filesystem::temp_directory_path() /
          ("vsl_dataset_test_" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p.string();
  }
};

const char* kSmall =
    "ID,choice,tt1,tc1,hw1,ch1,tt2,tc2,hw2,ch2\n"
    "a,1,10,5,30,0,20,4,30,1\n"
    "b,2,15,5,10,2,12,6,20,0\n"
    "a,1,20,6,15,1,10,4,10,1\n";

// Columns deliberately shuffled relative to kSmall; loads identically.
const char* kShuffled =
    "tt2,ID,ch1,choice,tc1,hw1,tt1,tc2,hw2,ch2\n"
    "20,a,0,1,5,30,10,4,30,1\n"
    "12,b,2,2,5,10,15,6,20,0\n"
    "10,a,1,1,6,15,20,4,10,1\n";

std::string data_error_of(const std::string& path) {
  try {
    load_choice_csv(path);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("choice csv loads agents in first-appearance order") {
  TempDir tmp;
  const auto data = load_choice_csv(tmp.file("small.csv", kSmall));

  REQUIRE(data.vs.agents.size() == 2);
  CHECK(data.vs.agents[0].agent_id == "a");
  CHECK(data.vs.agents[1].agent_id == "b");
  CHECK(data.vs.agents[0].records.size() == 2);
  CHECK(data.vs.agents[1].records.size() == 1);
  CHECK(data.vs.record_count() == 3);
  CHECK(data.vs.feature_dim() == 4);
  REQUIRE(data.vs.entities->size() == 6);

  // Row order fixes entity ids: row k owns entities 2k and 2k+1.
  CHECK(data.raw.size() == 3);
  CHECK(data.raw[1].agent_id == "b");
  CHECK(data.raw[1].choice == 2);

  // The chosen route is `left` with label 1; choice 2 swaps the pair.
  const auto& a0 = data.vs.agents[0].records[0];
  CHECK(a0.left == 0);
  CHECK(a0.right == 1);
  CHECK(a0.label == 1.0);
  const auto& b0 = data.vs.agents[1].records[0];
  CHECK(b0.left == 3);
  CHECK(b0.right == 2);
  CHECK(b0.label == 1.0);
  const auto& a1 = data.vs.agents[0].records[1];
  CHECK(a1.left == 4);
  CHECK(a1.right == 5);
}

TEST_CASE("features scale to [0,1] by per-feature min and max") {
  TempDir tmp;
  const auto data = load_choice_csv(tmp.file("small.csv", kSmall));

  // time 10..20, cost 4..6, headway 10..30, interchanges 0..2.
  CHECK(data.bounds.lo[0] == 10.0);
  CHECK(data.bounds.hi[0] == 20.0);
  CHECK(data.bounds.lo[3] == 0.0);
  CHECK(data.bounds.hi[3] == 2.0);

  const auto& e0 = (*data.vs.entities)[0].features;
  CHECK(e0[0] == doctest::Approx(0.0));
  CHECK(e0[1] == doctest::Approx(0.5));
  CHECK(e0[2] == doctest::Approx(1.0));
  CHECK(e0[3] == doctest::Approx(0.0));
  const auto& e1 = (*data.vs.entities)[1].features;
  CHECK(e1[0] == doctest::Approx(1.0));
  CHECK(e1[1] == doctest::Approx(0.0));
  CHECK(e1[3] == doctest::Approx(0.5));
}

TEST_CASE("column order in the file does not matter") {
  TempDir tmp;
  const auto a = load_choice_csv(tmp.file("small.csv", kSmall));
  const auto b = load_choice_csv(tmp.file("shuffled.csv", kShuffled));
  REQUIRE(a.vs.entities->size() == b.vs.entities->size());
  for (std::size_t i = 0; i < a.vs.entities->size(); ++i)
    CHECK((*a.vs.entities)[i].features == (*b.vs.entities)[i].features);
  CHECK(a.raw[1].choice == b.raw[1].choice);
}

TEST_CASE("explicit bounds override the data-derived ones") {
  TempDir tmp;
  ScalingBounds bounds;
  bounds.lo = {0, 0, 0, 0};
  bounds.hi = {40, 10, 60, 4};
  const auto data = load_choice_csv(tmp.file("small.csv", kSmall), {}, bounds);
  const auto& e0 = (*data.vs.entities)[0].features;
  CHECK(e0[0] == doctest::Approx(0.25));   // 10 / 40
  CHECK(e0[1] == doctest::Approx(0.5));    // 5 / 10
  CHECK(e0[2] == doctest::Approx(0.5));    // 30 / 60
  CHECK(e0[3] == doctest::Approx(0.0));
}

TEST_CASE("out-of-range values clamp instead of extrapolating") {
  ScalingBounds b;
  b.lo = {10, 0, 0, 0};
  b.hi = {20, 1, 1, 1};
  CHECK(b.scale(5.0, 0) == 0.0);
  CHECK(b.scale(25.0, 0) == 1.0);
  CHECK(b.scale(15.0, 0) == doctest::Approx(0.5));
}

TEST_CASE("loader errors name the file, line and column") {
  TempDir tmp;

  SUBCASE("missing column") {
    const auto p = tmp.file("bad.csv", "ID,choice,tt1\na,1,1\n");
    const auto msg = data_error_of(p);
    CHECK(msg.find("missing column 'tt2'") != std::string::npos);
  }
  SUBCASE("short row") {
    const auto p = tmp.file(
        "bad.csv",
        "ID,choice,tt1,tc1,hw1,ch1,tt2,tc2,hw2,ch2\na,1,10,5,30,0,20,4\n");
    const auto msg = data_error_of(p);
    CHECK(msg.find(":2:") != std::string::npos);
    CHECK(msg.find("short row") != std::string::npos);
  }
  SUBCASE("non-numeric cell") {
    const auto p = tmp.file(
        "bad.csv",
        "ID,choice,tt1,tc1,hw1,ch1,tt2,tc2,hw2,ch2\na,1,10,5,xx,0,20,4,30,1\n");
    const auto msg = data_error_of(p);
    CHECK(msg.find(":2:") != std::string::npos);
    CHECK(msg.find("'hw1'") != std::string::npos);
    CHECK(msg.find("'xx'") != std::string::npos);
  }
  SUBCASE("choice outside {1,2}") {
    const auto p = tmp.file(
        "bad.csv",
        "ID,choice,tt1,tc1,hw1,ch1,tt2,tc2,hw2,ch2\na,3,10,5,30,0,20,4,30,1\n");
    const auto msg = data_error_of(p);
    CHECK(msg.find("choice must be 1 or 2") != std::string::npos);
  }
  SUBCASE("empty file") {
    const auto msg = data_error_of(tmp.file("bad.csv", ""));
    CHECK(msg.find("empty file") != std::string::npos);
  }
  SUBCASE("header only") {
    const auto msg = data_error_of(
        tmp.file("bad.csv", "ID,choice,tt1,tc1,hw1,ch1,tt2,tc2,hw2,ch2\n"));
    CHECK(msg.find("no data rows") != std::string::npos);
  }
  SUBCASE("missing file") {
    const auto msg = data_error_of((tmp.dir / "nope.csv").string());
    CHECK(msg.find("cannot open") != std::string::npos);
  }
}

TEST_CASE("blank lines are skipped, constant features warn") {
  TempDir tmp;
  const auto p = tmp.file("gaps.csv",
                          "ID,choice,tt1,tc1,hw1,ch1,tt2,tc2,hw2,ch2\n"
                          "a,1,10,5,30,0,20,4,30,1\n"
                          "\n"
                          "  \t\r\n"
                          "b,2,15,5,10,2,12,6,20,0\n");
  const auto data = load_choice_csv(p);
  CHECK(data.raw.size() == 2);

  // headway spans 10..30 here, interchanges 0..2; both fine. A file where
  // one feature never varies gets a warning and that feature scales to 0.
  const auto q = tmp.file("flat.csv",
                          "ID,choice,tt1,tc1,hw1,ch1,tt2,tc2,hw2,ch2\n"
                          "a,1,10,5,30,1,20,4,30,1\n");
  const auto flat = load_choice_csv(q);
  bool warned_headway = false;
  for (const auto& w : flat.warnings)
    if (w.find("'headway'") != std::string::npos) warned_headway = true;
  CHECK(warned_headway);
  CHECK((*flat.vs.entities)[0].features[2] == 0.0);
  CHECK((*flat.vs.entities)[1].features[2] == 0.0);
}

TEST_CASE("context columns are optional and read once per agent") {
  TempDir tmp;
  const auto p = tmp.file(
      "ctx.csv",
      "ID,choice,tt1,tc1,hw1,ch1,tt2,tc2,hw2,ch2,hh_inc_abs,car_availability,"
      "commute,shopping,business,leisure\n"
      "a,1,10,5,30,0,20,4,30,1,4000,1,1,0,0,0\n"
      "b,2,15,5,10,2,12,6,20,0,9000,0,0,1,0,1\n"
      "a,1,20,6,15,1,10,4,10,1,9999,0,0,0,1,0\n");
  const auto data = load_choice_csv(p);
  CHECK(data.has_context);
  REQUIRE(data.contexts.size() == 2);
  CHECK(data.contexts[0].agent_id == "a");
  CHECK(data.contexts[0].household_income == 4000.0);
  CHECK(data.contexts[0].car_available);
  CHECK(data.contexts[0].commuting);
  CHECK_FALSE(data.contexts[0].shopping);
  CHECK(data.contexts[1].household_income == 9000.0);
  CHECK(data.contexts[1].leisure);

  const auto bare = load_choice_csv(tmp.file("small.csv", kSmall));
  CHECK_FALSE(bare.has_context);
  bool warned = false;
  for (const auto& w : bare.warnings)
    if (w.find("context columns absent") != std::string::npos) warned = true;
  CHECK(warned);
}

TEST_CASE("grounding labels follow the per-value attribute rules") {
  TempDir tmp;
  const auto data = load_choice_csv(tmp.file("small.csv", kSmall));
  const auto build = build_grounding_dataset(data);
  const auto& g = build.dataset;

  REQUIRE(g.value_count() == 3);
  CHECK(g.value_names[0] == "time");
  CHECK(g.value_names[1] == "cost");
  CHECK(g.value_names[2] == "comfort");
  CHECK(g.entities == data.vs.entities);

  // time: 10<20 yes, 15<12 no, 20<10 no.
  REQUIRE(g.per_value[0].size() == 2);
  CHECK(g.per_value[0][0].agent_id == "a");
  CHECK(g.per_value[0][0].records[0].label == 1.0);
  CHECK(g.per_value[0][0].records[1].label == 0.0);
  CHECK(g.per_value[0][1].records[0].label == 0.0);

  // cost: 5>4, 5<6, 6>4.
  CHECK(g.per_value[1][0].records[0].label == 0.0);
  CHECK(g.per_value[1][0].records[1].label == 0.0);
  CHECK(g.per_value[1][1].records[0].label == 1.0);

  // comfort: row 1 dominates weakly (hw tie, fewer interchanges), row 2
  // conflicts and is excluded, row 3 is dominated (worse headway, hw tie).
  REQUIRE(g.per_value[2].size() == 1);
  CHECK(g.per_value[2][0].agent_id == "a");
  REQUIRE(g.per_value[2][0].records.size() == 2);
  CHECK(g.per_value[2][0].records[0].label == 1.0);
  CHECK(g.per_value[2][0].records[0].left == 0);
  CHECK(g.per_value[2][0].records[1].label == 0.0);
  CHECK(g.per_value[2][0].records[1].left == 4);

  CHECK(build.comfort_candidates == 3);
  CHECK(build.comfort_excluded == 1);
  CHECK(build.excluded_fraction() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("equal attributes yield indifference labels") {
  TempDir tmp;
  const auto p = tmp.file("tie.csv",
                          "ID,choice,tt1,tc1,hw1,ch1,tt2,tc2,hw2,ch2\n"
                          "a,1,10,5,30,1,10,4,30,1\n"
                          "a,2,12,5,30,1,10,5,20,1\n");
  const auto g = build_grounding_dataset(load_choice_csv(p)).dataset;
  CHECK(g.per_value[0][0].records[0].label == 0.5);  // equal times
  CHECK(g.per_value[1][0].records[1].label == 0.5);  // equal costs
  CHECK(g.per_value[2][0].records[0].label == 0.5);  // equal hw and ch
  CHECK(g.per_value[2][0].records[1].label == 0.0);  // worse headway only
  CHECK(g.record_count(2) == 2);
}

TEST_CASE("written csv loads back to the same data") {
  TempDir tmp;
  const auto src = load_choice_csv(tmp.file(
      "ctx.csv",
      "ID,choice,tt1,tc1,hw1,ch1,tt2,tc2,hw2,ch2,hh_inc_abs,car_availability,"
      "commute,shopping,business,leisure\n"
      "a,1,10.25,5,30,0,20,4,30,1,4000,1,1,0,0,0\n"
      "b,2,15,5.5,10,2,12,6,20,0,9000,0,0,1,0,1\n"));

  const auto out = (tmp.dir / "copy.csv").string();
  write_choice_csv(out, src.raw, src.contexts);
  const auto back = load_choice_csv(out);

  REQUIRE(back.raw.size() == src.raw.size());
  for (std::size_t k = 0; k < src.raw.size(); ++k) {
    CHECK(back.raw[k].agent_id == src.raw[k].agent_id);
    CHECK(back.raw[k].choice == src.raw[k].choice);
    CHECK(back.raw[k].route1 == src.raw[k].route1);
    CHECK(back.raw[k].route2 == src.raw[k].route2);
  }
  REQUIRE(back.contexts.size() == src.contexts.size());
  CHECK(back.contexts[0].household_income == 4000.0);
  CHECK(back.contexts[1].leisure == src.contexts[1].leisure);
  for (std::size_t i = 0; i < src.vs.entities->size(); ++i)
    CHECK((*back.vs.entities)[i].features == (*src.vs.entities)[i].features);
}

TEST_CASE("bounds of an empty instance list are all zero") {
  const auto b = compute_bounds({});
  CHECK(b.lo == std::vector<double>(4, 0.0));
  CHECK(b.hi == std::vector<double>(4, 0.0));
}
