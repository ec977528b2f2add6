#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "vsl/errors.hpp"
#include "vsl/metrics.hpp"
#include "vsl/synth.hpp"

using namespace vsl;
using doctest::Approx;

TEST_CASE("spec validation rejects inconsistent recipes") {
  synth::SyntheticSpec spec;
  CHECK_NOTHROW(spec.validate());

  auto bad = spec;
  bad.clusters = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.clusters = bad.agents + 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.dim = bad.values - 1;  // every value needs its own feature block
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.noise = 0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.margin = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.jitter = 1.0;  // rows must stay anchored to their cluster profile
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.jitter = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.weights = {{0.5, 0.5, 0.0}};  // one row, three clusters
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec;
  bad.weights = {{0.5, 0.4, 0.0}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);  // first row sums to 0.9
}

TEST_CASE("default weights put 0.8 on a rotating dominant value") {
  const auto w = synth::default_weights(3, 3);
  REQUIRE(w.size() == 3);
  CHECK(w[0] == std::vector<double>{0.8, 0.1, 0.1});
  CHECK(w[1] == std::vector<double>{0.1, 0.8, 0.1});
  CHECK(w[2] == std::vector<double>{0.1, 0.1, 0.8});

  const auto w4 = synth::default_weights(4, 2);
  CHECK(w4[0] == std::vector<double>{0.8, 0.2});
  CHECK(w4[3] == std::vector<double>{0.2, 0.8});

  const auto w1 = synth::default_weights(2, 1);
  CHECK(w1[0] == std::vector<double>{1.0});
}

TEST_CASE("generated society has the planted shape") {
  synth::SyntheticSpec spec;
  spec.agents = 9;
  spec.clusters = 3;
  spec.values = 3;
  spec.dim = 6;
  spec.pairs_per_agent = 5;
  spec.seed = 77;
  const auto soc = synth::generate_society(spec);

  CHECK(soc.vs.agent_count() == 9);
  CHECK(soc.vs.entities->size() == 9 * 5 * 2);
  CHECK(soc.vs.record_count() == 45);
  CHECK(soc.vs.agents[0].agent_id == "a1");
  CHECK(soc.vs.agents[8].agent_id == "a9");
  CHECK(soc.grounding.value_count() == 3);
  CHECK(soc.grounding.entities == soc.vs.entities);
  for (int i = 0; i < 3; ++i) {
    CHECK(soc.grounding.per_value[i].size() == 9);
    CHECK(soc.grounding.record_count(i) == 45);
  }

  // truth assigns agents round-robin
  REQUIRE(soc.truth.agent_count() == 9);
  for (int j = 0; j < 9; ++j) CHECK(soc.truth.cluster_of[j] == j % 3);
  CHECK(soc.weights == synth::default_weights(3, 3));

  // disjoint coefficient blocks: feature d belongs to value d % 3
  for (int i = 0; i < 3; ++i)
    for (int d = 0; d < 6; ++d) {
      if (d % 3 == i) {
        CHECK(soc.coeffs[i][d] >= 0.25);
        CHECK(soc.coeffs[i][d] <= 1.0);
      } else {
        CHECK(soc.coeffs[i][d] == 0.0);
      }
    }

  // no raw export form unless the features map onto the four route columns
  CHECK(soc.raw.empty());
  auto four = spec;
  four.dim = 4;
  CHECK(synth::generate_society(four).raw.size() == 45);
}

TEST_CASE("pairs respect the separation margin") {
  synth::SyntheticSpec spec;
  spec.agents = 6;
  spec.clusters = 2;
  spec.values = 2;
  spec.dim = 4;
  spec.pairs_per_agent = 10;
  spec.margin = 0.08;
  spec.seed = 5;
  const auto soc = synth::generate_society(spec);

  for (int j = 0; j < spec.agents; ++j) {
    const int cluster = soc.truth.cluster_of[j];
    for (const auto& r : soc.vs.agents[j].records) {
      const auto& ea = (*soc.vs.entities)[r.left];
      const auto& eb = (*soc.vs.entities)[r.right];
      CHECK(std::abs(soc.planted_utility(cluster, ea) -
                     soc.planted_utility(cluster, eb)) > spec.margin);
      for (int i = 0; i < spec.values; ++i)
        CHECK(std::abs(soc.planted_alignment(i, ea) -
                       soc.planted_alignment(i, eb)) > spec.margin);
    }
  }
}

TEST_CASE("noiseless labels are exactly realizable by the planted model") {
  synth::SyntheticSpec spec;
  spec.agents = 12;
  spec.clusters = 3;
  spec.values = 3;
  spec.dim = 6;
  spec.pairs_per_agent = 8;
  spec.seed = 31;
  const auto soc = synth::generate_society(spec);

  // planted alignments reproduce every grounding label
  for (int i = 0; i < 3; ++i) {
    metrics::AlignFn fn = [&, i](std::uint32_t e) {
      return soc.planted_alignment(i, (*soc.vs.entities)[e]);
    };
    CHECK(metrics::coherence_value(fn, soc.grounding.per_value[i]) == 1.0);
  }

  // planted utilities reproduce every preference under the truth assignment
  std::vector<metrics::AlignFn> utils;
  for (int l = 0; l < 3; ++l)
    utils.push_back([&, l](std::uint32_t e) {
      return soc.planted_utility(l, (*soc.vs.entities)[e]);
    });
  CHECK(metrics::representativeness(utils, soc.truth, soc.vs) == 1.0);
}

TEST_CASE("label noise flips close to the requested fraction") {
  synth::SyntheticSpec spec;
  spec.agents = 30;
  spec.clusters = 2;
  spec.values = 2;
  spec.dim = 4;
  spec.pairs_per_agent = 40;
  spec.seed = 11;
  const auto clean = synth::generate_society(spec);

  auto noisy_spec = spec;
  noisy_spec.noise = 0.2;
  const auto noisy = synth::generate_society(noisy_spec);

  int flips = 0, total = 0;
  for (int j = 0; j < spec.agents; ++j) {
    REQUIRE(noisy.vs.agents[j].records.size() ==
            clean.vs.agents[j].records.size());
    for (std::size_t r = 0; r < clean.vs.agents[j].records.size(); ++r) {
      ++total;
      if (noisy.vs.agents[j].records[r].label !=
          clean.vs.agents[j].records[r].label)
        ++flips;
    }
  }
  CHECK(total == 1200);
  CHECK(flips / double(total) == Approx(0.2).epsilon(0.15));

  // the pair stream is independent of the noise stream
  CHECK((*noisy.vs.entities)[0].features == (*clean.vs.entities)[0].features);
}

TEST_CASE("jitter spreads agents around their cluster profile") {
  synth::SyntheticSpec spec;
  spec.agents = 12;
  spec.clusters = 2;
  spec.values = 3;
  spec.dim = 3;
  spec.pairs_per_agent = 6;
  spec.seed = 19;

  // jitter 0: every agent sits exactly on its cluster row
  const auto crisp = synth::generate_society(spec);
  REQUIRE(crisp.agent_weights.size() == 12);
  for (int j = 0; j < 12; ++j)
    CHECK(crisp.agent_weights[j] == crisp.weights[crisp.truth.cluster_of[j]]);

  auto spread_spec = spec;
  spread_spec.jitter = 0.5;
  const auto spread = synth::generate_society(spread_spec);

  for (int j = 0; j < 12; ++j) {
    const auto& w = spread.agent_weights[j];
    REQUIRE(w.size() == 3);
    double sum = 0.0;
    for (double x : w) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
      sum += x;
    }
    CHECK(sum == Approx(1.0).epsilon(1e-12));
    CHECK(w != spread.weights[spread.truth.cluster_of[j]]);
  }
  // agents of the same cluster land on distinct points
  CHECK(spread.agent_weights[0] != spread.agent_weights[2]);
  CHECK(spread.agent_weights[1] != spread.agent_weights[3]);

  // labels remain noiseless: each agent's own planted utility reproduces them
  for (int j = 0; j < 12; ++j)
    for (const auto& r : spread.vs.agents[j].records) {
      const double ua = spread.agent_utility(j, (*spread.vs.entities)[r.left]);
      const double ub = spread.agent_utility(j, (*spread.vs.entities)[r.right]);
      CHECK(std::abs(ua - ub) > spec.margin);
      CHECK(r.label == (ua > ub ? 1.0 : 0.0));
    }

  // deterministic in the seed
  const auto again = synth::generate_society(spread_spec);
  CHECK(again.agent_weights == spread.agent_weights);
  for (int j = 0; j < 12; ++j)
    for (std::size_t r = 0; r < spread.vs.agents[j].records.size(); ++r)
      CHECK(again.vs.agents[j].records[r].label ==
            spread.vs.agents[j].records[r].label);
  auto other = spread_spec;
  other.seed = 20;
  CHECK(synth::generate_society(other).agent_weights != spread.agent_weights);
}

TEST_CASE("identical specs generate identical societies") {
  synth::SyntheticSpec spec;
  spec.agents = 8;
  spec.clusters = 2;
  spec.values = 2;
  spec.dim = 4;
  spec.pairs_per_agent = 6;
  spec.seed = 123;
  const auto a = synth::generate_society(spec);
  const auto b = synth::generate_society(spec);

  REQUIRE(a.vs.entities->size() == b.vs.entities->size());
  for (std::size_t e = 0; e < a.vs.entities->size(); ++e)
    CHECK((*a.vs.entities)[e].features == (*b.vs.entities)[e].features);
  for (int j = 0; j < 8; ++j)
    for (std::size_t r = 0; r < a.vs.agents[j].records.size(); ++r)
      CHECK(a.vs.agents[j].records[r].label == b.vs.agents[j].records[r].label);
  CHECK(a.coeffs == b.coeffs);

  auto other = spec;
  other.seed = 124;
  const auto c = synth::generate_society(other);
  CHECK(a.coeffs != c.coeffs);
}

TEST_CASE("weight grid scan separates the two grounding variants") {
  // Value profiles over three entities; the agent ranks e1 > e2 > e3.
  // With the third entity at (0.3, 0.3) the ranking is linearly realizable,
  // at (0.3, 0.7) it forces w1 > w2 and w1 < w2 at once.
  const std::vector<int> ranking{0, 1, 2};
  const std::vector<std::vector<double>> g1{{1, 0}, {0, 1}, {0.3, 0.3}};
  const std::vector<std::vector<double>> g2{{1, 0}, {0, 1}, {0.3, 0.7}};

  const auto f1 = synth::linear_feasibility_scan(g1, ranking, 200);
  CHECK_FALSE(f1.empty());
  bool has_point = false;
  for (const auto& w : f1)
    if (w[0] == 0.6 && w[1] == 0.4) has_point = true;
  CHECK(has_point);
  for (const auto& w : f1) {
    CHECK(w[0] + w[1] == Approx(1.0).epsilon(1e-12));
    CHECK(w[0] > w[1]);  // e1 over e2 needs it
  }

  const auto f2 = synth::linear_feasibility_scan(g2, ranking, 200);
  CHECK(f2.empty());
}

TEST_CASE("feasibility scan validates its inputs") {
  const std::vector<std::vector<double>> vals{{1, 0}, {0, 1}};
  CHECK_THROWS_AS(synth::linear_feasibility_scan({}, {0, 1}, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(synth::linear_feasibility_scan(vals, {0}, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(synth::linear_feasibility_scan(vals, {0, 2}, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(synth::linear_feasibility_scan(vals, {0, 1}, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      synth::linear_feasibility_scan({{1, 0}, {0, 1, 2}}, {0, 1}, 10),
      std::invalid_argument);
}

TEST_CASE("flat and sequential baselines produce scored single models") {
  synth::SyntheticSpec spec;
  spec.agents = 10;
  spec.clusters = 2;
  spec.values = 2;
  spec.dim = 4;
  spec.pairs_per_agent = 10;
  spec.seed = 55;
  const auto soc = synth::generate_society(spec);

  synth::FlatBtConfig fc;
  fc.steps = 50;
  fc.seed = 1;
  const auto flat = synth::baseline_flat_bt(soc.vs, soc.grounding, fc);
  CHECK(std::isfinite(flat.loss));
  CHECK(flat.repr >= 0.0);
  CHECK(flat.repr <= 1.0);
  CHECK(flat.coherence.size() == 2);
  const auto flat2 = synth::baseline_flat_bt(soc.vs, soc.grounding, fc);
  CHECK(flat2.repr == flat.repr);
  CHECK(flat2.model.params == flat.model.params);

  synth::SequentialConfig sc;
  sc.grounding_steps = 40;
  sc.weight_steps = 40;
  sc.seed = 1;
  const auto seq = synth::baseline_sequential(soc.vs, soc.grounding, sc);
  CHECK(seq.omega.size() == 2);
  CHECK(seq.coherence.size() == 2);
  CHECK(seq.repr >= 0.0);
  CHECK(seq.repr <= 1.0);
  const auto seq2 = synth::baseline_sequential(soc.vs, soc.grounding, sc);
  CHECK(seq2.repr == seq.repr);
  CHECK(seq2.omega == seq.omega);
}
