#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "reference/reference.hpp"
#include "vsl/net.hpp"

using namespace vsl;
using doctest::Approx;

namespace {

// Two inputs, one hidden layer of two tanh units, scalar output.
net::Mlp tiny_net() {
  net::Mlp n;
  n.sizes = {2, 2, 1};
  n.params = {1.0, 2.0, -0.5, 0.25, 0.1, -0.2, 0.8, -1.2, 0.3};
  return n;
}

}  // namespace

TEST_CASE("zero parameters give alignment -ln 2 everywhere") {
  const auto n = net::Mlp::make(4);
  CHECK(n.sizes == std::vector<int>{4, 16, 24, 16, 1});
  const std::vector<double> x{0.2, 0.9, 0.0, 1.0};
  CHECK(n.forward(x) == Approx(-0.69314718055994531).epsilon(1e-15));
  const std::vector<double> y{0.7, 0.1, 0.5, 0.3};
  CHECK(n.forward(y) == n.forward(x));
}

TEST_CASE("hand-sized net matches the frozen forward value") {
  const auto n = tiny_net();
  const std::vector<double> x{0.5, -1.0};

  // pre-activations -1.4 and -0.7, output logit 0.3169600139787862.
  CHECK(n.forward(x) == Approx(-0.86413292584644232).epsilon(1e-15));

  std::vector<double> acts(n.activation_size());
  CHECK(n.forward_cached(x, acts) == n.forward(x));
  CHECK(acts[0] == Approx(std::tanh(-1.4)).epsilon(1e-15));
  CHECK(acts[1] == Approx(std::tanh(-0.7)).epsilon(1e-15));
  CHECK(acts[2] == Approx(0.3169600139787862).epsilon(1e-15));

  CHECK(ref::mlp_forward(n.sizes, n.params, x) ==
        Approx(-0.86413292584644232).epsilon(1e-15));
}

TEST_CASE("parameter layout is weights-then-biases per layer") {
  const auto n = tiny_net();
  CHECK(n.param_count() == 9);
  CHECK(n.layer_count() == 2);
  CHECK(n.input_dim() == 2);
  CHECK(n.weight_offset(0) == 0);
  CHECK(n.bias_offset(0) == 4);
  CHECK(n.weight_offset(1) == 6);
  CHECK(n.bias_offset(1) == 8);
  CHECK(n.activation_size() == 3);

  const auto big = net::Mlp::make(4);
  // 4x16+16, 16x24+24, 24x16+16, 16x1+1
  CHECK(big.param_count() == 80 + 408 + 400 + 17);
  CHECK(big.activation_size() == 16 + 24 + 16 + 1);
}

TEST_CASE("forward output is always strictly negative") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  auto n = net::init_net(3, rng);
  std::vector<double> x(3);
  for (int t = 0; t < 200; ++t) {
    for (auto& v : x) v = u(rng);
    for (auto& p : n.params) p += 0.05 * u(rng);
    CHECK(n.forward(x) < 0.0);
  }
}

TEST_CASE("softmax normalizes, shifts away and matches the oracle") {
  const std::vector<double> om{0.3, -1.1, 2.0};
  const auto s = net::softmax(om);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == Approx(0.14879747042462356).epsilon(1e-15));
  CHECK(s[1] == Approx(0.036693004448903152).epsilon(1e-15));
  CHECK(s[2] == Approx(0.81450952512647329).epsilon(1e-15));
  CHECK(s[0] + s[1] + s[2] == Approx(1.0).epsilon(1e-15));

  // Max-subtraction makes a common shift a no-op. With exactly
  // representable logits and shift the result matches bit for bit.
  const std::vector<double> exact{0.5, -1.25, 2.0};
  std::vector<double> shifted{exact};
  for (auto& v : shifted) v += 8.0;
  CHECK(net::softmax(shifted) == net::softmax(exact));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> w(1 + t % 5);
    for (auto& v : w) v = u(rng);
    const auto mine = net::softmax(w);
    const auto oracle = ref::softmax(w);
    for (std::size_t i = 0; i < w.size(); ++i)
      CHECK(mine[i] == Approx(oracle[i]).epsilon(1e-15));
  }
}

TEST_CASE("vs_value is the weighted sum of alignments") {
  const std::vector<double> w{0.2, 0.3, 0.5};
  const std::vector<double> a{-1.0, -2.0, -4.0};
  CHECK(net::vs_value(w, a) == Approx(-2.8).epsilon(1e-15));
  CHECK_THROWS_AS(net::vs_value(w, std::vector<double>{-1.0}),
                  std::invalid_argument);
}

TEST_CASE("initialization is Glorot-bounded, zero-biased, seeded") {
  std::mt19937_64 rng(123);
  const auto n = net::init_net(4, rng);
  for (int l = 0; l < n.layer_count(); ++l) {
    const int nin = n.sizes[l], nout = n.sizes[l + 1];
    const double limit = std::sqrt(6.0 / (nin + nout));
    for (std::size_t k = n.weight_offset(l); k < n.bias_offset(l); ++k) {
      CHECK(std::abs(n.params[k]) <= limit);
    }
    for (int r = 0; r < nout; ++r)
      CHECK(n.params[n.bias_offset(l) + r] == 0.0);
  }

  std::mt19937_64 rng2(123);
  const auto same = net::init_net(4, rng2);
  CHECK(same.params == n.params);

  std::mt19937_64 rng3(124);
  const auto other = net::init_net(4, rng3);
  CHECK(other.params != n.params);

  std::mt19937_64 rng4(7);
  const auto g = net::init_grounding(3, 4, rng4);
  CHECK(g.value_count() == 3);
  CHECK(g.input_dim() == 4);
  CHECK(g.nets[0].params != g.nets[1].params);

  std::mt19937_64 rng5(7);
  const auto om = net::init_omega(3, rng5);
  CHECK(om.size() == 3);
  for (double v : om) CHECK(std::abs(v) < 1.0);  // draws from N(0, 0.1^2)
}

TEST_CASE("evaluator caches alignments identical to direct forwards") {
  const auto vs = fixtures::random_vs(6, 20, 3, 2, 6, 42);
  const auto gr = fixtures::random_grounding(vs, 2, 2, 5, 43);
  net::Evaluator ev(vs, gr);
  CHECK(ev.entity_count() == 20);
  CHECK(ev.value_count() == 2);
  CHECK(ev.agent_count() == 6);
  CHECK(ev.feature_dim() == 3);

  std::mt19937_64 rng(44);
  const auto theta = net::init_grounding(2, 3, rng);
  net::Evaluator ev2(vs, gr);
  ev2.set_parameters(theta);
  for (int i = 0; i < 2; ++i) {
    const auto row = ev2.alignment_row(i);
    const auto fn = ev2.alignment_fn(i);
    for (std::uint32_t e = 0; e < 20; ++e) {
      CHECK(row[e] == theta.nets[i].forward((*vs.entities)[e].features));
      CHECK(fn(e) == row[e]);
    }
  }

  // Utility is the weight-blended alignment at each entity.
  const std::vector<double> w{0.3, 0.7};
  const auto util = ev2.utility_fn(w);
  for (std::uint32_t e = 0; e < 20; ++e) {
    const double expect =
        w[0] * ev2.alignment_row(0)[e] + w[1] * ev2.alignment_row(1)[e];
    CHECK(util(e) == Approx(expect).epsilon(1e-15));
  }
}

TEST_CASE("evaluator rejects malformed inputs") {
  const auto vs = fixtures::random_vs(3, 10, 2, 2, 4, 1);
  const auto gr = fixtures::random_grounding(vs, 2, 2, 4, 2);

  SUBCASE("separate entity tables") {
    auto other = gr;
    other.entities = fixtures::make_entities(10, 2, 1);
    CHECK_THROWS_WITH_AS(net::Evaluator(vs, other),
                         "evaluator: datasets must share one entity table",
                         std::invalid_argument);
  }
  SUBCASE("no agents") {
    ValueSystemDataset empty;
    empty.entities = vs.entities;
    CHECK_THROWS_AS(net::Evaluator{empty}, std::invalid_argument);
  }
  SUBCASE("record entity out of range") {
    auto bad = vs;
    bad.agents[0].records[0].left = 999;
    CHECK_THROWS_AS(net::Evaluator(bad, gr), std::invalid_argument);
  }
  SUBCASE("bad label") {
    auto bad = vs;
    bad.agents[0].records[0].label = 0.25;
    CHECK_THROWS_AS(net::Evaluator(bad, gr), std::invalid_argument);
  }
  SUBCASE("use before set_parameters") {
    net::Evaluator ev(vs, gr);
    CHECK_THROWS_AS(ev.alignment_row(0), std::logic_error);
  }
  SUBCASE("wrong net count") {
    net::Evaluator ev(vs, gr);
    std::mt19937_64 rng(3);
    CHECK_THROWS_AS(ev.set_parameters(net::init_grounding(3, 2, rng)),
                    std::invalid_argument);
  }
  SUBCASE("wrong input dim") {
    net::Evaluator ev(vs, gr);
    std::mt19937_64 rng(3);
    CHECK_THROWS_AS(ev.set_parameters(net::init_grounding(2, 5, rng)),
                    std::invalid_argument);
  }
  SUBCASE("lambda without grounding data") {
    net::Evaluator ev(vs);
    std::mt19937_64 rng(3);
    ev.set_parameters(net::init_grounding(2, 2, rng));
    net::LossSpec spec;
    spec.lambda = {0.1, 0.1};
    metrics::Assignment beta;
    beta.l_max = 1;
    beta.cluster_of = {0, 0, 0};
    const std::vector<std::vector<double>> omegas{{0.0, 0.0}};
    CHECK_THROWS_AS(ev.evaluate(omegas, beta, spec), std::invalid_argument);
  }
}

TEST_CASE("vs-only evaluator reports no grounding terms") {
  const auto vs = fixtures::random_vs(4, 12, 2, 3, 6, 9);
  net::Evaluator ev(vs);
  std::mt19937_64 rng(10);
  ev.set_parameters(net::init_grounding(2, 2, rng));

  metrics::Assignment beta;
  beta.l_max = 2;
  beta.cluster_of = {0, 1, 0, 1};
  const std::vector<std::vector<double>> omegas{{0.2, -0.1}, {0.0, 0.3}};
  const auto res = ev.evaluate(omegas, beta, net::LossSpec{});
  CHECK(res.loss_grounding.empty());
  CHECK(res.coherence.empty());
  CHECK(res.total == Approx(res.loss_repr - res.loss_conc).epsilon(1e-15));
}

TEST_CASE("evaluate is bitwise deterministic across repeated calls") {
  const auto vs = fixtures::random_vs(5, 16, 3, 3, 8, 77);
  const auto gr = fixtures::random_grounding(vs, 3, 3, 6, 78);
  net::Evaluator ev(vs, gr);
  std::mt19937_64 rng(79);
  ev.set_parameters(net::init_grounding(3, 3, rng));

  metrics::Assignment beta;
  beta.l_max = 2;
  beta.cluster_of = {0, 1, 1, 0, 1};
  std::vector<std::vector<double>> omegas;
  omegas.push_back(net::init_omega(3, rng));
  omegas.push_back(net::init_omega(3, rng));
  net::LossSpec spec;
  spec.lambda = {0.05, 0.1, 0.2};

  net::Gradients g1, g2;
  const auto r1 = ev.evaluate(omegas, beta, spec, &g1);
  const auto r2 = ev.evaluate(omegas, beta, spec, &g2);
  CHECK(r1.total == r2.total);
  CHECK(r1.loss_repr == r2.loss_repr);
  CHECK(r1.loss_conc == r2.loss_conc);
  CHECK(g1.theta == g2.theta);
  CHECK(g1.omega == g2.omega);
}

TEST_CASE("analytic gradients agree with central differences") {
  const auto vs = fixtures::random_vs(5, 14, 3, 3, 7, 301);
  const auto gr = fixtures::random_grounding(vs, 2, 3, 6, 302);
  std::mt19937_64 rng(303);
  const auto theta = net::init_grounding(2, 3, rng);
  std::vector<std::vector<double>> omegas{net::init_omega(2, rng),
                                          net::init_omega(2, rng)};
  metrics::Assignment beta;
  beta.l_max = 2;
  beta.cluster_of = {0, 1, 0, 1, 1};
  net::LossSpec spec;
  spec.lambda = {0.3, 0.15};

  const double err = net::fd_check_objective(theta, omegas, beta, spec, vs, gr,
                                             60, 304);
  CHECK(err < 1e-4);

  // Repr-only objective exercises the other branch.
  net::LossSpec plain;
  plain.use_conc = false;
  const double err2 = net::fd_check_objective(theta, omegas, beta, plain, vs,
                                              gr, 40, 305);
  CHECK(err2 < 1e-4);
}
