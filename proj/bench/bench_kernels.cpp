#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "reference/reference.hpp"
#include "vsl/net.hpp"
#include "vsl/parallel.hpp"
#include "vsl/rng.hpp"
#include "vsl/synth.hpp"
#include "vsl/train.hpp"

// Times the OpenMP evaluation kernels against the serial reference and
// checks that both produce the same numbers.

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double rel_diff(double a, double b) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1e-12});
  return std::fabs(a - b) / scale;
}

}  // namespace

int main(int argc, char** argv) {
  int agents = 240, pairs = 80, repeats = 20;
  if (argc > 1) agents = std::atoi(argv[1]);
  if (argc > 2) pairs = std::atoi(argv[2]);
  if (argc > 3) repeats = std::atoi(argv[3]);
  if (agents < 1 || pairs < 1 || repeats < 1) {
    std::fprintf(stderr, "usage: %s [agents] [pairs-per-agent] [repeats]\n",
                 argv[0]);
    return 2;
  }

  vsl::synth::SyntheticSpec spec;
  spec.agents = agents;
  spec.clusters = 3;
  spec.values = 3;
  spec.dim = 6;
  spec.pairs_per_agent = pairs;
  spec.seed = 7;
  const vsl::synth::Society soc = vsl::synth::generate_society(spec);

  auto rng = vsl::rng::stream(7, "bench");
  vsl::train::EmState state = vsl::train::init_state(
      3, spec.values, spec.dim, agents, 0.01, rng);

  vsl::net::Evaluator ev(soc.vs, soc.grounding);
  vsl::net::LossSpec loss_spec;
  loss_spec.lambda = state.lambda;

  std::vector<std::vector<int>> sizes;
  std::vector<std::vector<double>> params;
  for (const auto& n : state.theta.nets) {
    sizes.push_back(n.sizes);
    params.push_back(n.params);
  }

  std::printf("threads: %d, agents: %d, records: %zu, entities: %zu\n",
              vsl::par::max_threads(), agents, soc.vs.record_count(),
              soc.vs.entities->size());

  // forward sweep: alignment of every entity under every value
  auto t0 = Clock::now();
  for (int r = 0; r < repeats; ++r) ev.set_parameters(state.theta);
  const double sweep_par = ms_since(t0) / repeats;

  t0 = Clock::now();
  ref::Tables tables;
  for (int r = 0; r < repeats; ++r)
    tables = ref::build_tables(sizes, params, state.omegas, soc.vs);
  const double sweep_ser = ms_since(t0) / repeats;

  double max_align_diff = 0.0;
  for (int i = 0; i < spec.values; ++i) {
    const auto row = ev.alignment_row(i);
    for (std::size_t e = 0; e < row.size(); ++e)
      max_align_diff = std::max(
          max_align_diff, rel_diff(row[e], tables.align[i][e]));
  }

  // full objective with gradients vs serial forward-only recompute
  vsl::net::Gradients grads;
  t0 = Clock::now();
  vsl::net::EvalResult res;
  for (int r = 0; r < repeats; ++r)
    res = ev.evaluate(state.omegas, state.beta, loss_spec, &grads);
  const double eval_par = ms_since(t0) / repeats;

  t0 = Clock::now();
  double ref_total = 0.0;
  for (int r = 0; r < repeats; ++r)
    ref_total = ref::total_loss(tables, state.beta.cluster_of, state.beta.l_max,
                                state.lambda, true, true, soc.vs,
                                soc.grounding);
  const double eval_ser = ms_since(t0) / repeats;

  const double total_diff = rel_diff(res.total, ref_total);

  std::printf("%-34s %10s %10s %9s\n", "kernel", "serial ms", "openmp ms",
              "speedup");
  std::printf("%-34s %10.3f %10.3f %8.2fx\n", "alignment sweep", sweep_ser,
              sweep_par, sweep_ser / sweep_par);
  std::printf("%-34s %10.3f %10.3f %8.2fx\n",
              "objective (omp adds gradients)", eval_ser, eval_par,
              eval_ser / eval_par);
  std::printf("max alignment rel diff: %.3e\n", max_align_diff);
  std::printf("objective rel diff:     %.3e\n", total_diff);

  const bool ok = max_align_diff < 1e-12 && total_diff < 1e-12;
  std::printf("agreement: %s\n", ok ? "ok" : "MISMATCH");
  return ok ? 0 : 1;
}
