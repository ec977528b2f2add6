#include "vsl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vsl/errors.hpp"
#include "vsl/rng.hpp"
#include "vsl/synth.hpp"
#include "vsl/textio.hpp"

namespace vsl::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw DataError("write failed: " + path.string());
}

// Optional metric cell: absent values stay empty, infinities spell "inf".
std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  if (std::isinf(*v)) return "inf";
  return io::format_double(*v);
}

std::string show(const std::optional<double>& v, int decimals = 4) {
  if (!v) return "n/a";
  if (std::isinf(*v)) return "inf";
  return io::format_fixed(*v, decimals);
}

json opt_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return "inf";
  return *v;
}

json scores_to_json(const evo::Scores& s,
                    const std::vector<std::string>& names) {
  json coh = json::object();
  for (std::size_t i = 0; i < s.coherence.size(); ++i)
    coh[names[i]] = s.coherence[i];
  return json{{"coherence", coh},
              {"coherence_mean", s.coherence_mean},
              {"repr", s.repr},
              {"conc", opt_json(s.conc)},
              {"dunn", opt_json(s.dunn)},
              {"populated", s.populated}};
}

json state_to_json(const train::EmState& s) {
  json nets = json::array();
  for (const auto& n : s.theta.nets)
    nets.push_back(json{{"sizes", n.sizes}, {"params", n.params}});
  json omegas = json::array();
  json weights = json::array();
  for (const auto& o : s.omegas) {
    omegas.push_back(o);
    weights.push_back(net::softmax(o));
  }
  return json{{"beta", s.beta.cluster_of}, {"l_max", s.beta.l_max},
              {"lambda", s.lambda},        {"omegas", omegas},
              {"weights", weights},        {"theta", nets}};
}

train::EmState state_from_json(const json& j) {
  train::EmState s;
  try {
    s.beta.cluster_of = j.at("beta").get<std::vector<int>>();
    s.beta.l_max = j.at("l_max").get<int>();
    s.lambda = j.at("lambda").get<std::vector<double>>();
    s.omegas = j.at("omegas").get<std::vector<std::vector<double>>>();
    for (const auto& jn : j.at("theta")) {
      net::Mlp m;
      m.sizes = jn.at("sizes").get<std::vector<int>>();
      m.params = jn.at("params").get<std::vector<double>>();
      if (m.sizes.size() < 2 || m.params.size() != m.param_count())
        throw DataError("champion state: net shape mismatch");
      s.theta.nets.push_back(std::move(m));
    }
  } catch (const json::exception& ex) {
    throw DataError(std::string("champion state: ") + ex.what());
  }
  s.beta.validate();
  return s;
}

struct Stat {
  double mean = 0.0;
  double sd = 0.0;
  int n = 0;
};

Stat stat_of(const std::vector<double>& xs) {
  Stat st;
  st.n = static_cast<int>(xs.size());
  if (st.n == 0) return st;
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / st.n;
  if (st.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.sd = std::sqrt(ss / (st.n - 1));
  }
  return st;
}

json stat_json(const Stat& st) {
  return json{{"mean", st.mean}, {"std", st.sd}, {"n", st.n}};
}

std::string stat_line(const std::string& label, const Stat& st,
                      const std::string& extra = "") {
  std::ostringstream os;
  os << label << ": ";
  if (st.n == 0) {
    os << "n/a (n=0" << extra << ")";
  } else {
    os << io::format_fixed(st.mean, 4) << " +/- " << io::format_fixed(st.sd, 4)
       << " (n=" << st.n << extra << ")";
  }
  os << '\n';
  return os.str();
}

// Champion ordering across seeds: coherence first, then a defined Dunn
// index, then representativeness.
bool champion_better(const evo::Scores& a, const evo::Scores& b) {
  if (a.coherence_mean != b.coherence_mean)
    return a.coherence_mean > b.coherence_mean;
  if (a.dunn.has_value() != b.dunn.has_value()) return a.dunn.has_value();
  if (a.dunn && b.dunn && *a.dunn != *b.dunn) return *a.dunn > *b.dunn;
  return a.repr > b.repr;
}

std::string step_curves_csv(const std::vector<evo::StepRow>& rows,
                            const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "step,repr,conc,dunn,coherence_mean,populated,memory";
  for (const auto& n : names) os << ",coherence_" << n;
  os << '\n';
  for (const auto& r : rows) {
    os << r.step << ',' << io::format_double(r.repr) << ',' << cell(r.conc)
       << ',' << cell(r.dunn) << ',' << io::format_double(r.coherence_mean)
       << ',' << r.populated << ',' << r.memory_size;
    for (double c : r.coherence) os << ',' << io::format_double(c);
    os << '\n';
  }
  return os.str();
}

std::string epoch_curves_csv(const std::vector<train::EpochRow>& rows,
                             const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "epoch,loss_repr,loss_conc,total,repr,conc,dunn,populated";
  for (const auto& n : names) os << ",loss_" << n;
  for (const auto& n : names) os << ",coherence_" << n;
  for (const auto& n : names) os << ",lambda_" << n;
  os << '\n';
  for (const auto& r : rows) {
    os << r.epoch << ',' << io::format_double(r.loss_repr) << ','
       << io::format_double(r.loss_conc) << ',' << io::format_double(r.total)
       << ',' << io::format_double(r.repr) << ',' << cell(r.conc) << ','
       << cell(r.dunn) << ',' << r.populated;
    for (double v : r.loss_grounding) os << ',' << io::format_double(v);
    for (double v : r.coherence) os << ',' << io::format_double(v);
    for (double v : r.lambda) os << ',' << io::format_double(v);
    os << '\n';
  }
  return os.str();
}

std::string seed_line(std::uint64_t seed, const evo::Scores& s) {
  std::ostringstream os;
  os << "seed " << seed << ": repr=" << io::format_fixed(s.repr, 4)
     << " conc=" << show(s.conc) << " dunn=" << show(s.dunn)
     << " coherence=" << io::format_fixed(s.coherence_mean, 4)
     << " populated=" << s.populated;
  return os.str();
}

// Accumulates per-seed champion scores into distribution summaries.
struct Aggregate {
  std::vector<std::uint64_t> seeds;
  std::vector<evo::Scores> per_seed;
  std::vector<std::string> names;

  void add(std::uint64_t seed, const evo::Scores& s) {
    seeds.push_back(seed);
    per_seed.push_back(s);
  }

  json to_json() const {
    std::vector<double> repr, chm, pop, conc, dunn;
    int infinite = 0;
    std::vector<std::vector<double>> coh(names.size());
    for (const auto& s : per_seed) {
      repr.push_back(s.repr);
      chm.push_back(s.coherence_mean);
      pop.push_back(static_cast<double>(s.populated));
      if (s.conc) conc.push_back(*s.conc);
      if (s.dunn) {
        if (std::isinf(*s.dunn))
          ++infinite;
        else
          dunn.push_back(*s.dunn);
      }
      for (std::size_t i = 0; i < names.size(); ++i)
        coh[i].push_back(s.coherence[i]);
    }
    json per = json::array();
    for (std::size_t k = 0; k < per_seed.size(); ++k) {
      json row = scores_to_json(per_seed[k], names);
      row["seed"] = seeds[k];
      per.push_back(std::move(row));
    }
    json cohj = json::object();
    for (std::size_t i = 0; i < names.size(); ++i)
      cohj[names[i]] = stat_json(stat_of(coh[i]));
    json dj = stat_json(stat_of(dunn));
    dj["infinite"] = infinite;
    int best = 0;
    for (std::size_t k = 1; k < per_seed.size(); ++k)
      if (champion_better(per_seed[k], per_seed[static_cast<std::size_t>(best)]))
        best = static_cast<int>(k);
    return json{{"per_seed", per},
                {"repr", stat_json(stat_of(repr))},
                {"conc", stat_json(stat_of(conc))},
                {"dunn", dj},
                {"coherence_mean", stat_json(stat_of(chm))},
                {"coherence", cohj},
                {"populated", stat_json(stat_of(pop))},
                {"best_seed", per_seed.empty() ? json(nullptr)
                                               : json(seeds[static_cast<std::size_t>(best)])}};
  }

  std::string to_text() const {
    const json j = to_json();
    auto st = [&](const char* key) {
      const json& s = j.at(key);
      Stat out;
      out.mean = s.at("mean").get<double>();
      out.sd = s.at("std").get<double>();
      out.n = s.at("n").get<int>();
      return out;
    };
    std::ostringstream os;
    os << "seeds: " << per_seed.size() << '\n';
    os << stat_line("representativeness", st("repr"));
    os << stat_line("conciseness", st("conc"));
    {
      const json& d = j.at("dunn");
      Stat ds;
      ds.mean = d.at("mean").get<double>();
      ds.sd = d.at("std").get<double>();
      ds.n = d.at("n").get<int>();
      std::ostringstream extra;
      extra << ", infinite=" << d.at("infinite").get<int>();
      os << stat_line("dunn", ds, extra.str());
    }
    os << stat_line("coherence mean", st("coherence_mean"));
    for (const auto& n : names) {
      const json& s = j.at("coherence").at(n);
      Stat cs;
      cs.mean = s.at("mean").get<double>();
      cs.sd = s.at("std").get<double>();
      cs.n = s.at("n").get<int>();
      os << stat_line("coherence[" + n + "]", cs);
    }
    os << stat_line("populated clusters", st("populated"));
    if (!j.at("best_seed").is_null())
      os << "best seed: " << j.at("best_seed").get<std::uint64_t>() << '\n';
    return os.str();
  }
};

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

LoadedData load_data(const ExperimentConfig& cfg) {
  LoadedData data;
  if (cfg.synthetic || cfg.dataset_path.empty()) {
    synth::Society society = synth::generate_society(cfg.synth);
    data.vs = std::move(society.vs);
    data.grounding = std::move(society.grounding);
    return data;
  }
  ChoiceData cd = load_choice_csv(cfg.dataset_path, cfg.schema);
  GroundingBuild gb = build_grounding_dataset(cd);
  data.vs = std::move(cd.vs);
  data.grounding = std::move(gb.dataset);
  data.contexts = std::move(cd.contexts);
  data.has_context = cd.has_context;
  data.warnings = std::move(cd.warnings);
  data.excluded_fraction = gb.excluded_fraction();
  if (gb.comfort_excluded > 0) {
    std::ostringstream os;
    os << cfg.dataset_path << ": " << gb.comfort_excluded << " of "
       << gb.comfort_candidates
       << " instances have conflicting comfort cues and are excluded from "
          "the comfort grounding data ("
       << io::format_fixed(100.0 * data.excluded_fraction, 1) << "%)";
    data.warnings.push_back(os.str());
  }
  return data;
}

SeedRun run_seed(const evo::SearchConfig& base, std::uint64_t seed,
                 const ValueSystemDataset& vs, const GroundingDataset& gr) {
  evo::SearchConfig sc = base;
  sc.seed = seed;
  SeedRun out;
  if (sc.em.l_max == 1 && sc.steps <= 1) {
    // One slot and at most one refinement: run the training loop directly
    // so the telemetry carries per-epoch curves.
    out.direct = true;
    sc.validate();
    net::Evaluator ev(vs, gr);
    auto rng = rng::stream(seed, "memory-fill", 0);
    evo::Candidate cand;
    cand.state =
        train::init_state(sc.em.l_max, ev.value_count(), ev.feature_dim(),
                          ev.agent_count(), sc.em.lambda0, rng);
    out.coherence_best.assign(static_cast<std::size_t>(ev.value_count()), 0.0);
    ev.set_parameters(cand.state.theta);
    train::run_em(ev, cand.state, out.coherence_best, sc.em, false,
                  &out.epochs);
    cand.scores = evo::compute_scores(ev, cand.state);
    out.champion = cand;
    out.memory.push_back(std::move(cand));
    return out;
  }
  evo::SearchResult res = evo::run_search(sc, vs, gr, &out.steps);
  out.champion = std::move(res.champion);
  out.memory = std::move(res.memory);
  out.coherence_best = std::move(res.coherence_best);
  return out;
}

report::ClusterReport make_report(const net::Evaluator& ev,
                                  const train::EmState& state,
                                  const ValueSystemDataset& vs,
                                  const GroundingDataset& gr,
                                  const std::vector<AgentContext>* contexts) {
  const int l_max = state.beta.l_max;
  const int values = ev.value_count();
  std::vector<std::vector<double>> weights;
  std::vector<metrics::AlignFn> utils;
  weights.reserve(static_cast<std::size_t>(l_max));
  utils.reserve(static_cast<std::size_t>(l_max));
  for (int l = 0; l < l_max; ++l) {
    weights.push_back(net::softmax(state.omegas[static_cast<std::size_t>(l)]));
    utils.push_back(ev.utility_fn(weights.back()));
  }
  std::vector<metrics::AlignFn> aligns;
  aligns.reserve(static_cast<std::size_t>(values));
  for (int i = 0; i < values; ++i) aligns.push_back(ev.alignment_fn(i));
  return report::build_cluster_report(weights, state.beta, utils, aligns, vs,
                                      gr, contexts);
}

int cmd_learn(const ExperimentConfig& cfg) {
  cfg.validate();
  LoadedData data = load_data(cfg);
  for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';

  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  write_text(out / "config.snapshot", dump_config(cfg));
  if (!data.warnings.empty()) {
    std::string w;
    for (const auto& line : data.warnings) w += line + "\n";
    write_text(out / "warnings.txt", w);
  }

  Aggregate agg;
  agg.names = data.grounding.value_names;

  for (std::uint64_t seed : cfg.seeds) {
    SeedRun run = run_seed(cfg.search, seed, data.vs, data.grounding);
    const fs::path sdir = out / ("seed_" + std::to_string(seed));
    fs::create_directories(sdir);

    json champion = json{
        {"seed", seed},
        {"values", data.grounding.value_names},
        {"scores", scores_to_json(run.champion.scores, agg.names)},
        {"state", state_to_json(run.champion.state)},
        {"coherence_best", run.coherence_best},
    };
    write_text(sdir / "champion.json", json_text(champion));

    json memory = json::array();
    for (const auto& cand : run.memory) {
      memory.push_back(json{
          {"scores", scores_to_json(cand.scores, agg.names)},
          {"sizes", cand.state.beta.sizes()},
          {"lambda", cand.state.lambda},
      });
    }
    write_text(sdir / "memory.json", json_text(memory));

    write_text(sdir / "curves.csv",
               run.direct ? epoch_curves_csv(run.epochs, agg.names)
                          : step_curves_csv(run.steps, agg.names));

    net::Evaluator ev(data.vs, data.grounding);
    ev.set_parameters(run.champion.state.theta);
    report::ClusterReport rep =
        make_report(ev, run.champion.state, data.vs, data.grounding,
                    data.has_context ? &data.contexts : nullptr);
    write_text(sdir / "report.txt", rep.to_table());
    write_text(sdir / "report.json", rep.to_json());

    agg.add(seed, run.champion.scores);
    std::cout << seed_line(seed, run.champion.scores) << '\n';
  }

  write_text(out / "aggregate.json", json_text(agg.to_json()));
  const std::string text = agg.to_text();
  write_text(out / "aggregate.txt", text);
  std::cout << text << "bundle: " << out.string() << '\n';
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::vector<int>& budgets) {
  if (budgets.empty()) throw ConfigError("sweep: no cluster budgets given");
  LoadedData data = load_data(cfg);
  for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);

  struct Row {
    int l_max;
    std::uint64_t seed;
    evo::Scores scores;
  };
  std::vector<Row> rows;
  struct Summary {
    int l_max = 0;
    Stat repr, conc, dunn, chm, pop;
    int infinite = 0;
    std::optional<double> norm;
  };
  std::vector<Summary> summaries;

  for (int l : budgets) {
    // Each budget gets its own profile defaults, then the same overrides.
    ExperimentConfig c;
    apply_profile(c, cfg.profile, l);
    c.profile = cfg.profile;
    for (const auto& [k, v] : cfg.overrides)
      if (k != "lmax" && k != "profile") apply_override(c, k, v);
    c.search.em.l_max = l;
    c.validate();

    std::vector<double> repr, conc, dunn, chm, pop;
    int infinite = 0;
    for (std::uint64_t seed : c.seeds) {
      SeedRun run = run_seed(c.search, seed, data.vs, data.grounding);
      const evo::Scores& s = run.champion.scores;
      rows.push_back(Row{l, seed, s});
      repr.push_back(s.repr);
      chm.push_back(s.coherence_mean);
      pop.push_back(static_cast<double>(s.populated));
      if (s.conc) conc.push_back(*s.conc);
      if (s.dunn) {
        if (std::isinf(*s.dunn))
          ++infinite;
        else
          dunn.push_back(*s.dunn);
      }
      std::cout << "lmax " << l << " " << seed_line(seed, s) << '\n';
    }
    Summary sm;
    sm.l_max = l;
    sm.repr = stat_of(repr);
    sm.conc = stat_of(conc);
    sm.dunn = stat_of(dunn);
    sm.chm = stat_of(chm);
    sm.pop = stat_of(pop);
    sm.infinite = infinite;
    summaries.push_back(sm);
  }

  double best_dunn = 0.0;
  for (const auto& sm : summaries)
    if (sm.dunn.n > 0) best_dunn = std::max(best_dunn, sm.dunn.mean);
  for (auto& sm : summaries)
    if (sm.dunn.n > 0 && best_dunn > 0.0) sm.norm = sm.dunn.mean / best_dunn;

  std::ostringstream sc;
  sc << "lmax,seed,repr,conc,dunn,coherence_mean,populated\n";
  for (const auto& r : rows) {
    sc << r.l_max << ',' << r.seed << ',' << io::format_double(r.scores.repr)
       << ',' << cell(r.scores.conc) << ',' << cell(r.scores.dunn) << ','
       << io::format_double(r.scores.coherence_mean) << ','
       << r.scores.populated << '\n';
  }
  write_text(out / "sweep.csv", sc.str());

  std::ostringstream ss;
  ss << "lmax,n,repr_mean,repr_std,conc_mean,conc_std,dunn_mean,dunn_std,"
        "dunn_norm,infinite_dunn,coherence_mean,populated_mean\n";
  for (const auto& sm : summaries) {
    ss << sm.l_max << ',' << sm.repr.n << ','
       << io::format_double(sm.repr.mean) << ','
       << io::format_double(sm.repr.sd) << ',';
    if (sm.conc.n > 0)
      ss << io::format_double(sm.conc.mean) << ','
         << io::format_double(sm.conc.sd);
    else
      ss << ',';
    ss << ',';
    if (sm.dunn.n > 0)
      ss << io::format_double(sm.dunn.mean) << ','
         << io::format_double(sm.dunn.sd);
    else
      ss << ',';
    ss << ',' << (sm.norm ? io::format_double(*sm.norm) : std::string()) << ','
       << sm.infinite << ',' << io::format_double(sm.chm.mean) << ','
       << io::format_double(sm.pop.mean) << '\n';
  }
  write_text(out / "sweep_summary.csv", ss.str());

  for (const auto& sm : summaries) {
    std::cout << "lmax " << sm.l_max
              << ": repr=" << io::format_fixed(sm.repr.mean, 4) << " conc="
              << (sm.conc.n ? io::format_fixed(sm.conc.mean, 4) : "n/a")
              << " dunn="
              << (sm.dunn.n ? io::format_fixed(sm.dunn.mean, 4) : "n/a")
              << " dunn_norm=" << (sm.norm ? io::format_fixed(*sm.norm, 4) : "n/a")
              << '\n';
  }
  std::cout << "bundle: " << out.string() << '\n';
  return 0;
}

int cmd_baseline(const ExperimentConfig& cfg, const std::string& which) {
  if (which != "flat" && which != "sequential" && which != "both")
    throw ConfigError("baseline: unknown method '" + which + "'");
  LoadedData data = load_data(cfg);
  for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  const auto& names = data.grounding.value_names;

  json result = json::object();

  if (which == "flat" || which == "both") {
    json per = json::array();
    std::vector<double> repr;
    std::vector<std::vector<double>> coh(names.size());
    for (std::uint64_t seed : cfg.seeds) {
      synth::FlatBtConfig fc = cfg.flat;
      fc.seed = seed;
      synth::FlatBtResult r = synth::baseline_flat_bt(data.vs, data.grounding, fc);
      json cj = json::object();
      for (std::size_t i = 0; i < names.size(); ++i) {
        cj[names[i]] = r.coherence[i];
        coh[i].push_back(r.coherence[i]);
      }
      per.push_back(json{{"seed", seed},
                         {"loss", r.loss},
                         {"repr", r.repr},
                         {"coherence", cj}});
      repr.push_back(r.repr);
      std::cout << "flat seed " << seed
                << ": repr=" << io::format_fixed(r.repr, 4)
                << " loss=" << io::format_fixed(r.loss, 4) << '\n';
    }
    json cj = json::object();
    for (std::size_t i = 0; i < names.size(); ++i)
      cj[names[i]] = stat_json(stat_of(coh[i]));
    result["flat"] = json{{"per_seed", per},
                          {"repr", stat_json(stat_of(repr))},
                          {"coherence", cj}};
    std::cout << stat_line("flat repr", stat_of(repr));
  }

  if (which == "sequential" || which == "both") {
    json per = json::array();
    std::vector<double> repr;
    std::vector<std::vector<double>> coh(names.size());
    for (std::uint64_t seed : cfg.seeds) {
      synth::SequentialConfig qc = cfg.sequential;
      qc.seed = seed;
      synth::SequentialResult r =
          synth::baseline_sequential(data.vs, data.grounding, qc);
      json cj = json::object();
      for (std::size_t i = 0; i < names.size(); ++i) {
        cj[names[i]] = r.coherence[i];
        coh[i].push_back(r.coherence[i]);
      }
      per.push_back(json{{"seed", seed}, {"repr", r.repr}, {"coherence", cj}});
      repr.push_back(r.repr);
      std::cout << "sequential seed " << seed
                << ": repr=" << io::format_fixed(r.repr, 4) << '\n';
    }
    json cj = json::object();
    for (std::size_t i = 0; i < names.size(); ++i)
      cj[names[i]] = stat_json(stat_of(coh[i]));
    result["sequential"] = json{{"per_seed", per},
                                {"repr", stat_json(stat_of(repr))},
                                {"coherence", cj}};
    std::cout << stat_line("sequential repr", stat_of(repr));
  }

  write_text(out / "baseline.json", json_text(result));
  std::cout << "bundle: " << out.string() << '\n';
  return 0;
}

int cmd_ablate(const ExperimentConfig& cfg) {
  cfg.validate();
  LoadedData data = load_data(cfg);
  for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);

  json result = json::object();
  for (bool ascent : {true, false}) {
    evo::SearchConfig sc = cfg.search;
    sc.em.lagrange_ascent = ascent;
    Aggregate agg;
    agg.names = data.grounding.value_names;
    for (std::uint64_t seed : cfg.seeds) {
      SeedRun run = run_seed(sc, seed, data.vs, data.grounding);
      agg.add(seed, run.champion.scores);
      std::cout << (ascent ? "ascent-on " : "ascent-off ")
                << seed_line(seed, run.champion.scores) << '\n';
    }
    result[ascent ? "ascent_on" : "ascent_off"] = agg.to_json();
    std::cout << (ascent ? "[ascent on]\n" : "[ascent off]\n")
              << agg.to_text();
  }
  write_text(out / "ablation.json", json_text(result));
  std::cout << "bundle: " << out.string() << '\n';
  return 0;
}

int cmd_synth(const ExperimentConfig& cfg) {
  synth::Society society = synth::generate_society(cfg.synth);
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);

  json truth = json{
      {"assignment", society.truth.cluster_of},
      {"clusters", society.truth.l_max},
      {"weights", society.weights},
      {"agent_weights", society.agent_weights},
      {"coeffs", society.coeffs},
      {"values", society.grounding.value_names},
      {"spec",
       json{{"agents", cfg.synth.agents},
            {"clusters", cfg.synth.clusters},
            {"values", cfg.synth.values},
            {"dim", cfg.synth.dim},
            {"pairs", cfg.synth.pairs_per_agent},
            {"noise", cfg.synth.noise},
            {"margin", cfg.synth.margin},
            {"jitter", cfg.synth.jitter},
            {"seed", cfg.synth.seed}}},
  };
  write_text(out / "truth.json", json_text(truth));

  if (!society.raw.empty()) {
    write_choice_csv((out / "dataset.csv").string(), society.raw, {},
                     cfg.schema);
    std::cout << "dataset: " << (out / "dataset.csv").string() << '\n';
  } else {
    // Feature dimension without a CSV column mapping: dump records as JSON.
    json entities = json::array();
    for (const auto& e : *society.vs.entities) entities.push_back(e.features);
    json agents = json::array();
    for (const auto& a : society.vs.agents) {
      json recs = json::array();
      for (const auto& r : a.records)
        recs.push_back(json::array({r.left, r.right, r.label}));
      agents.push_back(json{{"id", a.agent_id}, {"records", recs}});
    }
    write_text(out / "dataset.json",
               json_text(json{{"entities", entities}, {"agents", agents}}));
    std::cout << "dataset: " << (out / "dataset.json").string() << '\n';
  }

  std::cout << "agents=" << society.vs.agent_count()
            << " entities=" << society.vs.entities->size()
            << " records=" << society.vs.record_count()
            << " values=" << society.grounding.value_count()
            << " clusters=" << society.truth.l_max << '\n'
            << "truth: " << (out / "truth.json").string() << '\n';
  return 0;
}

int cmd_report(const ExperimentConfig& cfg, const std::string& bundle_dir) {
  fs::path p(bundle_dir);
  if (p.extension() != ".json") p /= "champion.json";
  std::ifstream in(p);
  if (!in) throw DataError("report: cannot open " + p.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& ex) {
    throw DataError("report: " + p.string() + ": " + ex.what());
  }
  if (!j.contains("state"))
    throw DataError("report: " + p.string() + " has no state");
  train::EmState state = state_from_json(j.at("state"));

  LoadedData data = load_data(cfg);
  if (state.beta.agent_count() != data.vs.agent_count())
    throw DataError("report: assignment covers " +
                    std::to_string(state.beta.agent_count()) +
                    " agents but the dataset has " +
                    std::to_string(data.vs.agent_count()));

  net::Evaluator ev(data.vs, data.grounding);
  ev.set_parameters(state.theta);
  report::ClusterReport rep =
      make_report(ev, state, data.vs, data.grounding,
                  data.has_context ? &data.contexts : nullptr);
  const fs::path dir = p.parent_path();
  write_text(dir / "report.txt", rep.to_table());
  write_text(dir / "report.json", rep.to_json());
  std::cout << rep.to_table();
  return 0;
}

}  // namespace vsl::cli
