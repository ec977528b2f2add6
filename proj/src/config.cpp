#include "vsl/config.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vsl/errors.hpp"
#include "vsl/textio.hpp"

namespace vsl::cli {

namespace {

struct ProfileRow {
  int l_max;
  double eps0, alpha_theta, alpha_omega;
  int steps, memory, epochs, reps_later, reps_first;
  double p_move, strength;
};

// Published settings per cluster budget for the route-choice study.
constexpr std::array<ProfileRow, 8> kRouteProfiles{{
    {1, 0.00, 0.005, 0.010, 1, 1, 500, 10, 10, 0.0, 0.00},
    {2, 0.20, 0.005, 0.010, 150, 4, 3, 3, 10, 0.1, 0.30},
    {3, 0.20, 0.005, 0.015, 200, 5, 3, 3, 12, 0.1, 0.25},
    {4, 0.25, 0.005, 0.020, 200, 5, 3, 4, 12, 0.1, 0.25},
    {5, 0.30, 0.005, 0.020, 225, 5, 4, 3, 12, 0.1, 0.25},
    {6, 0.30, 0.005, 0.020, 250, 6, 4, 3, 12, 0.1, 0.20},
    {9, 0.30, 0.006, 0.020, 400, 7, 4, 5, 16, 0.1, 0.10},
    {12, 0.40, 0.006, 0.025, 400, 8, 4, 5, 20, 0.1, 0.10},
}};

double parse_num(const std::string& key, const std::string& value) {
  bool ok = false;
  const double v = io::parse_double(value, ok);
  if (!ok) throw ConfigError("config: '" + key + "' is not numeric: " + value);
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_num(key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("config: '" + key + "' must be an integer: " + value);
  return i;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on") return true;
  if (value == "0" || value == "false" || value == "off") return false;
  throw ConfigError("config: '" + key + "' must be a boolean: " + value);
}

std::vector<std::string> split_list(const std::string& value) {
  return io::split_csv(value);
}

}  // namespace

void ExperimentConfig::validate() const {
  search.validate();
  if (seeds.empty()) throw ConfigError("config: at least one seed required");
  if (synthetic) synth.validate();
  if (!synthetic && dataset_path.empty())
    throw ConfigError("config: either a dataset path or synthetic data required");
}

void apply_profile(ExperimentConfig& cfg, const std::string& name, int l_max) {
  if (l_max < 1) throw ConfigError("config: lmax must be >= 1");
  cfg.profile = name;
  cfg.search.em.l_max = l_max;
  cfg.search.em.lambda0 = 0.01;
  cfg.search.em.alpha_lambda = 0.005;
  cfg.search.em.gamma_lambda = 1e-4;

  if (name == "route") {
    // nearest tabulated row, larger on ties
    const ProfileRow* best = &kRouteProfiles[0];
    for (const auto& row : kRouteProfiles) {
      if (std::abs(row.l_max - l_max) < std::abs(best->l_max - l_max) ||
          (std::abs(row.l_max - l_max) == std::abs(best->l_max - l_max) &&
           row.l_max > best->l_max))
        best = &row;
    }
    cfg.search.em.alpha_theta = best->alpha_theta;
    cfg.search.em.alpha_omega = best->alpha_omega;
    cfg.search.em.epochs = best->epochs;
    cfg.search.em.reps_first = best->reps_first;
    cfg.search.em.reps_later = best->reps_later;
    cfg.search.steps = best->steps;
    cfg.search.memory_size = best->memory;
    cfg.search.eps_mutate = best->eps0;
    cfg.search.mutation.p_move = best->p_move;
    cfg.search.mutation.strength = best->strength;
  } else if (name == "synthetic") {
    cfg.search.em.alpha_theta = 0.05;
    cfg.search.em.alpha_omega = 0.4;
    cfg.search.em.alpha_lambda = 0.05;
    cfg.search.em.epochs = 3;
    cfg.search.em.reps_first = 12;
    cfg.search.em.reps_later = 4;
    cfg.search.steps = 50;
    cfg.search.memory_size = l_max == 1 ? 1 : 5;
    cfg.search.eps_mutate = l_max == 1 ? 0.0 : 0.2;
    cfg.search.mutation.p_move = 0.1;
    cfg.search.mutation.strength = 0.25;
    if (l_max == 1) {
      cfg.search.steps = 1;
      cfg.search.em.epochs = 50;
      cfg.search.em.reps_later = 12;
    }
  } else {
    throw ConfigError("config: unknown profile '" + name + "'");
  }
  if (l_max == 1 && name == "route") {
    cfg.search.memory_size = 1;
    cfg.search.eps_mutate = 0.0;
    cfg.search.mutation.p_move = 0.0;
    cfg.search.mutation.strength = 0.0;
  }
}

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  auto& em = cfg.search.em;
  if (key == "lmax") {
    em.l_max = parse_int(key, value);
  } else if (key == "seeds") {
    cfg.seeds.clear();
    for (const auto& s : split_list(value))
      cfg.seeds.push_back(static_cast<std::uint64_t>(parse_int(key, s)));
    if (cfg.seeds.empty()) throw ConfigError("config: empty seed list");
  } else if (key == "seed") {
    cfg.seeds = {static_cast<std::uint64_t>(parse_int(key, value))};
  } else if (key == "steps") {
    cfg.search.steps = parse_int(key, value);
  } else if (key == "memory") {
    cfg.search.memory_size = parse_int(key, value);
  } else if (key == "eps0") {
    cfg.search.eps_mutate = parse_num(key, value);
  } else if (key == "pm") {
    cfg.search.mutation.p_move = parse_num(key, value);
  } else if (key == "sm") {
    cfg.search.mutation.strength = parse_num(key, value);
  } else if (key == "epochs") {
    em.epochs = parse_int(key, value);
  } else if (key == "b0") {
    em.reps_first = parse_int(key, value);
  } else if (key == "br") {
    em.reps_later = parse_int(key, value);
  } else if (key == "alpha_theta") {
    em.alpha_theta = parse_num(key, value);
  } else if (key == "alpha_omega") {
    em.alpha_omega = parse_num(key, value);
  } else if (key == "alpha_lambda") {
    em.alpha_lambda = parse_num(key, value);
  } else if (key == "gamma_lambda") {
    em.gamma_lambda = parse_num(key, value);
  } else if (key == "lambda0") {
    em.lambda0 = parse_num(key, value);
  } else if (key == "ascent") {
    em.lagrange_ascent = parse_bool(key, value);
  } else if (key == "dataset") {
    cfg.dataset_path = value;
    cfg.synthetic = false;
  } else if (key == "synthetic") {
    cfg.synthetic = parse_bool(key, value);
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "synth.agents") {
    cfg.synth.agents = parse_int(key, value);
  } else if (key == "synth.clusters") {
    cfg.synth.clusters = parse_int(key, value);
  } else if (key == "synth.values") {
    cfg.synth.values = parse_int(key, value);
  } else if (key == "synth.dim") {
    cfg.synth.dim = parse_int(key, value);
  } else if (key == "synth.pairs") {
    cfg.synth.pairs_per_agent = parse_int(key, value);
  } else if (key == "synth.noise") {
    cfg.synth.noise = parse_num(key, value);
  } else if (key == "synth.margin") {
    cfg.synth.margin = parse_num(key, value);
  } else if (key == "synth.jitter") {
    cfg.synth.jitter = parse_num(key, value);
  } else if (key == "synth.seed") {
    cfg.synth.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "schema.id") {
    cfg.schema.agent_id = value;
  } else if (key == "schema.choice") {
    cfg.schema.choice = value;
  } else if (key == "schema.route1") {
    const auto f = split_list(value);
    if (f.size() != 4) throw ConfigError("config: schema.route1 needs 4 names");
    for (int i = 0; i < 4; ++i) cfg.schema.route1[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i)];
  } else if (key == "schema.route2") {
    const auto f = split_list(value);
    if (f.size() != 4) throw ConfigError("config: schema.route2 needs 4 names");
    for (int i = 0; i < 4; ++i) cfg.schema.route2[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i)];
  } else if (key == "schema.context") {
    const auto f = split_list(value);
    if (static_cast<int>(f.size()) != kContextFeatures)
      throw ConfigError("config: schema.context needs 6 names");
    for (int i = 0; i < kContextFeatures; ++i)
      cfg.schema.context[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i)];
  } else if (key == "flat.steps") {
    cfg.flat.steps = parse_int(key, value);
  } else if (key == "flat.lr") {
    cfg.flat.lr = parse_num(key, value);
  } else if (key == "seq.grounding_steps") {
    cfg.sequential.grounding_steps = parse_int(key, value);
  } else if (key == "seq.weight_steps") {
    cfg.sequential.weight_steps = parse_int(key, value);
  } else if (key == "seq.alpha_theta") {
    cfg.sequential.alpha_theta = parse_num(key, value);
  } else if (key == "seq.alpha_omega") {
    cfg.sequential.alpha_omega = parse_num(key, value);
  } else if (key == "profile") {
    cfg.profile = value;  // consumed in resolve_config; kept for snapshots
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + path + ":" + std::to_string(line_no) +
                        ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const auto wb = s.find_first_not_of(" \t");
      const auto we = s.find_last_not_of(" \t");
      s = wb == std::string::npos ? "" : s.substr(wb, we - wb + 1);
    };
    trim(key);
    trim(value);
    if (key.empty())
      throw ConfigError("config: " + path + ":" + std::to_string(line_no) +
                        ": empty key");
    out.emplace_back(key, value);
  }
  return out;
}

ExperimentConfig resolve_config(
    const std::vector<std::pair<std::string, std::string>>& file_overrides,
    const std::vector<std::pair<std::string, std::string>>& cli_overrides) {
  // profile and lmax decide the defaults, so find them first (last wins)
  std::string profile = "route";
  int l_max = 1;
  for (const auto& kvs : {&file_overrides, &cli_overrides}) {
    for (const auto& [k, v] : *kvs) {
      if (k == "profile") profile = v;
      if (k == "lmax") {
        bool ok = false;
        const double num = io::parse_double(v, ok);
        if (!ok) throw ConfigError("config: lmax is not numeric: " + v);
        l_max = static_cast<int>(num);
      }
    }
  }
  ExperimentConfig cfg;
  apply_profile(cfg, profile, l_max);
  for (const auto& [k, v] : file_overrides) apply_override(cfg, k, v);
  for (const auto& [k, v] : cli_overrides) apply_override(cfg, k, v);
  cfg.search.em.l_max = l_max;
  cfg.overrides = file_overrides;
  cfg.overrides.insert(cfg.overrides.end(), cli_overrides.begin(),
                       cli_overrides.end());
  return cfg;
}

std::string dump_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  const auto& em = cfg.search.em;
  os << "profile=" << cfg.profile << '\n';
  os << "lmax=" << em.l_max << '\n';
  os << "seeds=";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
    os << (i ? "," : "") << cfg.seeds[i];
  os << '\n';
  os << "steps=" << cfg.search.steps << '\n';
  os << "memory=" << cfg.search.memory_size << '\n';
  os << "eps0=" << io::format_double(cfg.search.eps_mutate) << '\n';
  os << "pm=" << io::format_double(cfg.search.mutation.p_move) << '\n';
  os << "sm=" << io::format_double(cfg.search.mutation.strength) << '\n';
  os << "epochs=" << em.epochs << '\n';
  os << "b0=" << em.reps_first << '\n';
  os << "br=" << em.reps_later << '\n';
  os << "alpha_theta=" << io::format_double(em.alpha_theta) << '\n';
  os << "alpha_omega=" << io::format_double(em.alpha_omega) << '\n';
  os << "alpha_lambda=" << io::format_double(em.alpha_lambda) << '\n';
  os << "gamma_lambda=" << io::format_double(em.gamma_lambda) << '\n';
  os << "lambda0=" << io::format_double(em.lambda0) << '\n';
  os << "ascent=" << (em.lagrange_ascent ? "true" : "false") << '\n';
  os << "synthetic=" << (cfg.synthetic ? "true" : "false") << '\n';
  if (!cfg.dataset_path.empty()) os << "dataset=" << cfg.dataset_path << '\n';
  os << "out=" << cfg.out_dir << '\n';
  if (cfg.synthetic) {
    os << "synth.agents=" << cfg.synth.agents << '\n';
    os << "synth.clusters=" << cfg.synth.clusters << '\n';
    os << "synth.values=" << cfg.synth.values << '\n';
    os << "synth.dim=" << cfg.synth.dim << '\n';
    os << "synth.pairs=" << cfg.synth.pairs_per_agent << '\n';
    os << "synth.noise=" << io::format_double(cfg.synth.noise) << '\n';
    os << "synth.margin=" << io::format_double(cfg.synth.margin) << '\n';
    os << "synth.jitter=" << io::format_double(cfg.synth.jitter) << '\n';
    os << "synth.seed=" << cfg.synth.seed << '\n';
  }
  return os.str();
}

}  // namespace vsl::cli
