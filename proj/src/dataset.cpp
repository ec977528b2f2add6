#include "vsl/dataset.hpp"

#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "vsl/errors.hpp"
#include "vsl/textio.hpp"

namespace vsl {

ScalingBounds compute_bounds(const std::vector<RawInstance>& raw) {
  ScalingBounds b;
  b.lo.assign(4, std::numeric_limits<double>::infinity());
  b.hi.assign(4, -std::numeric_limits<double>::infinity());
  for (const auto& r : raw) {
    for (int f = 0; f < 4; ++f) {
      for (double v : {r.route1[f], r.route2[f]}) {
        if (v < b.lo[f]) b.lo[f] = v;
        if (v > b.hi[f]) b.hi[f] = v;
      }
    }
  }
  if (raw.empty()) {
    b.lo.assign(4, 0.0);
    b.hi.assign(4, 0.0);
  }
  return b;
}

std::vector<double> scale_route(const std::array<double, 4>& raw,
                                const ScalingBounds& bounds) {
  std::vector<double> out(4);
  for (int f = 0; f < 4; ++f) out[f] = bounds.scale(raw[f], f);
  return out;
}

namespace {

int find_column(const std::vector<std::string>& header, const std::string& name,
                const std::string& path) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw DataError(path + ": missing column '" + name + "'");
}

double cell_double(const std::vector<std::string>& row, int col,
                   const std::string& name, std::size_t line,
                   const std::string& path) {
  if (col >= static_cast<int>(row.size()))
    throw DataError(path + ":" + std::to_string(line) + ": short row, column '" +
                    name + "' missing");
  bool ok = false;
  double v = io::parse_double(row[col], ok);
  if (!ok)
    throw DataError(path + ":" + std::to_string(line) + ": column '" + name +
                    "' is not numeric: '" + row[col] + "'");
  return v;
}

}  // namespace

ChoiceData load_choice_csv(const std::string& path, const CsvSchema& schema,
                           const std::optional<ScalingBounds>& bounds) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const auto header = io::split_csv(line);

  const int c_id = find_column(header, schema.agent_id, path);
  const int c_choice = find_column(header, schema.choice, path);
  std::array<int, 4> c_r1{}, c_r2{};
  for (int f = 0; f < 4; ++f) {
    c_r1[f] = find_column(header, schema.route1[f], path);
    c_r2[f] = find_column(header, schema.route2[f], path);
  }
  std::array<int, kContextFeatures> c_ctx{};
  bool have_context = true;
  for (int f = 0; f < kContextFeatures; ++f) {
    bool found = false;
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == schema.context[f]) {
        c_ctx[f] = static_cast<int>(i);
        found = true;
        break;
      }
    if (!found) have_context = false;
  }

  ChoiceData data;
  data.has_context = have_context;
  if (!have_context)
    data.warnings.push_back(path + ": context columns absent, reports skip them");

  std::map<std::string, int> agent_index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    bool blank = true;
    for (char ch : line)
      if (ch != ' ' && ch != '\t' && ch != '\r') blank = false;
    if (blank) continue;
    const auto row = io::split_csv(line);

    RawInstance inst;
    if (c_id >= static_cast<int>(row.size()))
      throw DataError(path + ":" + std::to_string(line_no) + ": short row");
    inst.agent_id = row[c_id];
    for (int f = 0; f < 4; ++f) {
      inst.route1[f] = cell_double(row, c_r1[f], schema.route1[f], line_no, path);
      inst.route2[f] = cell_double(row, c_r2[f], schema.route2[f], line_no, path);
    }
    const double choice =
        cell_double(row, c_choice, schema.choice, line_no, path);
    if (choice != 1.0 && choice != 2.0)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": choice must be 1 or 2, got '" + row[c_choice] + "'");
    inst.choice = static_cast<int>(choice);

    if (agent_index.find(inst.agent_id) == agent_index.end()) {
      agent_index[inst.agent_id] = static_cast<int>(data.vs.agents.size());
      data.vs.agents.push_back({inst.agent_id, {}});
      AgentContext ctx;
      ctx.agent_id = inst.agent_id;
      if (have_context) {
        ctx.household_income =
            cell_double(row, c_ctx[0], schema.context[0], line_no, path);
        ctx.car_available =
            cell_double(row, c_ctx[1], schema.context[1], line_no, path) != 0.0;
        ctx.commuting =
            cell_double(row, c_ctx[2], schema.context[2], line_no, path) != 0.0;
        ctx.shopping =
            cell_double(row, c_ctx[3], schema.context[3], line_no, path) != 0.0;
        ctx.business =
            cell_double(row, c_ctx[4], schema.context[4], line_no, path) != 0.0;
        ctx.leisure =
            cell_double(row, c_ctx[5], schema.context[5], line_no, path) != 0.0;
      }
      data.contexts.push_back(ctx);
    }
    data.raw.push_back(inst);
  }
  if (data.raw.empty()) throw DataError(path + ": no data rows");

  data.bounds = bounds ? *bounds : compute_bounds(data.raw);
  for (int f = 0; f < 4; ++f)
    if (data.bounds.hi[f] <= data.bounds.lo[f])
      data.warnings.push_back(std::string("feature '") + kRouteFeatureNames[f] +
                              "' is constant, scaled to 0");

  auto table = std::make_shared<EntityTable>();
  table->reserve(2 * data.raw.size());
  for (const auto& inst : data.raw) {
    const auto e1 = static_cast<std::uint32_t>(table->size());
    table->push_back({scale_route(inst.route1, data.bounds)});
    table->push_back({scale_route(inst.route2, data.bounds)});
    PreferenceRecord rec;
    if (inst.choice == 1) {
      rec.left = e1;
      rec.right = e1 + 1;
    } else {
      rec.left = e1 + 1;
      rec.right = e1;
    }
    rec.label = 1.0;
    data.vs.agents[agent_index[inst.agent_id]].records.push_back(rec);
  }
  data.vs.entities = table;
  return data;
}

GroundingBuild build_grounding_dataset(const ChoiceData& data) {
  GroundingBuild out;
  out.dataset.entities = data.vs.entities;
  out.dataset.value_names.assign(kRouteValueNames.begin(),
                                 kRouteValueNames.end());

  std::map<std::string, int> agent_index;
  for (std::size_t j = 0; j < data.vs.agents.size(); ++j)
    agent_index[data.vs.agents[j].agent_id] = static_cast<int>(j);

  // Working layout mirrors vs.agents; empty agents are dropped at the end.
  std::vector<std::vector<AgentDataset>> work(
      3, std::vector<AgentDataset>(data.vs.agents.size()));
  for (int v = 0; v < 3; ++v)
    for (std::size_t j = 0; j < data.vs.agents.size(); ++j)
      work[v][j].agent_id = data.vs.agents[j].agent_id;

  for (std::size_t k = 0; k < data.raw.size(); ++k) {
    const auto& inst = data.raw[k];
    const auto e1 = static_cast<std::uint32_t>(2 * k);
    const auto e2 = e1 + 1;
    const int j = agent_index.at(inst.agent_id);
    ++out.comfort_candidates;

    // time and cost: lower raw attribute is better for the value.
    for (int v = 0; v < 2; ++v) {
      const double a = inst.route1[v], b = inst.route2[v];
      const double label = a < b ? 1.0 : (a > b ? 0.0 : 0.5);
      work[v][j].records.push_back({e1, e2, label});
    }

    // comfort: weak dominance on (headway, interchanges) with at least
    // one strict; mixed signals are excluded.
    const double h1 = inst.route1[2], h2 = inst.route2[2];
    const double i1 = inst.route1[3], i2 = inst.route2[3];
    if (h1 == h2 && i1 == i2) {
      work[2][j].records.push_back({e1, e2, 0.5});
    } else if (h1 <= h2 && i1 <= i2) {
      work[2][j].records.push_back({e1, e2, 1.0});
    } else if (h1 >= h2 && i1 >= i2) {
      work[2][j].records.push_back({e1, e2, 0.0});
    } else {
      ++out.comfort_excluded;
    }
  }

  out.dataset.per_value.resize(3);
  for (int v = 0; v < 3; ++v)
    for (auto& a : work[v])
      if (!a.records.empty()) out.dataset.per_value[v].push_back(std::move(a));
  return out;
}

void write_choice_csv(const std::string& path,
                      const std::vector<RawInstance>& raw,
                      const std::vector<AgentContext>& contexts,
                      const CsvSchema& schema) {
  std::ofstream outf(path);
  if (!outf) throw DataError("cannot write '" + path + "'");

  std::map<std::string, const AgentContext*> ctx;
  for (const auto& c : contexts) ctx[c.agent_id] = &c;

  std::ostringstream head;
  head << schema.agent_id << ',' << schema.choice;
  for (int f = 0; f < 4; ++f) head << ',' << schema.route1[f];
  for (int f = 0; f < 4; ++f) head << ',' << schema.route2[f];
  for (int f = 0; f < kContextFeatures; ++f) head << ',' << schema.context[f];
  outf << head.str() << '\n';

  for (const auto& r : raw) {
    outf << r.agent_id << ',' << r.choice;
    for (int f = 0; f < 4; ++f) outf << ',' << io::format_double(r.route1[f]);
    for (int f = 0; f < 4; ++f) outf << ',' << io::format_double(r.route2[f]);
    const AgentContext* c = ctx.count(r.agent_id) ? ctx.at(r.agent_id) : nullptr;
    if (c) {
      outf << ',' << io::format_double(c->household_income) << ','
           << (c->car_available ? 1 : 0) << ',' << (c->commuting ? 1 : 0) << ','
           << (c->shopping ? 1 : 0) << ',' << (c->business ? 1 : 0) << ','
           << (c->leisure ? 1 : 0);
    } else {
      outf << ",0,0,0,0,0,0";
    }
    outf << '\n';
  }
  if (!outf) throw DataError("write failed for '" + path + "'");
}

}  // namespace vsl
