#include "vsl/report.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "vsl/textio.hpp"

namespace vsl::report {

namespace {

std::array<double, kContextFeatures> context_values(const AgentContext& c) {
  return {c.household_income,
          c.car_available ? 1.0 : 0.0,
          c.commuting ? 1.0 : 0.0,
          c.shopping ? 1.0 : 0.0,
          c.business ? 1.0 : 0.0,
          c.leisure ? 1.0 : 0.0};
}

nlohmann::json dunn_json(const std::optional<double>& dunn) {
  if (!dunn) return nullptr;
  if (std::isinf(*dunn)) return "inf";
  return *dunn;
}

}  // namespace

ClusterReport build_cluster_report(
    const std::vector<std::vector<double>>& cluster_weights,
    const metrics::Assignment& beta,
    std::span<const metrics::AlignFn> cluster_utils,
    std::span<const metrics::AlignFn> value_aligns,
    const ValueSystemDataset& vs, const GroundingDataset& grounding,
    const std::vector<AgentContext>* contexts) {
  beta.validate();
  if (static_cast<int>(cluster_weights.size()) != beta.l_max)
    throw std::invalid_argument("report: need weights for every cluster slot");
  if (static_cast<int>(cluster_utils.size()) != beta.l_max)
    throw std::invalid_argument("report: need a utility for every cluster slot");
  if (contexts && contexts->size() != vs.agents.size())
    throw std::invalid_argument("report: context rows must match agents");

  ClusterReport rep;
  rep.value_names = grounding.value_names;

  rep.repr = metrics::representativeness(cluster_utils, beta, vs);
  rep.conc = metrics::conciseness(cluster_utils, beta, vs);
  if (rep.conc) rep.dunn = metrics::dunn_index(rep.repr, *rep.conc);
  rep.coherence = metrics::coherence_grounding(value_aligns, grounding);
  double csum = 0.0;
  for (double c : rep.coherence) csum += c;
  rep.coherence_mean =
      rep.coherence.empty() ? 0.0 : csum / static_cast<double>(rep.coherence.size());

  const auto sizes = beta.sizes();
  for (int l : beta.populated()) {
    ClusterRow row;
    row.cluster = l;
    row.size = sizes[static_cast<std::size_t>(l)];
    row.weights = cluster_weights[static_cast<std::size_t>(l)];
    double dsum = 0.0;
    int members = 0;
    for (int j = 0; j < vs.agent_count(); ++j) {
      if (beta.cluster_of[static_cast<std::size_t>(j)] != l) continue;
      dsum += metrics::discordance_agent(
          cluster_utils[static_cast<std::size_t>(l)],
          vs.agents[static_cast<std::size_t>(j)]);
      ++members;
    }
    row.repr = 1.0 - dsum / static_cast<double>(members);
    rep.clusters.push_back(std::move(row));
  }

  if (contexts) {
    rep.has_context = true;
    std::array<double, kContextFeatures> total{};
    for (const auto& c : *contexts) {
      const auto v = context_values(c);
      for (int f = 0; f < kContextFeatures; ++f)
        total[static_cast<std::size_t>(f)] += v[static_cast<std::size_t>(f)];
    }
    for (int f = 0; f < kContextFeatures; ++f)
      rep.society_mean[static_cast<std::size_t>(f)] =
          total[static_cast<std::size_t>(f)] / static_cast<double>(contexts->size());

    for (int l : beta.populated()) {
      ContextRow row;
      row.cluster = l;
      std::array<double, kContextFeatures> sum{};
      int members = 0;
      for (int j = 0; j < vs.agent_count(); ++j) {
        if (beta.cluster_of[static_cast<std::size_t>(j)] != l) continue;
        const auto v = context_values((*contexts)[static_cast<std::size_t>(j)]);
        for (int f = 0; f < kContextFeatures; ++f)
          sum[static_cast<std::size_t>(f)] += v[static_cast<std::size_t>(f)];
        ++members;
      }
      for (int f = 0; f < kContextFeatures; ++f) {
        const double mean =
            sum[static_cast<std::size_t>(f)] / static_cast<double>(members);
        row.mean[static_cast<std::size_t>(f)] = mean;
        const double base = rep.society_mean[static_cast<std::size_t>(f)];
        if (base != 0.0)
          row.deviation_pct[static_cast<std::size_t>(f)] =
              (mean - base) / base * 100.0;
      }
      rep.context.push_back(row);
    }
  }
  return rep;
}

std::string ClusterReport::to_table() const {
  std::ostringstream os;
  os << "cluster  size  repr    weights (";
  for (std::size_t i = 0; i < value_names.size(); ++i)
    os << (i ? ", " : "") << value_names[i];
  os << ")\n";
  for (const auto& row : clusters) {
    os << "  " << row.cluster << "      " << row.size << "    "
       << io::format_fixed(row.repr, 4) << "  ";
    for (std::size_t i = 0; i < row.weights.size(); ++i)
      os << (i ? ", " : "") << io::format_fixed(row.weights[i], 4);
    os << '\n';
  }
  os << "representativeness: " << io::format_fixed(repr, 4) << '\n';
  os << "conciseness:        " << (conc ? io::format_fixed(*conc, 4) : "n/a")
     << '\n';
  std::string dunn_text = "n/a";
  if (dunn) dunn_text = std::isinf(*dunn) ? "inf" : io::format_fixed(*dunn, 4);
  os << "dunn index:         " << dunn_text << '\n';
  os << "coherence:          ";
  for (std::size_t i = 0; i < coherence.size(); ++i)
    os << (i ? ", " : "") << value_names[i] << "="
       << io::format_fixed(coherence[i], 4);
  os << " (mean " << io::format_fixed(coherence_mean, 4) << ")\n";

  if (has_context) {
    os << "context (deviation vs society mean)\n";
    os << "cluster";
    for (const char* name : kContextNames) os << "  " << name;
    os << '\n';
    for (const auto& row : context) {
      os << "  " << row.cluster;
      for (int f = 0; f < kContextFeatures; ++f) {
        os << "  " << io::format_fixed(row.mean[static_cast<std::size_t>(f)], 3);
        const auto& dev = row.deviation_pct[static_cast<std::size_t>(f)];
        if (dev)
          os << " (" << (*dev >= 0 ? "+" : "") << io::format_fixed(*dev, 1)
             << "%)";
        else
          os << " (n/a)";
      }
      os << '\n';
    }
  }
  return os.str();
}

std::string ClusterReport::to_json() const {
  nlohmann::json j;
  j["value_names"] = value_names;
  j["representativeness"] = repr;
  j["conciseness"] = conc ? nlohmann::json(*conc) : nlohmann::json(nullptr);
  j["dunn"] = dunn_json(dunn);
  j["coherence"] = coherence;
  j["coherence_mean"] = coherence_mean;
  j["clusters"] = nlohmann::json::array();
  for (const auto& row : clusters) {
    nlohmann::json c;
    c["cluster"] = row.cluster;
    c["size"] = row.size;
    c["weights"] = row.weights;
    c["representativeness"] = row.repr;
    j["clusters"].push_back(c);
  }
  if (has_context) {
    j["society_mean"] = society_mean;
    j["context"] = nlohmann::json::array();
    for (const auto& row : context) {
      nlohmann::json c;
      c["cluster"] = row.cluster;
      c["mean"] = row.mean;
      nlohmann::json dev = nlohmann::json::array();
      for (const auto& d : row.deviation_pct)
        dev.push_back(d ? nlohmann::json(*d) : nlohmann::json(nullptr));
      c["deviation_pct"] = dev;
      j["context"].push_back(c);
    }
  }
  return j.dump(2) + "\n";
}

}  // namespace vsl::report
