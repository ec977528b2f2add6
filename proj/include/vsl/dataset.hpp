#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vsl {

// A decision alternative described by a fixed-length feature vector,
// already scaled into [0, 1] per feature.
struct Entity {
  std::vector<double> features;
};

// All datasets built from one source share one entity table and refer to
// entities by index, so alignment values can be computed once per entity.
using EntityTable = std::vector<Entity>;
using EntityTablePtr = std::shared_ptr<const EntityTable>;

// One labelled comparison. label 1 means `left` is preferred, 0 means
// `right`, 0.5 means indifference.
struct PreferenceRecord {
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double label = 1.0;
};

struct AgentDataset {
  std::string agent_id;
  std::vector<PreferenceRecord> records;
};

// Observed choices per agent; the training signal for value systems.
struct ValueSystemDataset {
  EntityTablePtr entities;
  std::vector<AgentDataset> agents;

  std::size_t record_count() const {
    std::size_t n = 0;
    for (const auto& a : agents) n += a.records.size();
    return n;
  }
  int feature_dim() const {
    return entities && !entities->empty()
               ? static_cast<int>((*entities)[0].features.size())
               : 0;
  }
  int agent_count() const { return static_cast<int>(agents.size()); }
};

// Value-wise comparison labels; the training signal for the shared
// grounding functions. per_value[i] holds only agents that contribute at
// least one record for value i.
struct GroundingDataset {
  EntityTablePtr entities;
  std::vector<std::string> value_names;
  std::vector<std::vector<AgentDataset>> per_value;

  int value_count() const { return static_cast<int>(per_value.size()); }
  std::size_t record_count(int value) const {
    std::size_t n = 0;
    for (const auto& a : per_value[value]) n += a.records.size();
    return n;
  }
};

// Socio-demographic descriptors carried alongside the choice data.
struct AgentContext {
  std::string agent_id;
  double household_income = 0.0;
  bool car_available = false;
  bool commuting = false;
  bool shopping = false;
  bool business = false;
  bool leisure = false;
};

inline constexpr int kContextFeatures = 6;
inline constexpr std::array<const char*, kContextFeatures> kContextNames{
    "income", "car", "commuting", "shopping", "business", "leisure"};

// Per-feature min/max used for the affine map into [0, 1]. A feature
// with lo == hi maps to 0.
struct ScalingBounds {
  std::vector<double> lo, hi;

  double scale(double v, int feature) const {
    const double l = lo[feature], h = hi[feature];
    if (h <= l) return 0.0;
    double s = (v - l) / (h - l);
    if (s < 0.0) s = 0.0;
    if (s > 1.0) s = 1.0;
    return s;
  }
  bool valid() const { return !lo.empty() && lo.size() == hi.size(); }
};

// Column names of the route-choice CSV export. Overridable through
// configuration for files with different headers.
struct CsvSchema {
  std::string agent_id = "ID";
  std::string choice = "choice";
  std::array<std::string, 4> route1{{"tt1", "tc1", "hw1", "ch1"}};
  std::array<std::string, 4> route2{{"tt2", "tc2", "hw2", "ch2"}};
  std::array<std::string, kContextFeatures> context{
      {"hh_inc_abs", "car_availability", "commute", "shopping", "business",
       "leisure"}};
};

inline constexpr std::array<const char*, 4> kRouteFeatureNames{
    "time", "cost", "headway", "interchanges"};
inline constexpr std::array<const char*, 3> kRouteValueNames{"time", "cost",
                                                             "comfort"};

// One CSV row before scaling: both routes in raw units plus the choice.
struct RawInstance {
  std::string agent_id;
  std::array<double, 4> route1{};
  std::array<double, 4> route2{};
  int choice = 1;
};

struct ChoiceData {
  ValueSystemDataset vs;
  std::vector<AgentContext> contexts;  // aligned with vs.agents
  bool has_context = false;            // context columns present in the file
  std::vector<RawInstance> raw;        // file order
  ScalingBounds bounds;
  std::vector<std::string> warnings;
};

ScalingBounds compute_bounds(const std::vector<RawInstance>& raw);

std::vector<double> scale_route(const std::array<double, 4>& raw,
                                const ScalingBounds& bounds);

// Parses the route-choice CSV. Each row becomes two entities and one
// preference record whose `left` is the chosen route with label 1.
// Throws DataError on missing columns or malformed cells.
ChoiceData load_choice_csv(const std::string& path,
                           const CsvSchema& schema = {},
                           const std::optional<ScalingBounds>& bounds = {});

struct GroundingBuild {
  GroundingDataset dataset;
  std::size_t comfort_candidates = 0;  // choice instances examined
  std::size_t comfort_excluded = 0;    // headway/interchange conflicts
  double excluded_fraction() const {
    return comfort_candidates == 0
               ? 0.0
               : static_cast<double>(comfort_excluded) /
                     static_cast<double>(comfort_candidates);
  }
};

// Derives per-value comparison labels from the raw route attributes:
// lower travel time aligns with "time", lower cost with "cost", and a
// route weakly better on both headway and interchanges (strictly on at
// least one) aligns with "comfort". Conflicting comfort cues exclude the
// instance from the comfort dataset.
GroundingBuild build_grounding_dataset(const ChoiceData& data);

void write_choice_csv(const std::string& path,
                      const std::vector<RawInstance>& raw,
                      const std::vector<AgentContext>& contexts,
                      const CsvSchema& schema = {});

}  // namespace vsl
