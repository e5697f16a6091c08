#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common/geometry.hpp"
#include "common/scenario.hpp"

namespace sw {

struct EvalSample {
  std::vector<Vec2> pred;  // ego frame, meters
  std::vector<Vec2> gt;
  Vec2 subgoal;
  Scenario scenario = Scenario::kOther;
};

// Throws ValidationError on a tag outside the six scenario names.
Scenario scenario_from_tag(const std::string& tag);

// Heading error in degrees, [0, 180], per step; nullopt where the GT step is
// shorter than 1e-6 m. Throws UndefinedDirectionError when every step is.
std::vector<std::optional<double>> step_orientation_errors(std::span<const Vec2> pred, std::span<const Vec2> gt);

// (1/N) sum_i max_k theta_{i,k} over per-sample error lists.
double maoe_from_errors(std::span<const std::vector<double>> per_sample);
// Samples whose GT steps are all degenerate carry no heading and are left
// out of the mean. Throws EmptySetError on empty input and
// UndefinedDirectionError when no sample has a defined step.
double maoe(std::span<const EvalSample> samples);

// Fraction of samples with min_{k<=K} |pred_k - subgoal| <= r. K = 0 means
// the full horizon.
double arrival_accuracy(std::span<const EvalSample> samples, double r = 1.0, std::size_t k = 0);

// Mean over samples and steps of |pred_k - gt_k|.
double l2_error(std::span<const EvalSample> samples);

struct MetricsRow {
  double maoe_deg = 0.0;
  double arrival_pct = 0.0;
  double l2_m = 0.0;
  std::size_t n = 0;
};

struct MetricsReport {
  std::map<Scenario, MetricsRow> scenarios;  // only scenarios with samples
  MetricsRow mean_row;                       // unweighted mean of the scenario rows
  MetricsRow all_row;                        // pooled samples
  std::vector<Scenario> omitted;             // scenarios without samples
  double radius_m = 1.0;
  std::size_t k = 0;

  bool partial() const { return !omitted.empty(); }
};

MetricsReport aggregate(std::span<const EvalSample> samples, double r = 1.0, std::size_t k = 0);

// Tab-separated: one header line, one row per present scenario, then Mean
// and All. The flags column marks a Mean computed over fewer than six
// scenarios.
std::string report_to_tsv(const MetricsReport& report);
std::string report_to_json(const MetricsReport& report);
// Writes `path` (TSV) and `path + ".json"`.
void save_report(const std::string& path, const MetricsReport& report);

}  // namespace sw
