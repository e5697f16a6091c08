#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace sw {
namespace {

constexpr double kMinStep = 1e-6;

void require_nonempty(std::span<const EvalSample> samples, const char* what) {
  if (samples.empty()) throw EmptySetError(std::string(what) + ": no samples");
}

void require_same_horizon(const EvalSample& s) {
  if (s.pred.size() != s.gt.size() || s.gt.empty()) {
    throw DimensionError("prediction has " + std::to_string(s.pred.size()) + " waypoints, ground truth " +
                         std::to_string(s.gt.size()));
  }
}

std::optional<double> sample_max_error(const EvalSample& s) {
  std::optional<double> best;
  try {
    for (const auto& e : step_orientation_errors(s.pred, s.gt)) {
      if (e) best = std::max(best.value_or(0.0), *e);
    }
  } catch (const UndefinedDirectionError&) {
    return std::nullopt;
  }
  return best;
}

}  // namespace

Scenario scenario_from_tag(const std::string& tag) {
  if (auto s = parse_scenario(tag)) return *s;
  throw ValidationError("scenario_tag", "unknown scenario \"" + tag + "\"");
}

std::vector<std::optional<double>> step_orientation_errors(std::span<const Vec2> pred, std::span<const Vec2> gt) {
  if (pred.size() != gt.size()) throw DimensionError("pred and gt horizons differ");
  std::vector<std::optional<double>> out;
  out.reserve(gt.size());
  Vec2 pp{0, 0}, gp{0, 0};
  bool any = false;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const Vec2 ps = pred[k] - pp, gs = gt[k] - gp;
    pp = pred[k];
    gp = gt[k];
    if (gs.norm() < kMinStep) {
      out.push_back(std::nullopt);
      continue;
    }
    any = true;
    const double diff = wrap_angle(std::atan2(ps.y, ps.x) - std::atan2(gs.y, gs.x));
    out.push_back(rad_to_deg(std::abs(diff)));
  }
  if (!any) throw UndefinedDirectionError("every ground-truth step is shorter than 1e-6 m");
  return out;
}

double maoe_from_errors(std::span<const std::vector<double>> per_sample) {
  if (per_sample.empty()) throw EmptySetError("maoe: no samples");
  double total = 0.0;
  for (const auto& errs : per_sample) {
    if (errs.empty()) throw UndefinedDirectionError("maoe: sample without defined steps");
    total += *std::max_element(errs.begin(), errs.end());
  }
  return total / static_cast<double>(per_sample.size());
}

double maoe(std::span<const EvalSample> samples) {
  require_nonempty(samples, "maoe");
  double total = 0.0;
  std::size_t used = 0;
  for (const EvalSample& s : samples) {
    require_same_horizon(s);
    if (auto m = sample_max_error(s)) {
      total += *m;
      ++used;
    }
  }
  if (used == 0) throw UndefinedDirectionError("maoe: no sample has a defined step direction");
  return total / static_cast<double>(used);
}

double arrival_accuracy(std::span<const EvalSample> samples, double r, std::size_t k) {
  require_nonempty(samples, "arrival_accuracy");
  if (!(r > 0.0)) throw ValidationError("radius", "must be positive");
  std::size_t hits = 0;
  for (const EvalSample& s : samples) {
    require_same_horizon(s);
    const std::size_t kk = k == 0 ? s.pred.size() : k;
    if (kk > s.pred.size()) throw ValidationError("k", "exceeds the horizon");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kk; ++i) best = std::min(best, distance(s.pred[i], s.subgoal));
    if (best <= r) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

double l2_error(std::span<const EvalSample> samples) {
  require_nonempty(samples, "l2_error");
  double total = 0.0;
  std::size_t steps = 0;
  for (const EvalSample& s : samples) {
    require_same_horizon(s);
    for (std::size_t i = 0; i < s.pred.size(); ++i) total += distance(s.pred[i], s.gt[i]);
    steps += s.pred.size();
  }
  return total / static_cast<double>(steps);
}

namespace {

MetricsRow row_for(std::span<const EvalSample> samples, double r, std::size_t k) {
  MetricsRow row;
  row.n = samples.size();
  try {
    row.maoe_deg = maoe(samples);
  } catch (const UndefinedDirectionError&) {
    row.maoe_deg = std::nan("");
  }
  row.arrival_pct = 100.0 * arrival_accuracy(samples, r, k);
  row.l2_m = l2_error(samples);
  return row;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

MetricsReport aggregate(std::span<const EvalSample> samples, double r, std::size_t k) {
  require_nonempty(samples, "aggregate");
  MetricsReport report;
  report.radius_m = r;
  report.k = k;
  for (Scenario s : kAllScenarios) {
    std::vector<EvalSample> subset;
    for (const EvalSample& e : samples) {
      if (e.scenario == s) subset.push_back(e);
    }
    if (subset.empty()) {
      report.omitted.push_back(s);
      continue;
    }
    report.scenarios[s] = row_for(subset, r, k);
  }
  const double present = static_cast<double>(report.scenarios.size());
  for (const auto& [s, row] : report.scenarios) {
    report.mean_row.maoe_deg += row.maoe_deg / present;
    report.mean_row.arrival_pct += row.arrival_pct / present;
    report.mean_row.l2_m += row.l2_m / present;
    report.mean_row.n += row.n;
  }
  report.all_row = row_for(samples, r, k);
  return report;
}

std::string report_to_tsv(const MetricsReport& report) {
  std::ostringstream os;
  os << "scenario\tn\tmaoe_deg\tarrival_pct\tl2_m\tflags\n";
  const auto line = [&](const std::string& name, const MetricsRow& row, const std::string& flags) {
    os << name << '\t' << row.n << '\t' << fmt(row.maoe_deg) << '\t' << fmt(row.arrival_pct) << '\t'
       << fmt(row.l2_m) << '\t' << flags << '\n';
  };
  for (const auto& [s, row] : report.scenarios) line(scenario_name(s), row, "");
  std::string flags;
  if (report.partial()) {
    flags = "partial:" + std::to_string(report.scenarios.size()) + "/6";
  }
  line("Mean", report.mean_row, flags);
  line("All", report.all_row, "");
  return os.str();
}

std::string report_to_json(const MetricsReport& report) {
  using nlohmann::ordered_json;
  const auto row_json = [](const MetricsRow& row) {
    const auto num = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
    return ordered_json{{"n", row.n},
                        {"maoe_deg", num(row.maoe_deg)},
                        {"arrival_pct", num(row.arrival_pct)},
                        {"l2_m", num(row.l2_m)}};
  };
  ordered_json j;
  j["radius_m"] = report.radius_m;
  j["k"] = report.k;
  j["scenarios"] = ordered_json::object();
  for (const auto& [s, row] : report.scenarios) j["scenarios"][scenario_name(s)] = row_json(row);
  j["mean"] = row_json(report.mean_row);
  j["all"] = row_json(report.all_row);
  j["omitted"] = ordered_json::array();
  for (Scenario s : report.omitted) j["omitted"].push_back(scenario_name(s));
  j["partial"] = report.partial();
  return j.dump(2);
}

void save_report(const std::string& path, const MetricsReport& report) {
  write_text_atomic(path, report_to_tsv(report));
  write_text_atomic(path + ".json", report_to_json(report));
}

}  // namespace sw
