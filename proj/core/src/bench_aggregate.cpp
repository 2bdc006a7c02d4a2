#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "hte/bench.hpp"

namespace hte {

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::map<std::string, double> relative_excess(const std::map<std::string, double>& medians) {
  if (medians.empty()) throw std::invalid_argument("relative_excess: empty input");
  double best = medians.begin()->second;
  for (const auto& [model, value] : medians) best = std::min(best, value);
  std::map<std::string, double> out;
  for (const auto& [model, value] : medians) out[model] = (value - best) / best;
  return out;
}

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct GroupKey {
  std::string scenario;
  int p;
  int n;
  bool operator<(const GroupKey& other) const {
    return std::tie(scenario, p, n) < std::tie(other.scenario, other.p, other.n);
  }
};

std::string pivot_csv(const std::map<GroupKey, std::map<std::string, double>>& table,
                      const std::vector<std::string>& models, bool with_count,
                      const std::map<GroupKey, std::map<std::string, std::size_t>>* counts) {
  std::ostringstream out;
  out << "scenario,p,n";
  for (const auto& m : models) out << "," << m;
  if (with_count)
    for (const auto& m : models) out << "," << m << "_count";
  out << "\n";
  for (const auto& [key, row] : table) {
    out << key.scenario << "," << key.p << "," << key.n;
    for (const auto& m : models) {
      auto it = row.find(m);
      out << "," << (it == row.end() ? "" : format_value(it->second));
    }
    if (with_count) {
      for (const auto& m : models) {
        auto it = counts->at(key).find(m);
        out << "," << (it == counts->at(key).end() ? 0 : it->second);
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

AggregateTables aggregate_results(const std::vector<ResultRow>& rows, const std::string& metric) {
  if (metric != "srmse" && metric != "rod" && metric != "srmse_sg" && metric != "rod_sg")
    throw std::invalid_argument("aggregate_results: unknown metric: " + metric);

  // collect successful replicate values per (scenario, p, n, model)
  std::map<GroupKey, std::map<std::string, std::vector<double>>> groups;
  std::vector<std::string> model_order;
  for (const auto& row : rows) {
    if (row.metric != metric) continue;
    if (std::find(model_order.begin(), model_order.end(), row.model) == model_order.end())
      model_order.push_back(row.model);
    if (row.status != "ok" || !row.value) continue;
    groups[{row.scenario, row.p, row.n}][row.model].push_back(*row.value);
  }
  if (groups.empty())
    throw std::runtime_error("aggregate_results: no successful rows for metric " + metric);
  std::sort(model_order.begin(), model_order.end());

  std::map<GroupKey, std::map<std::string, double>> medians, excess;
  std::map<GroupKey, std::map<std::string, std::size_t>> counts;
  for (const auto& [key, models] : groups) {
    std::map<std::string, double> med;
    for (const auto& [model, values] : models) {
      med[model] = median(values);
      counts[key][model] = values.size();
    }
    medians[key] = med;
    excess[key] = relative_excess(med);
  }

  AggregateTables tables;
  tables.medians_csv = pivot_csv(medians, model_order, true, &counts);
  tables.excess_csv = pivot_csv(excess, model_order, false, nullptr);
  return tables;
}

}  // namespace hte
