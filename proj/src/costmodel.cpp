#include "fftdock/costmodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fftdock/errors.hpp"
#include "fftdock/io_util.hpp"

namespace fftdock::cost {

void InstanceSpec::validate() const {
  if (name.empty()) throw ParameterError("instance without a name");
  if (cores <= 0) throw ParameterError(name + ": cores must be positive");
  if (!(price_usd_per_hour > 0)) throw ParameterError(name + ": price must be positive");
  if (gpus < 0) throw ParameterError(name + ": gpus must be >= 0");
}

void RunRecord::validate() const {
  if (instance_name.empty()) throw ParameterError("run record without an instance name");
  if (n_instances <= 0 || !(wall_time_s > 0) || n_pairs <= 0)
    throw ParameterError("run record for " + instance_name + " must have positive fields");
}

namespace {

void check_comparable(const RunRecord& base, const RunRecord& scaled) {
  base.validate();
  scaled.validate();
  if (base.instance_name != scaled.instance_name)
    throw ComparisonError("cannot compare runs on " + base.instance_name + " and " + scaled.instance_name);
  if (base.n_pairs != scaled.n_pairs) throw ComparisonError("runs have different workloads");
  if (scaled.n_instances <= base.n_instances)
    throw ComparisonError("scaled run must use more instances than the base run");
}

}  // namespace

double speedup(const RunRecord& base, const RunRecord& scaled) {
  check_comparable(base, scaled);
  return base.wall_time_s / scaled.wall_time_s;
}

double strong_scaling(const RunRecord& base, const RunRecord& scaled) {
  const double s = speedup(base, scaled);
  return s / (static_cast<double>(scaled.n_instances) / base.n_instances);
}

double total_fee(const InstanceSpec& spec, double wall_time_s, int n_instances) {
  return spec.price_usd_per_hour * (wall_time_s / 3600.0) * n_instances;
}

double throughput_pairs_per_min(int n_pairs, double wall_time_s) { return n_pairs / (wall_time_s / 60.0); }

ScalingReport scaling_report(const InstanceSpec& spec, const RunRecord& base, const RunRecord& scaled) {
  ScalingReport r;
  r.base = base;
  r.scaled = scaled;
  r.speedup = speedup(base, scaled);
  r.strong_scaling = strong_scaling(base, scaled);
  r.throughput_pairs_per_min = throughput_pairs_per_min(scaled.n_pairs, scaled.wall_time_s);
  r.total_fee_usd = total_fee(spec, scaled.wall_time_s, scaled.n_instances);
  r.superlinear = r.strong_scaling > 1.0 + 1e-9;
  return r;
}

Recommendation compare_instances(const InstanceSpec& spec_a, const RunRecord& run_a, const InstanceSpec& spec_b,
                                 const RunRecord& run_b) {
  run_a.validate();
  run_b.validate();
  if (run_a.n_pairs != run_b.n_pairs || run_a.n_instances != run_b.n_instances)
    throw ComparisonError("instance comparison needs equal workloads and instance counts");
  Recommendation rec;
  rec.a = spec_a.name;
  rec.b = spec_b.name;
  rec.speed_ratio = run_b.wall_time_s / run_a.wall_time_s;
  rec.price_ratio = spec_a.price_usd_per_hour / spec_b.price_usd_per_hour;
  rec.fee_a_usd = total_fee(spec_a, run_a.wall_time_s, run_a.n_instances);
  rec.fee_b_usd = total_fee(spec_b, run_b.wall_time_s, run_b.n_instances);
  rec.tie = std::abs(rec.speed_ratio - rec.price_ratio) <= kRatioTieTolerance;
  if (rec.tie) {
    if (spec_a.price_usd_per_hour != spec_b.price_usd_per_hour)
      rec.recommended = spec_a.price_usd_per_hour < spec_b.price_usd_per_hour ? rec.a : rec.b;
    else
      rec.recommended = std::min(rec.a, rec.b);
  } else {
    rec.recommended = rec.speed_ratio > rec.price_ratio ? rec.a : rec.b;
  }
  return rec;
}

namespace {

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

std::vector<Row> read_tsv_rows(const std::filesystem::path& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Row> rows;
  std::string line;
  bool seen_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (!seen_header) {
      if (fields != header) throw ParseError("unexpected header in " + path.string(), line_no);
      seen_header = true;
      continue;
    }
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields in " + path.string(), line_no);
    rows.push_back({line_no, std::move(fields)});
  }
  if (!seen_header) throw ParseError("missing header in " + path.string(), line_no);
  return rows;
}

template <typename T>
T parse_number(const std::string& s, const char* what, const Row& row) {
  T v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || s.empty())
    throw ParseError(std::string("bad ") + what + " value '" + s + "'", row.line);
  return v;
}

const std::vector<std::string> kCatalogHeader = {"name",   "cpu_model", "cores", "dp_peak_gflops",
                                                 "gpus",   "ram_gb",    "rdma",  "price_usd_per_hour"};
const std::vector<std::string> kRunsHeader = {"instance_name", "n_instances", "wall_time_s", "n_pairs"};

}  // namespace

Catalog read_catalog(const std::filesystem::path& path) {
  Catalog catalog;
  for (const Row& row : read_tsv_rows(path, kCatalogHeader)) {
    const auto& f = row.fields;
    InstanceSpec s;
    s.name = f[0];
    s.cpu_model = f[1];
    s.cores = parse_number<int>(f[2], "cores", row);
    s.dp_peak_gflops = parse_number<double>(f[3], "dp_peak_gflops", row);
    s.gpus = parse_number<int>(f[4], "gpus", row);
    s.ram_gb = parse_number<double>(f[5], "ram_gb", row);
    if (f[6] != "yes" && f[6] != "no") throw ParseError("rdma must be yes or no, got '" + f[6] + "'", row.line);
    s.rdma = f[6] == "yes";
    s.price_usd_per_hour = parse_number<double>(f[7], "price_usd_per_hour", row);
    s.validate();
    if (!catalog.emplace(s.name, s).second) throw ParameterError("duplicate instance " + s.name);
  }
  return catalog;
}

std::vector<RunRecord> read_runs(const std::filesystem::path& path) {
  std::vector<RunRecord> runs;
  for (const Row& row : read_tsv_rows(path, kRunsHeader)) {
    const auto& f = row.fields;
    RunRecord r{f[0], parse_number<int>(f[1], "n_instances", row), parse_number<double>(f[2], "wall_time_s", row),
                parse_number<int>(f[3], "n_pairs", row)};
    r.validate();
    runs.push_back(r);
  }
  return runs;
}

std::string runs_tsv_header() { return "instance_name\tn_instances\twall_time_s\tn_pairs"; }

std::string to_tsv_line(const RunRecord& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "\t%d\t%.3f\t%d", r.n_instances, r.wall_time_s, r.n_pairs);
  return r.instance_name + buf;
}

double round_to(double value, double quantum) { return std::round(value / quantum) * quantum; }

AnalysisReport analyze(const Catalog& catalog, const std::vector<RunRecord>& runs, const AnalysisOptions& options) {
  AnalysisReport report;
  report.runs = runs;
  std::vector<std::string> order;  // instance names in first-appearance order
  std::map<std::string, std::vector<RunRecord>> by_instance;
  for (const RunRecord& r : runs) {
    r.validate();
    if (!catalog.count(r.instance_name)) throw ParameterError("unknown instance " + r.instance_name);
    if (!by_instance.count(r.instance_name)) order.push_back(r.instance_name);
    by_instance[r.instance_name].push_back(r);
  }
  for (auto& [name, list] : by_instance)
    std::stable_sort(list.begin(), list.end(),
                     [](const RunRecord& a, const RunRecord& b) { return a.n_instances < b.n_instances; });

  for (const std::string& name : order) {
    const auto& list = by_instance[name];
    const RunRecord& base = list.front();
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i].n_pairs != base.n_pairs || list[i].n_instances == base.n_instances) continue;
      report.scaling.push_back(scaling_report(catalog.at(name), base, list[i]));
    }
  }

  if (options.reference_instance) {
    if (!catalog.count(*options.reference_instance))
      throw ParameterError("unknown reference instance " + *options.reference_instance);
    for (const RunRecord& r : runs) {
      for (const RunRecord& ref : by_instance[*options.reference_instance]) {
        if (ref.n_instances == r.n_instances && ref.n_pairs == r.n_pairs)
          report.relative_speed[r.instance_name + "@" + std::to_string(r.n_instances)] =
              ref.wall_time_s / r.wall_time_s;
      }
    }
  }

  auto largest_common = [&](const std::string& a, const std::string& b) -> std::optional<std::pair<RunRecord, RunRecord>> {
    std::optional<std::pair<RunRecord, RunRecord>> best;
    for (const RunRecord& ra : by_instance[a])
      for (const RunRecord& rb : by_instance[b])
        if (ra.n_instances == rb.n_instances && ra.n_pairs == rb.n_pairs &&
            (!best || ra.n_instances > best->first.n_instances))
          best = std::make_pair(ra, rb);
    return best;
  };
  std::vector<std::pair<std::string, std::string>> pairs = options.compare;
  if (pairs.empty()) {
    for (std::size_t i = 0; i < order.size(); ++i)
      for (std::size_t j = i + 1; j < order.size(); ++j) pairs.emplace_back(order[i], order[j]);
  }
  for (const auto& [a, b] : pairs) {
    if (!catalog.count(a)) throw ParameterError("unknown instance " + a);
    if (!catalog.count(b)) throw ParameterError("unknown instance " + b);
    auto common = largest_common(a, b);
    if (!common) {
      if (!options.compare.empty()) throw ComparisonError("no runs of " + a + " and " + b + " share a workload");
      continue;
    }
    report.comparisons.push_back(compare_instances(catalog.at(a), common->first, catalog.at(b), common->second));
  }

  std::optional<int> workload;
  bool single_workload = true;
  for (const std::string& name : order) {
    const RunRecord& largest = by_instance[name].back();
    const InstanceSpec& spec = catalog.at(name);
    report.fees.push_back({spec, largest, total_fee(spec, largest.wall_time_s, largest.n_instances)});
    if (workload && *workload != largest.n_pairs) single_workload = false;
    workload = largest.n_pairs;
  }
  if (report.fees.size() > 1 && single_workload) {
    auto cheapest = std::min_element(report.fees.begin(), report.fees.end(),
                                     [](const FeeLine& a, const FeeLine& b) { return a.fee_usd < b.fee_usd; });
    auto fastest = std::min_element(report.fees.begin(), report.fees.end(), [](const FeeLine& a, const FeeLine& b) {
      return a.run.wall_time_s < b.run.wall_time_s;
    });
    report.cheapest = cheapest->spec.name;
    report.fastest = fastest->spec.name;
  }
  return report;
}

std::string format_report(const AnalysisReport& report) {
  std::ostringstream out;
  char buf[256];

  out << "Throughput\n";
  std::snprintf(buf, sizeof buf, "  %-10s %6s %10s %8s %12s\n", "instance", "inst.", "time", "pairs", "pairs/min");
  out << buf;
  for (const RunRecord& r : report.runs) {
    std::snprintf(buf, sizeof buf, "  %-10s %6d %8.0f s %8d %12.1f\n", r.instance_name.c_str(), r.n_instances,
                  r.wall_time_s, r.n_pairs, throughput_pairs_per_min(r.n_pairs, r.wall_time_s));
    out << buf;
  }

  if (!report.relative_speed.empty()) {
    out << "\nSpeed relative to reference\n";
    for (const auto& [label, ratio] : report.relative_speed) {
      std::snprintf(buf, sizeof buf, "  %-16s %6.2f\n", label.c_str(), ratio);
      out << buf;
    }
  }

  if (!report.scaling.empty()) {
    out << "\nStrong scaling = (T_base / T_scaled) / (n_scaled / n_base)\n";
    std::snprintf(buf, sizeof buf, "  %-10s %6s %10s %6s %10s %8s %8s\n", "instance", "n", "time", "n", "time",
                  "speedup", "scaling");
    out << buf;
    for (const ScalingReport& s : report.scaling) {
      std::snprintf(buf, sizeof buf, "  %-10s %6d %8.0f s %6d %8.0f s %8.2f %8.3f%s\n", s.base.instance_name.c_str(),
                    s.base.n_instances, s.base.wall_time_s, s.scaled.n_instances, s.scaled.wall_time_s, s.speedup,
                    s.strong_scaling, s.superlinear ? "  (superlinear)" : "");
      out << buf;
    }
  }

  if (!report.comparisons.empty()) {
    out << "\nInstance comparison (recommend A iff time_B/time_A > price_A/price_B)\n";
    for (const Recommendation& c : report.comparisons) {
      std::snprintf(buf, sizeof buf, "  %s vs %s: speed ratio %.2f, price ratio %.2f -> recommend %s%s\n",
                    c.a.c_str(), c.b.c_str(), c.speed_ratio, c.price_ratio, c.recommended.c_str(),
                    c.tie ? " (tie, cheaper instance)" : "");
      out << buf;
    }
  }

  if (!report.fees.empty()) {
    out << "\nCost summary (largest run per instance; fee = price x time (h) x instances)\n";
    std::snprintf(buf, sizeof buf, "  %-10s %6s %10s %6s %10s %12s %12s\n", "instance", "inst.", "cpu cores", "gpus",
                  "time", "price", "total fee");
    out << buf;
    for (const FeeLine& f : report.fees) {
      const std::string gpus = f.spec.gpus > 0 ? std::to_string(f.spec.gpus * f.run.n_instances) : "N/A";
      std::snprintf(buf, sizeof buf, "  %-10s %6d %10d %6s %8.0f s %6.2f USD/h %8.1f USD\n", f.spec.name.c_str(),
                    f.run.n_instances, f.spec.cores * f.run.n_instances, gpus.c_str(), f.run.wall_time_s,
                    f.spec.price_usd_per_hour, round_to(f.fee_usd, 0.1));
      out << buf;
    }
    if (report.cheapest) out << "  cheapest: " << *report.cheapest << "\n";
    if (report.fastest) out << "  fastest: " << *report.fastest << "\n";
  }
  return out.str();
}

namespace {

nlohmann::json run_json(const RunRecord& r) {
  return {{"instance_name", r.instance_name},
          {"n_instances", r.n_instances},
          {"wall_time_s", r.wall_time_s},
          {"n_pairs", r.n_pairs}};
}

}  // namespace

nlohmann::json report_json(const AnalysisReport& report) {
  nlohmann::json j;
  j["runs"] = nlohmann::json::array();
  for (const RunRecord& r : report.runs) {
    auto e = run_json(r);
    e["throughput_pairs_per_min"] = throughput_pairs_per_min(r.n_pairs, r.wall_time_s);
    j["runs"].push_back(e);
  }
  j["scaling"] = nlohmann::json::array();
  for (const ScalingReport& s : report.scaling)
    j["scaling"].push_back({{"base", run_json(s.base)},
                            {"scaled", run_json(s.scaled)},
                            {"speedup", s.speedup},
                            {"strong_scaling", s.strong_scaling},
                            {"strong_scaling_display", round_to(s.strong_scaling, 0.001)},
                            {"throughput_pairs_per_min", s.throughput_pairs_per_min},
                            {"total_fee_usd", s.total_fee_usd},
                            {"superlinear", s.superlinear}});
  j["relative_speed"] = report.relative_speed;
  j["comparisons"] = nlohmann::json::array();
  for (const Recommendation& c : report.comparisons)
    j["comparisons"].push_back({{"a", c.a},
                                {"b", c.b},
                                {"speed_ratio", c.speed_ratio},
                                {"price_ratio", c.price_ratio},
                                {"fee_a_usd", c.fee_a_usd},
                                {"fee_b_usd", c.fee_b_usd},
                                {"tie", c.tie},
                                {"recommended", c.recommended}});
  j["fees"] = nlohmann::json::array();
  for (const FeeLine& f : report.fees)
    j["fees"].push_back({{"instance", f.spec.name},
                         {"run", run_json(f.run)},
                         {"cpu_cores", f.spec.cores * f.run.n_instances},
                         {"gpus", f.spec.gpus * f.run.n_instances},
                         {"price_usd_per_hour", f.spec.price_usd_per_hour},
                         {"total_fee_usd", f.fee_usd},
                         {"total_fee_display", round_to(f.fee_usd, 0.1)}});
  if (report.cheapest) j["cheapest"] = *report.cheapest;
  if (report.fastest) j["fastest"] = *report.fastest;
  return j;
}

}  // namespace fftdock::cost
