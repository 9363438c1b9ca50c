#include "costorch/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace costorch::io {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
    std::string msg = e.what();
    if (auto pos = msg.find(": "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ParseError(msg, line);
  }
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Field access with the document path carried along for error messages.
class Node {
 public:
  Node(const json& v, std::string path) : v_(v), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return v_; }

  Node object(std::initializer_list<std::string_view> allowed) const {
    if (!v_.is_object()) throw SchemaError(shown(), "expected an object");
    for (const auto& [key, _] : v_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw SchemaError(join(path_, key), "unknown field");
    }
    return *this;
  }

  bool has(std::string_view key) const { return v_.contains(key); }

  Node at(std::string_view key) const {
    auto it = v_.find(key);
    if (it == v_.end()) throw SchemaError(join(path_, key), "missing field");
    return {*it, join(path_, key)};
  }

  std::vector<Node> array() const {
    if (!v_.is_array()) throw SchemaError(shown(), "expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < v_.size(); ++i) out.emplace_back(v_[i], index(path_, i));
    return out;
  }

  double number() const {
    if (!v_.is_number()) throw SchemaError(shown(), "expected a number");
    const double x = v_.get<double>();
    if (!std::isfinite(x)) throw SchemaError(shown(), "expected a finite number");
    return x;
  }

  std::int64_t integer() const {
    if (!v_.is_number_integer()) throw SchemaError(shown(), "expected an integer");
    return v_.get<std::int64_t>();
  }

  std::uint64_t count() const {
    const auto n = integer();
    if (n < 0) throw SchemaError(shown(), "expected a non-negative integer");
    return static_cast<std::uint64_t>(n);
  }

  std::string string() const {
    if (!v_.is_string()) throw SchemaError(shown(), "expected a string");
    return v_.get<std::string>();
  }

  bool boolean() const {
    if (!v_.is_boolean()) throw SchemaError(shown(), "expected a boolean");
    return v_.get<bool>();
  }

 private:
  std::string shown() const { return path_.empty() ? "<root>" : path_; }

  const json& v_;
  std::string path_;
};

void check_version(const Node& root) {
  if (root.at("format_version").integer() != kFormatVersion)
    throw SchemaError(join(root.path(), "format_version"), "unsupported version");
}

std::vector<double> numbers(const Node& n) {
  std::vector<double> out;
  for (const auto& e : n.array()) out.push_back(e.number());
  return out;
}

std::string dump(const ojson& doc) { return doc.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Problem

WorkloadProfile profile_from(const Node& n) {
  n.object({"parallelism", "subtask_count", "table_count", "code_length", "dataset_volume_gb",
            "disk_volume_gb", "task_type"});
  WorkloadProfile p;
  auto opt = [&](std::string_view key, std::optional<double>& out) {
    if (n.has(key)) out = n.at(key).number();
  };
  opt("parallelism", p.parallelism);
  opt("subtask_count", p.subtask_count);
  opt("table_count", p.table_count);
  opt("code_length", p.code_length);
  opt("dataset_volume_gb", p.dataset_volume_gb);
  opt("disk_volume_gb", p.disk_volume_gb);
  if (n.has("task_type")) {
    const auto field = n.at("task_type");
    const auto tt = parse_task_type(field.string());
    if (!tt) throw SchemaError(field.path(), "expected io_intensive or compute_intensive");
    p.task_type = tt;
  }
  return p;
}

ojson profile_to(const WorkloadProfile& p) {
  ojson o = ojson::object();
  auto opt = [&](const char* key, const std::optional<double>& v) {
    if (v) o[key] = *v;
  };
  opt("parallelism", p.parallelism);
  opt("subtask_count", p.subtask_count);
  opt("table_count", p.table_count);
  opt("code_length", p.code_length);
  opt("dataset_volume_gb", p.dataset_volume_gb);
  opt("disk_volume_gb", p.disk_volume_gb);
  if (p.task_type) o["task_type"] = to_string(*p.task_type);
  return o;
}

Problem problem_from(const Node& root) {
  root.object({"format_version", "workflows", "devices", "configs", "durations"});
  check_version(root);
  Problem p;
  for (const auto& w : root.at("workflows").array()) {
    w.object({"id", "earliest_start", "deadline", "predecessors", "profile"});
    WorkflowSpec spec;
    spec.id = w.at("id").string();
    spec.earliest_start = w.at("earliest_start").number();
    spec.deadline = w.at("deadline").number();
    if (w.has("predecessors"))
      for (const auto& pred : w.at("predecessors").array()) spec.predecessors.push_back(pred.string());
    if (w.has("profile")) spec.profile = profile_from(w.at("profile"));
    p.workflows.push_back(std::move(spec));
  }
  for (const auto& d : root.at("devices").array()) {
    d.object({"id", "base_rate", "overflow_rate", "prepurchased_hours", "usage_cap"});
    DeviceCatalogEntry e;
    e.id = d.at("id").string();
    e.base_rate = d.at("base_rate").number();
    e.overflow_rate = d.at("overflow_rate").number();
    e.prepurchased_hours = d.at("prepurchased_hours").number();
    if (d.has("usage_cap")) e.usage_cap = d.at("usage_cap").number();
    p.devices.push_back(std::move(e));
  }
  for (const auto& c : root.at("configs").array()) {
    c.object({"device_id", "config_id", "device_count", "cpu_cores", "memory_gb"});
    ConfigOption k;
    k.device_id = c.at("device_id").string();
    k.config_id = c.at("config_id").string();
    const auto count = c.at("device_count").integer();
    if (count < std::numeric_limits<int>::min() || count > std::numeric_limits<int>::max())
      throw SchemaError(join(c.path(), "device_count"), "out of range");
    k.device_count = static_cast<int>(count);
    if (c.has("cpu_cores")) k.cpu_cores = c.at("cpu_cores").number();
    if (c.has("memory_gb")) k.memory_gb = c.at("memory_gb").number();
    p.configs.push_back(std::move(k));
  }
  if (root.has("durations")) {
    for (const auto& d : root.at("durations").array()) {
      d.object({"workflow_id", "device_id", "config_id", "hours"});
      DurationKey key{d.at("workflow_id").string(), d.at("device_id").string(),
                      d.at("config_id").string()};
      if (p.durations.entries.contains(key)) throw SchemaError(d.path(), "duplicate duration entry");
      p.durations.entries.emplace(std::move(key), d.at("hours").number());
    }
  }
  return p;
}

ojson problem_to(const Problem& p) {
  ojson doc;
  doc["format_version"] = kFormatVersion;
  ojson workflows = ojson::array();
  for (const auto& w : p.workflows) {
    ojson o;
    o["id"] = w.id;
    o["earliest_start"] = w.earliest_start;
    o["deadline"] = w.deadline;
    o["predecessors"] = w.predecessors;
    if (w.profile) o["profile"] = profile_to(*w.profile);
    workflows.push_back(std::move(o));
  }
  doc["workflows"] = std::move(workflows);
  ojson devices = ojson::array();
  for (const auto& d : p.devices) {
    ojson o;
    o["id"] = d.id;
    o["base_rate"] = d.base_rate;
    o["overflow_rate"] = d.overflow_rate;
    o["prepurchased_hours"] = d.prepurchased_hours;
    if (d.usage_cap) o["usage_cap"] = *d.usage_cap;
    devices.push_back(std::move(o));
  }
  doc["devices"] = std::move(devices);
  ojson configs = ojson::array();
  for (const auto& c : p.configs) {
    ojson o;
    o["device_id"] = c.device_id;
    o["config_id"] = c.config_id;
    o["device_count"] = c.device_count;
    o["cpu_cores"] = c.cpu_cores;
    o["memory_gb"] = c.memory_gb;
    configs.push_back(std::move(o));
  }
  doc["configs"] = std::move(configs);
  ojson durations = ojson::array();
  for (const auto& [key, hours] : p.durations.entries) {
    ojson o;
    o["workflow_id"] = key.workflow_id;
    o["device_id"] = key.device_id;
    o["config_id"] = key.config_id;
    o["hours"] = hours;
    durations.push_back(std::move(o));
  }
  doc["durations"] = std::move(durations);
  return doc;
}

Assignment assignment_from(const Node& n) {
  Assignment a;
  for (const auto& e : n.array()) {
    e.object({"workflow_id", "device_id", "config_id"});
    auto id = e.at("workflow_id").string();
    if (a.choice.contains(id)) throw SchemaError(e.path(), "duplicate workflow " + id);
    a.choice.emplace(std::move(id), Choice{e.at("device_id").string(), e.at("config_id").string()});
  }
  return a;
}

ojson assignment_to(const Assignment& a) {
  ojson arr = ojson::array();
  for (const auto& [w, c] : a.choice) {
    ojson o;
    o["workflow_id"] = w;
    o["device_id"] = c.device_id;
    o["config_id"] = c.config_id;
    arr.push_back(std::move(o));
  }
  return arr;
}

// ---------------------------------------------------------------------------
// CSV

std::string shortest(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> cells;
  std::size_t begin = 0;
  while (true) {
    const auto pos = line.find(sep, begin);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(begin));
      return cells;
    }
    cells.push_back(line.substr(begin, pos - begin));
    begin = pos + 1;
  }
}

double parse_double(std::string_view cell, std::string_view column, std::size_t line) {
  double x = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last || !std::isfinite(x) || cell.empty())
    throw ParseError(std::string(column) + ": not a number: '" + std::string(cell) + "'", line);
  return x;
}

std::optional<double> parse_optional(std::string_view cell, std::string_view column, std::size_t line) {
  if (cell.empty()) return std::nullopt;
  return parse_double(cell, column, line);
}

std::string cell(const std::optional<double>& v) { return v ? shortest(*v) : std::string(); }

// ---------------------------------------------------------------------------
// Report formatting

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

Problem parse_problem(std::string_view text) {
  const auto doc = parse_json(text);
  return problem_from(Node(doc, ""));
}

ValidatedProblem load_problem(std::string_view text) { return ValidatedProblem::from(parse_problem(text)); }

std::string save_problem(const Problem& p) { return dump(problem_to(p)); }

ScheduleDocument make_schedule_document(const Schedule& s, const CostBreakdown& cost,
                                        std::optional<SolveSummary> solve) {
  ScheduleDocument doc;
  doc.assignment = s.assignment;
  doc.start = s.start;
  doc.finish = s.finish;
  for (const auto& d : cost.per_device) doc.per_device.push_back({d.device_id, d.usage, d.tier_pivot, d.cost});
  doc.total = cost.total;
  doc.solve = std::move(solve);
  return doc;
}

Schedule to_schedule(const ValidatedProblem& p, const ScheduleDocument& doc) {
  Schedule s;
  s.assignment = doc.assignment;
  s.start = doc.start;
  s.finish = doc.finish;
  for (const auto& [w, c] : doc.assignment.choice) {
    const auto h = p.problem().durations.find(w, c.device_id, c.config_id);
    if (!h) throw UnknownChoice("no duration for " + w + " on " + c.device_id + "/" + c.config_id);
    s.duration[w] = *h;
  }
  return s;
}

ScheduleDocument load_schedule(std::string_view text) {
  const auto raw = parse_json(text);
  const Node root(raw, "");
  root.object({"format_version", "assignment", "timing", "cost", "solve"});
  check_version(root);
  ScheduleDocument doc;
  doc.assignment = assignment_from(root.at("assignment"));
  for (const auto& t : root.at("timing").array()) {
    t.object({"workflow_id", "start", "finish"});
    const auto id = t.at("workflow_id").string();
    if (doc.start.contains(id)) throw SchemaError(t.path(), "duplicate workflow " + id);
    doc.start[id] = t.at("start").number();
    doc.finish[id] = t.at("finish").number();
  }
  const auto cost = root.at("cost").object({"per_device", "total"});
  for (const auto& d : cost.at("per_device").array()) {
    d.object({"device_id", "usage", "tier_pivot", "cost"});
    doc.per_device.push_back(
        {d.at("device_id").string(), d.at("usage").number(), d.at("tier_pivot").number(), d.at("cost").number()});
  }
  doc.total = cost.at("total").number();
  if (root.has("solve")) {
    const auto s = root.at("solve").object({"method", "status", "nodes_explored", "nodes_pruned", "best_bound"});
    doc.solve = SolveSummary{s.at("method").string(), s.at("status").string(), s.at("nodes_explored").count(),
                             s.at("nodes_pruned").count(), s.at("best_bound").number()};
  }
  return doc;
}

std::string save_schedule(const ScheduleDocument& doc) {
  ojson out;
  out["format_version"] = kFormatVersion;
  out["assignment"] = assignment_to(doc.assignment);
  ojson timing = ojson::array();
  for (const auto& [w, s] : doc.start) {
    ojson o;
    o["workflow_id"] = w;
    o["start"] = s;
    auto f = doc.finish.find(w);
    o["finish"] = f == doc.finish.end() ? s : f->second;
    timing.push_back(std::move(o));
  }
  out["timing"] = std::move(timing);
  ojson per_device = ojson::array();
  for (const auto& d : doc.per_device) {
    ojson o;
    o["device_id"] = d.device_id;
    o["usage"] = d.usage;
    o["tier_pivot"] = d.tier_pivot;
    o["cost"] = d.cost;
    per_device.push_back(std::move(o));
  }
  out["cost"]["per_device"] = std::move(per_device);
  out["cost"]["total"] = doc.total;
  if (doc.solve) {
    ojson s;
    s["method"] = doc.solve->method;
    s["status"] = doc.solve->status;
    s["nodes_explored"] = doc.solve->nodes_explored;
    s["nodes_pruned"] = doc.solve->nodes_pruned;
    s["best_bound"] = doc.solve->best_bound;
    out["solve"] = std::move(s);
  }
  return dump(out);
}

// ---------------------------------------------------------------------------

std::vector<predictor::RunRecord> load_records(std::string_view text) {
  static const auto columns = split(kRecordsHeader, ',');
  std::vector<predictor::RunRecord> out;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    auto end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (line != kRecordsHeader) throw ParseError("unexpected header", line_no);
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != columns.size())
      throw ParseError("expected " + std::to_string(columns.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       line_no);
    predictor::RunRecord r;
    if (cells[0].empty()) throw ParseError("job_id: empty", line_no);
    r.job_id = std::string(cells[0]);
    r.cpu_cores = parse_optional(cells[1], columns[1], line_no);
    r.memory_gb = parse_optional(cells[2], columns[2], line_no);
    r.profile.parallelism = parse_optional(cells[3], columns[3], line_no);
    r.profile.subtask_count = parse_optional(cells[4], columns[4], line_no);
    r.profile.table_count = parse_optional(cells[5], columns[5], line_no);
    r.profile.code_length = parse_optional(cells[6], columns[6], line_no);
    r.profile.dataset_volume_gb = parse_optional(cells[7], columns[7], line_no);
    r.profile.disk_volume_gb = parse_optional(cells[8], columns[8], line_no);
    if (!cells[9].empty()) {
      r.profile.task_type = parse_task_type(cells[9]);
      if (!r.profile.task_type) throw BadEnum(std::string(cells[9]), line_no);
    }
    r.observed_duration_s = parse_double(cells[10], columns[10], line_no);
    out.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError("missing header", 1);
  return out;
}

std::string save_records(const std::vector<predictor::RunRecord>& records) {
  std::string out(kRecordsHeader);
  out += '\n';
  for (const auto& r : records) {
    const auto& p = r.profile;
    out += r.job_id + ',' + cell(r.cpu_cores) + ',' + cell(r.memory_gb) + ',' + cell(p.parallelism) + ',' +
           cell(p.subtask_count) + ',' + cell(p.table_count) + ',' + cell(p.code_length) + ',' +
           cell(p.dataset_volume_gb) + ',' + cell(p.disk_volume_gb) + ',' +
           (p.task_type ? to_string(*p.task_type) : "") + ',' + shortest(r.observed_duration_s) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

predictor::LinearModel load_model(std::string_view text) {
  const auto raw = parse_json(text);
  const Node root(raw, "");
  root.object({"format_version", "family", "features", "alpha", "l1_ratio", "mean", "scale", "coefficients",
               "intercept"});
  check_version(root);
  predictor::LinearModel m;
  const auto fam = root.at("family");
  const auto family = predictor::parse_family(fam.string());
  if (!family) throw SchemaError(fam.path(), "unknown family");
  m.family = *family;
  std::vector<std::string> names;
  for (const auto& f : root.at("features").array()) names.push_back(f.string());
  m.schema = predictor::FeatureSchema::from_names(std::move(names));
  m.alpha = root.at("alpha").number();
  m.l1_ratio = root.at("l1_ratio").number();
  m.mean = numbers(root.at("mean"));
  m.scale = numbers(root.at("scale"));
  m.coefficients = numbers(root.at("coefficients"));
  m.intercept = root.at("intercept").number();
  const std::pair<const char*, const std::vector<double>*> sized[] = {
      {"mean", &m.mean}, {"scale", &m.scale}, {"coefficients", &m.coefficients}};
  for (const auto& [key, v] : sized) {
    if (v->size() != m.schema.size())
      throw SchemaError(key, "expected " + std::to_string(m.schema.size()) + " values");
  }
  return m;
}

std::string save_model(const predictor::LinearModel& m) {
  ojson out;
  out["format_version"] = kFormatVersion;
  out["family"] = predictor::to_string(m.family);
  out["features"] = m.schema.names();
  out["alpha"] = m.alpha;
  out["l1_ratio"] = m.l1_ratio;
  out["mean"] = m.mean;
  out["scale"] = m.scale;
  out["coefficients"] = m.coefficients;
  out["intercept"] = m.intercept;
  return dump(out);
}

std::string save_tune_result(const predictor::TuneResult& r, const predictor::TuneConfig& cfg) {
  ojson out;
  out["format_version"] = kFormatVersion;
  out["family"] = predictor::to_string(cfg.family);
  out["l1_ratio"] = cfg.l1_ratio;
  out["folds"] = r.folds;
  out["best_alpha"] = r.best_alpha;
  ojson scores = ojson::array();
  for (const auto& [alpha, mae] : r.cv_score_by_alpha) {
    ojson o;
    o["alpha"] = alpha;
    o["cv_mae"] = mae;
    scores.push_back(std::move(o));
  }
  out["scores"] = std::move(scores);
  return dump(out);
}

// ---------------------------------------------------------------------------

const char* to_string(JobStatus s) {
  switch (s) {
    case JobStatus::success: return "success";
    case JobStatus::recovered: return "recovered";
    case JobStatus::failed: return "failed";
  }
  return "?";
}

std::optional<JobStatus> parse_job_status(std::string_view s) {
  if (s == "success") return JobStatus::success;
  if (s == "recovered") return JobStatus::recovered;
  if (s == "failed") return JobStatus::failed;
  return std::nullopt;
}

RunLog load_run_log(std::string_view text) {
  const auto raw = parse_json(text);
  const Node root(raw, "");
  root.object({"format_version", "problem", "assignment", "elapsed_s", "outcomes"});
  check_version(root);
  RunLog log;
  log.problem = problem_from(root.at("problem"));
  if (root.has("assignment")) log.assignment = assignment_from(root.at("assignment"));
  log.elapsed_s = root.at("elapsed_s").number();
  for (const auto& o : root.at("outcomes").array()) {
    o.object({"workflow_id", "status"});
    const auto st = o.at("status");
    const auto status = parse_job_status(st.string());
    if (!status) throw SchemaError(st.path(), "expected success, recovered or failed");
    log.outcomes.push_back({o.at("workflow_id").string(), *status});
  }
  return log;
}

std::string save_run_log(const RunLog& log) {
  ojson out;
  out["format_version"] = kFormatVersion;
  out["problem"] = problem_to(log.problem);
  if (log.assignment) out["assignment"] = assignment_to(*log.assignment);
  out["elapsed_s"] = log.elapsed_s;
  ojson outcomes = ojson::array();
  for (const auto& o : log.outcomes) {
    ojson e;
    e["workflow_id"] = o.workflow_id;
    e["status"] = to_string(o.status);
    outcomes.push_back(std::move(e));
  }
  out["outcomes"] = std::move(outcomes);
  return dump(out);
}

double compute_throughput(std::uint64_t jobs, double elapsed_s) {
  if (!(elapsed_s > 0.0)) throw ZeroElapsed();
  return static_cast<double>(jobs) / elapsed_s;
}

double compute_reliability(std::uint64_t successes, std::uint64_t recovered, std::uint64_t total) {
  if (total == 0) throw ZeroTotal();
  if (successes + recovered > total) throw Overcount();
  return static_cast<double>(successes + recovered) / static_cast<double>(total);
}

double compute_ccr(double initial_cost, double final_cost) {
  if (!(initial_cost > 0.0)) throw ZeroInitialCost();
  return (initial_cost - final_cost) / initial_cost;
}

OrchestrationReport orchestration_report(const ValidatedProblem& p, const RunLog& log) {
  if (!log.assignment) throw Error("run log has no assignment");
  OrchestrationReport r;
  for (const auto& o : log.outcomes) {
    if (o.status == JobStatus::success) ++r.successes;
    if (o.status == JobStatus::recovered) ++r.fault_recovered;
  }
  r.total_requests = log.outcomes.size();
  r.jobs_completed = r.successes + r.fault_recovered;
  r.elapsed_s = log.elapsed_s;
  r.throughput_jobs_per_s = compute_throughput(r.jobs_completed, log.elapsed_s);
  r.reliability = compute_reliability(r.successes, r.fault_recovered, r.total_requests);
  r.initial_cost = evaluate_cost(p, p.default_assignment()).total;
  r.final_cost = evaluate_cost(p, *log.assignment).total;
  r.cost_change_rate = compute_ccr(r.initial_cost, r.final_cost);
  return r;
}

std::string save_report(const OrchestrationReport& r) {
  std::ostringstream os;
  os << "{\n"
     << "  \"format_version\": " << kFormatVersion << ",\n"
     << "  \"jobs_completed\": " << r.jobs_completed << ",\n"
     << "  \"elapsed_s\": " << fixed6(r.elapsed_s) << ",\n"
     << "  \"throughput_jobs_per_s\": " << fixed6(r.throughput_jobs_per_s) << ",\n"
     << "  \"successes\": " << r.successes << ",\n"
     << "  \"fault_recovered\": " << r.fault_recovered << ",\n"
     << "  \"total_requests\": " << r.total_requests << ",\n"
     << "  \"reliability\": " << fixed6(r.reliability) << ",\n"
     << "  \"initial_cost\": " << fixed6(r.initial_cost) << ",\n"
     << "  \"final_cost\": " << fixed6(r.final_cost) << ",\n"
     << "  \"cost_change_rate\": " << fixed6(r.cost_change_rate) << "\n"
     << "}\n";
  return os.str();
}

OrchestrationReport load_report(std::string_view text) {
  const auto raw = parse_json(text);
  const Node root(raw, "");
  root.object({"format_version", "jobs_completed", "elapsed_s", "throughput_jobs_per_s", "successes",
               "fault_recovered", "total_requests", "reliability", "initial_cost", "final_cost",
               "cost_change_rate"});
  check_version(root);
  OrchestrationReport r;
  r.jobs_completed = root.at("jobs_completed").count();
  r.elapsed_s = root.at("elapsed_s").number();
  r.throughput_jobs_per_s = root.at("throughput_jobs_per_s").number();
  r.successes = root.at("successes").count();
  r.fault_recovered = root.at("fault_recovered").count();
  r.total_requests = root.at("total_requests").count();
  r.reliability = root.at("reliability").number();
  r.initial_cost = root.at("initial_cost").number();
  r.final_cost = root.at("final_cost").number();
  r.cost_change_rate = root.at("cost_change_rate").number();
  return r;
}

// ---------------------------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("cannot write " + path);
}

}  // namespace costorch::io
