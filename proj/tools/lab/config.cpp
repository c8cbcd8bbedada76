#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace finsler::lab {

ConfigError::ConfigError(const std::string& what, int line, int column)
    : std::runtime_error(line > 0 ? std::to_string(line) + ":" + std::to_string(column) + ": " + what
                                  : what),
      line_(line),
      column_(column) {}

std::string to_string(Task t) {
  switch (t) {
    case Task::kTensors: return "tensors";
    case Task::kClassify: return "classify";
    case Task::kConcircular: return "concircular";
    case Task::kVerifyTheorems: return "verify-theorems";
    case Task::kIdentityBattery: return "identity-battery";
  }
  return "?";
}

const std::vector<Task>& all_tasks() {
  static const std::vector<Task> tasks = {Task::kTensors, Task::kClassify, Task::kConcircular,
                                          Task::kVerifyTheorems, Task::kIdentityBattery};
  return tasks;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

const MetricModel& RunConfig::metric(const std::string& name) const {
  for (const auto& m : metrics)
    if (m.name() == name) return m;
  throw ConfigError("unknown metric '" + name + "'");
}

std::vector<const MetricModel*> RunConfig::metrics_for(const CandidateSpec& c) const {
  std::vector<const MetricModel*> out;
  for (const auto& m : metrics) {
    const bool named = std::find(c.metrics.begin(), c.metrics.end(), m.name()) != c.metrics.end();
    if (c.metrics.empty() ? m.dimension() == c.field.dimension() : named) out.push_back(&m);
  }
  return out;
}

bool RunConfig::has(Task t) const { return std::find(tasks.begin(), tasks.end(), t) != tasks.end(); }

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
  const auto mark = node.Mark();
  throw ConfigError(what, mark.line + 1, mark.column + 1);
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
  if (!node.IsMap()) fail(node, where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail(node, what + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "cannot read " + what + " from '" + node.Scalar() + "'");
  }
}

YAML::Node required(const YAML::Node& parent, const std::string& key, const std::string& where) {
  const auto n = parent[key];
  if (!n) fail(parent, "missing '" + key + "' in " + where);
  return n;
}

Expression expression(const YAML::Node& node, int n, const std::map<std::string, double>& params) {
  if (!node.IsScalar()) fail(node, "expected an expression");
  try {
    return Expression::parse(node.Scalar(), n, params);
  } catch (const ParseError& e) {
    const auto mark = node.Mark();
    throw ConfigError(e.what(), mark.line + 1, mark.column + 1);
  }
}

std::vector<Expression> vector_of(const YAML::Node& node, int n, int count,
                                  const std::map<std::string, double>& params, const std::string& what) {
  if (!node.IsSequence() || static_cast<int>(node.size()) != count)
    fail(node, what + " needs " + std::to_string(count) + " entries");
  std::vector<Expression> out;
  for (const auto& e : node) out.push_back(expression(e, n, params));
  return out;
}

// n x n matrix as rows, or the word "identity".
std::vector<Expression> matrix(const YAML::Node& node, int n, const std::map<std::string, double>& params,
                               const std::string& what) {
  std::vector<Expression> out;
  if (node.IsScalar() && node.Scalar() == "identity") {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.push_back(Expression::constant(i == j ? 1.0 : 0.0, n));
    return out;
  }
  if (!node.IsSequence() || static_cast<int>(node.size()) != n)
    fail(node, what + " needs " + std::to_string(n) + " rows or 'identity'");
  for (const auto& row : node) {
    auto r = vector_of(row, n, n, params, what + " row");
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

Box box(const YAML::Node& node, int n) {
  if (!node.IsSequence()) fail(node, "box must be a sequence");
  Box b;
  auto pair = [&](const YAML::Node& p) {
    if (!p.IsSequence() || p.size() != 2) fail(p, "box interval must be [lo, hi]");
    const double lo = scalar<double>(p[0], "box bound");
    const double hi = scalar<double>(p[1], "box bound");
    if (!(lo < hi)) fail(p, "box interval needs lo < hi");
    return std::make_pair(lo, hi);
  };
  if (node.size() == 2 && node[0].IsScalar()) {
    b.assign(n, pair(node));
  } else {
    if (static_cast<int>(node.size()) != n) fail(node, "box needs one interval per coordinate");
    for (const auto& p : node) b.push_back(pair(p));
  }
  return b;
}

MetricModel parse_metric(const YAML::Node& node, const std::optional<YAML::Node>& default_box) {
  check_keys(node, {"name", "family", "n", "a", "b", "L", "params", "box"}, "metric");
  const auto name = scalar<std::string>(required(node, "name", "metric"), "metric name");
  const auto fam = required(node, "family", "metric '" + name + "'");
  const auto family = scalar<std::string>(fam, "family");
  const auto nn = required(node, "n", "metric '" + name + "'");
  const int n = scalar<int>(nn, "n");
  if (n < 2 || n > 6) fail(nn, "n must be between 2 and 6");
  std::map<std::string, double> params;
  if (const auto p = node["params"]) {
    if (!p.IsMap()) fail(p, "params must be a mapping");
    for (const auto& kv : p) params[kv.first.as<std::string>()] = scalar<double>(kv.second, "parameter");
  }
  auto want = [&](const char* key) { return required(node, key, family + " metric '" + name + "'"); };
  auto reject = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys)
      if (node[k]) fail(node[k], "key '" + std::string(k) + "' does not apply to family " + family);
  };

  std::optional<MetricModel> m;
  if (family == "euclidean") {
    reject({"a", "b", "L"});
    m = MetricModel::euclidean(n);
  } else if (family == "riemannian") {
    reject({"b", "L"});
    m = MetricModel::riemannian(n, matrix(want("a"), n, params, "a"));
  } else if (family == "randers") {
    reject({"L"});
    m = MetricModel::randers(n, matrix(want("a"), n, params, "a"), vector_of(want("b"), n, n, params, "b"));
  } else if (family == "expression") {
    reject({"a", "b"});
    m = MetricModel::from_expression(n, expression(want("L"), n, params));
  } else {
    fail(fam, "unknown family '" + family + "' (see 'finsler-lab families')");
  }
  m->set_name(name);
  if (const auto b = node["box"])
    m->set_x_box(box(b, n));
  else if (default_box)
    m->set_x_box(box(*default_box, n));
  return *m;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping", 1, 1);
  check_keys(root, {"sampling", "tolerances", "metrics", "candidates", "tasks"}, "configuration");

  RunConfig c;
  c.hash = fnv1a(text);
  std::optional<YAML::Node> default_box;
  if (const auto s = root["sampling"]) {
    check_keys(s, {"points", "seed", "box"}, "sampling");
    if (s["points"]) c.points = scalar<int>(s["points"], "points");
    if (s["seed"]) c.seed = scalar<std::uint64_t>(s["seed"], "seed");
    if (s["box"]) default_box = s["box"];
    if (c.points < 1) fail(s["points"], "points must be positive");
  }
  if (const auto t = root["tolerances"]) {
    check_keys(t, {"tol_abs", "tol_rel", "psi_min"}, "tolerances");
    if (t["tol_abs"]) c.tol.abs = scalar<double>(t["tol_abs"], "tol_abs");
    if (t["tol_rel"]) c.tol.rel = scalar<double>(t["tol_rel"], "tol_rel");
    if (t["psi_min"]) c.psi_min = scalar<double>(t["psi_min"], "psi_min");
    if (!(c.tol.abs >= 0.0) || !(c.tol.rel >= 0.0)) fail(t, "tolerances must be non-negative");
  }

  const auto metrics = required(root, "metrics", "configuration");
  if (!metrics.IsSequence() || metrics.size() == 0) fail(metrics, "metrics must be a non-empty list");
  std::set<std::string> names;
  for (const auto& mn : metrics) {
    c.metrics.push_back(parse_metric(mn, default_box));
    if (!names.insert(c.metrics.back().name()).second)
      fail(mn, "duplicate metric name '" + c.metrics.back().name() + "'");
  }

  if (const auto cands = root["candidates"]) {
    if (!cands.IsSequence()) fail(cands, "candidates must be a list");
    std::set<std::string> cnames;
    for (const auto& cn : cands) {
      check_keys(cn, {"name", "metrics", "components", "psi", "y_independent", "A_tensor", "expect"},
                 "candidate");
      CandidateSpec spec;
      spec.field.name = scalar<std::string>(required(cn, "name", "candidate"), "candidate name");
      if (!cnames.insert(spec.field.name).second) fail(cn, "duplicate candidate name '" + spec.field.name + "'");
      const auto comps = required(cn, "components", "candidate '" + spec.field.name + "'");
      if (!comps.IsSequence() || comps.size() < 2) fail(comps, "components must list n >= 2 expressions");
      const int n = static_cast<int>(comps.size());
      if (const auto ms = cn["metrics"]) {
        if (!ms.IsSequence()) fail(ms, "candidate metrics must be a list of names");
        for (const auto& mname : ms) {
          const auto s = scalar<std::string>(mname, "metric name");
          if (!names.count(s)) fail(mname, "candidate '" + spec.field.name + "' references unknown metric '" + s + "'");
          if (c.metric(s).dimension() != n)
            fail(mname, "candidate '" + spec.field.name + "' has " + std::to_string(n) +
                            " components but metric '" + s + "' has dimension " +
                            std::to_string(c.metric(s).dimension()));
          spec.metrics.push_back(s);
        }
      }
      spec.field.components = vector_of(comps, n, n, {}, "components");
      if (cn["psi"]) spec.field.psi = expression(cn["psi"], n, {});
      if (cn["y_independent"]) spec.field.declared_y_independent = scalar<bool>(cn["y_independent"], "y_independent");
      if (cn["A_tensor"]) spec.A_tensor = matrix(cn["A_tensor"], n, {}, "A_tensor");
      if (const auto e = cn["expect"]) {
        const auto v = scalar<std::string>(e, "expect");
        static const std::set<std::string> ok = {"concurrent", "concircular", "not concircular", "indeterminate"};
        if (!ok.count(v)) fail(e, "expect must be one of: concurrent, concircular, not concircular, indeterminate");
        spec.expect = v;
      }
      c.candidates.push_back(std::move(spec));
      if (c.metrics_for(c.candidates.back()).empty())
        fail(cn, "candidate '" + c.candidates.back().field.name + "' matches no metric");
    }
  }

  const auto tasks = required(root, "tasks", "configuration");
  if (!tasks.IsSequence() || tasks.size() == 0) fail(tasks, "tasks must be a non-empty list");
  for (const auto& tn : tasks) {
    const auto s = scalar<std::string>(tn, "task");
    const auto& all = all_tasks();
    const auto it = std::find_if(all.begin(), all.end(), [&](Task t) { return to_string(t) == s; });
    if (it == all.end())
      fail(tn, "unknown task '" + s + "' (tensors, classify, concircular, verify-theorems, identity-battery)");
    if (!c.has(*it)) c.tasks.push_back(*it);
  }
  const bool needs_candidates = c.has(Task::kConcircular) || c.has(Task::kVerifyTheorems);
  if (needs_candidates && c.candidates.empty())
    fail(tasks, "tasks concircular and verify-theorems need at least one candidate");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open configuration '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace finsler::lab
