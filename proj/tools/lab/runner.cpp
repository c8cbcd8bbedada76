#include "runner.hpp"

#include <cstdio>
#include <map>
#include <memory>

#include <finsler/parallel.hpp>

namespace finsler::lab {

using nlohmann::ordered_json;

void apply(RunConfig& c, const Overrides& o) {
  if (o.tol_abs) c.tol.abs = *o.tol_abs;
  if (o.tol_rel) c.tol.rel = *o.tol_rel;
  if (o.seed) c.seed = *o.seed;
  if (o.points) c.points = *o.points;
  if (c.points < 1) throw ConfigError("--points must be positive");
  if (!(c.tol.abs >= 0.0) || !(c.tol.rel >= 0.0)) throw ConfigError("tolerances must be non-negative");
}

ordered_json families() {
  ordered_json out = ordered_json::array();
  for (const auto& [name, what] : metric_families()) out.push_back({{"family", name}, {"description", what}});
  return out;
}

namespace {

// Nested arrays following the slot structure.
ordered_json nested(const Tensor<double>& t, std::size_t offset = 0, int slot = 0) {
  if (t.rank() == 0) return t.size() ? ordered_json(t[0]) : ordered_json(0.0);
  const int n = t.dimension();
  std::size_t stride = 1;
  for (int k = slot + 1; k < t.rank(); ++k) stride *= n;
  ordered_json a = ordered_json::array();
  for (int i = 0; i < n; ++i) {
    const std::size_t at = offset + i * stride;
    a.push_back(slot + 1 == t.rank() ? ordered_json(t[at]) : nested(t, at, slot + 1));
  }
  return a;
}

ordered_json check(double residual, double scale, const Tolerance& tol) {
  return {{"residual", residual}, {"scale", scale}, {"bound", tol.bound(scale)}, {"holds", tol.holds(residual, scale)}};
}

std::string hex(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// A fixed non-trivial pi-vector field used to exercise the Berwald-Cartan
// relation.
TensorField probe_field(int n) {
  std::vector<Expression> c;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    c.push_back(Expression::parse("1 + x" + std::to_string(i + 1) + "*y" + std::to_string(j + 1), n));
  }
  return TensorField::from_expressions(n, {kUp}, std::move(c));
}

struct MetricWork {
  const MetricModel* metric = nullptr;
  std::vector<JetPoint> corpus;
  std::optional<MetricEvidence> evidence;
  ordered_json tensors, classify, identities;
  std::vector<std::string> failures;
};

struct PairWork {
  const CandidateSpec* spec = nullptr;
  MetricWork* metric = nullptr;
  std::optional<ConcircularReport> fit;
  ordered_json concircular;
  ordered_json theorems = ordered_json::array();
  std::vector<std::string> failures;
};

ordered_json tensors_task(MetricWork& w, const RunConfig& c) {
  const auto& m = *w.metric;
  const auto& tol = c.tol;
  const int n = m.dimension();
  ordered_json out;
  double hm = 0, vm = 0, fs = 0, ts = 0, defl = 0, bs = 0, bc = 0, bl = 0, brv = 0, brh = 0;
  const auto probe = probe_field(n);
  for (const auto& p : w.corpus) {
    const LocalGeometry geo(m, p, {.order = 4});
    const auto a = cartan_axioms(geo);
    hm = std::max(hm, a.h_metricity);
    vm = std::max(vm, a.v_metricity);
    fs = std::max(fs, a.f_symmetry);
    ts = std::max(ts, a.t_symmetry);
    defl = std::max(defl, a.deflection);
    const auto b = berwald_axioms(geo);
    bs = std::max(bs, b.symmetry);
    bc = std::max(bc, b.contraction);
    bl = std::max(bl, b.h_derivative_of_l);
    const auto br = berwald_bridge_check(geo, probe);
    brv = std::max(brv, br.vertical);
    brh = std::max(brh, br.horizontal);
  }
  ordered_json axioms;
  auto add = [&](const std::string& group, const std::string& name, double r) {
    auto j = check(r, 1.0, tol);
    if (!j["holds"].get<bool>()) w.failures.push_back("tensors: " + m.name() + ": " + group + " " + name);
    axioms[group][name] = std::move(j);
  };
  add("cartan", "h_metricity", hm);
  add("cartan", "v_metricity", vm);
  add("cartan", "f_symmetry", fs);
  add("cartan", "t_symmetry", ts);
  add("cartan", "deflection", defl);
  add("berwald", "symmetry", bs);
  add("berwald", "contraction", bc);
  add("berwald", "h_derivative_of_l", bl);
  add("bridge", "vertical", brv);
  add("bridge", "horizontal", brh);
  out["axioms"] = std::move(axioms);

  // Full tensor dump at the first corpus point.
  const auto& p = w.corpus.front();
  const LocalGeometry geo(m, p, {.order = 4});
  const auto cd = connection_data(geo);
  const CurvatureJets k(geo);
  const auto cv = curvature_data(geo, k);
  const auto ct = contracted_torsion(m, p);
  ordered_json t;
  t["x"] = p.x;
  t["y"] = p.y;
  t["L"] = m.finsler_function(p);
  t["g"] = nested(fundamental_tensor(m, p).components);
  t["l"] = nested(normalized_supporting_form(m, p).components);
  t["hbar"] = nested(angular_metric(m, p).components);
  t["T"] = nested(cartan_tensor(m, p).components);
  t["C"] = nested(ct.c.components);
  t["C2"] = ct.c2;
  t["spray"] = cd.spray;
  t["N"] = nested(cd.nonlinear);
  t["F"] = nested(cd.cartan_h);
  t["Cv"] = nested(cd.cartan_v);
  t["berwald"] = nested(cd.berwald);
  t["R"] = nested(cv.R);
  t["P"] = nested(cv.P);
  t["S"] = nested(cv.S);
  t["Rhat"] = nested(cv.Rhat);
  t["Phat"] = nested(cv.Phat);
  t["Shat"] = nested(cv.Shat);
  t["ric_v"] = nested(cv.ric_v);
  t["sc_v"] = cv.sc_v;
  out["at_first_point"] = std::move(t);
  return out;
}

ordered_json classify_json(const MetricEvidence& ev) {
  const auto& cls = ev.classification;
  ordered_json preds;
  for (const auto& p : cls.predicates) {
    ordered_json j;
    j["verdict"] = to_string(p.verdict);
    j["residual"] = p.residual;
    j["scale"] = p.scale;
    j["bound"] = p.bound;
    if (!p.note.empty()) j["note"] = p.note;
    if (!p.fitted.empty()) {
      ordered_json f;
      for (const auto& [k, v] : p.fitted) f[k] = v;
      j["fitted"] = std::move(f);
    }
    preds[p.name] = std::move(j);
  }
  ordered_json rec;
  for (const auto& r : ev.recurrence) {
    rec[r.name] = {{"verdict", r.verdict()},
                   {"residual", r.residual},
                   {"scale", r.scale},
                   {"bound", r.bound},
                   {"tensor_max_abs", r.tensor_norm}};
  }
  return {{"predicates", std::move(preds)}, {"recurrence", std::move(rec)}};
}

ordered_json identity_json(MetricWork& w, const RunConfig& c) {
  const auto rep = identity_battery(*w.metric, w.corpus, c.tol);
  ordered_json out;
  for (const auto& r : rep.identities) {
    out[r.name] = {{"residual", r.residual}, {"scale", r.scale}, {"bound", r.bound}, {"holds", r.holds}};
    if (!r.holds) w.failures.push_back("identity-battery: " + w.metric->name() + ": " + r.name);
  }
  return out;
}

ordered_json concircular_json(PairWork& pw, const RunConfig& c) {
  const auto& cand = pw.spec->field;
  const auto& m = *pw.metric->metric;
  const auto& r = *pw.fit;
  const std::string where = cand.name + " on " + m.name();
  ordered_json out;
  out["candidate"] = cand.name;
  out["metric"] = m.name();
  out["verdict"] = r.verdict();
  out["berwald_concircular"] = r.berwald_concircular;
  out["indeterminate_points"] = r.indeterminate_points;
  out["horizontal"] = check(r.residual_h, r.scale_h, c.tol);
  out["vertical"] = check(r.residual_v, r.scale_h, c.tol);
  out["psi_min_abs"] = r.min_abs_psi;
  out["psi_floor"] = r.psi_min;
  out["psi_plus_one_max_abs"] = r.max_abs_psi_plus_one;
  out["alpha_max_abs"] = r.max_abs_alpha;
  out["berwald_horizontal_residual"] = r.residual_h_berwald;
  out["berwald_vertical_residual"] = r.residual_v_berwald;
  if (cand.psi) out["closed_form_psi"] = check(r.closed_form_psi_residual, 1.0, c.tol);
  if (cand.declared_y_independent) {
    auto j = check(r.declared_y_independence, 1.0, c.tol);
    if (!j["holds"].get<bool>()) pw.failures.push_back("concircular: " + where + ": declared y-independence");
    out["declared_y_independent"] = std::move(j);
  }
  if (!r.data.empty()) {
    out["psi_first_point"] = r.data.front().psi;
    out["alpha_first_point"] = r.data.front().alpha;
  }
  if (pw.spec->expect) {
    const bool ok = *pw.spec->expect == r.verdict();
    out["expect"] = {{"verdict", *pw.spec->expect}, {"matches", ok}};
    if (!ok) pw.failures.push_back("concircular: " + where + ": expected " + *pw.spec->expect + ", got " + r.verdict());
  }
  const auto battery = consequence_battery(m, cand, pw.metric->corpus, r, {.tol = c.tol, .psi_min = c.psi_min});
  ordered_json b;
  b["ran"] = battery.ran;
  ordered_json items;
  for (const auto& i : battery.items) {
    ordered_json j = {{"residual", i.residual}, {"scale", i.scale}, {"bound", i.bound}};
    j["status"] = !i.applicable ? "not-applicable" : i.holds ? "holds" : "fails";
    if (i.applicable && !i.holds) pw.failures.push_back("consequences: " + where + ": " + i.name);
    items[i.name] = std::move(j);
  }
  b["items"] = std::move(items);
  out["consequences"] = std::move(b);
  return out;
}

ordered_json instance_json(const HarnessInstance& h) {
  ordered_json hyp;
  for (const auto& [k, v] : h.hypotheses) hyp[k] = v;
  ordered_json j;
  j["theorem"] = h.theorem;
  j["metric"] = h.metric;
  j["candidate"] = h.candidate;
  j["status"] = to_string(h.status);
  j["trivial"] = h.trivial;
  j["hypotheses"] = std::move(hyp);
  j["conclusion"] = h.conclusion;
  j["conclusion_residual"] = h.conclusion_residual;
  if (!h.note.empty()) j["note"] = h.note;
  return j;
}

}  // namespace

RunResult run(const RunConfig& c, unsigned workers) {
  RunResult res;
  const bool want_evidence = c.has(Task::kClassify) || c.has(Task::kVerifyTheorems);
  const bool want_fit = c.has(Task::kConcircular) || c.has(Task::kVerifyTheorems);

  std::vector<std::unique_ptr<MetricWork>> mw;
  std::map<std::string, MetricWork*> by_name;
  for (const auto& m : c.metrics) {
    mw.push_back(std::make_unique<MetricWork>());
    mw.back()->metric = &m;
    by_name[m.name()] = mw.back().get();
  }
  // Sampling errors surface as AdmissibilityError.
  for (auto& w : mw) w->corpus = sample_corpus(*w->metric, {.count = c.points, .seed = c.seed});

  parallel_for(
      mw.size(),
      [&](std::size_t i) {
        auto& w = *mw[i];
        if (c.has(Task::kTensors)) w.tensors = tensors_task(w, c);
        if (want_evidence) {
          ClassifyOptions co;
          co.tol = c.tol;
          w.evidence = gather_evidence(*w.metric, w.corpus, co);
          if (c.has(Task::kClassify)) w.classify = classify_json(*w.evidence);
        }
        if (c.has(Task::kIdentityBattery)) w.identities = identity_json(w, c);
      },
      workers);

  std::vector<std::unique_ptr<PairWork>> pw;
  if (want_fit)
    for (const auto& spec : c.candidates)
      for (const auto* m : c.metrics_for(spec)) {
        pw.push_back(std::make_unique<PairWork>());
        pw.back()->spec = &spec;
        pw.back()->metric = by_name.at(m->name());
      }
  HarnessOptions ho;
  ho.tol = c.tol;
  ho.psi_min = c.psi_min;
  parallel_for(
      pw.size(),
      [&](std::size_t i) {
        auto& p = *pw[i];
        const auto& m = *p.metric->metric;
        p.fit = fit_and_verify(m, p.spec->field, p.metric->corpus, {.tol = c.tol, .psi_min = c.psi_min});
        if (c.has(Task::kConcircular)) p.concircular = concircular_json(p, c);
        if (c.has(Task::kVerifyTheorems)) {
          for (const auto& h : harness_instances(m, p.metric->corpus, p.spec->field, *p.fit,
                                                 *p.metric->evidence, ho, p.spec->A_tensor)) {
            if (h.status == InstanceStatus::kViolated)
              p.failures.push_back("verify-theorems: " + h.metric + "/" + h.candidate + ": " + h.theorem);
            p.theorems.push_back(instance_json(h));
          }
        }
      },
      workers);

  ordered_json& r = res.report;
  r["tool"] = "finsler-lab";
  r["provenance"] = {{"config_hash", hex(c.hash)},
                     {"seed", c.seed},
                     {"points", c.points},
                     {"tolerances", {{"tol_abs", c.tol.abs}, {"tol_rel", c.tol.rel}, {"psi_min", c.psi_min}}}};
  ordered_json tasks = ordered_json::array();
  for (auto t : c.tasks) tasks.push_back(to_string(t));
  r["tasks"] = std::move(tasks);

  ordered_json metrics;
  for (auto& w : mw) {
    const auto& m = *w->metric;
    ordered_json j;
    j["family"] = m.family_name();
    j["n"] = m.dimension();
    ordered_json box = ordered_json::array();
    for (const auto& [lo, hi] : m.x_box()) box.push_back({lo, hi});
    j["box"] = std::move(box);
    if (c.has(Task::kTensors)) j["tensors"] = std::move(w->tensors);
    if (c.has(Task::kClassify)) j["classify"] = std::move(w->classify);
    if (c.has(Task::kIdentityBattery)) j["identity_battery"] = std::move(w->identities);
    metrics[m.name()] = std::move(j);
    for (auto& f : w->failures) res.failures.push_back(std::move(f));
  }
  r["metrics"] = std::move(metrics);

  if (c.has(Task::kConcircular)) {
    ordered_json a = ordered_json::array();
    for (auto& p : pw) a.push_back(std::move(p->concircular));
    r["concircular"] = std::move(a);
  }
  if (c.has(Task::kVerifyTheorems)) {
    ordered_json inst = ordered_json::array();
    int sat = 0, nontrivial = 0, viol = 0, vac = 0;
    for (auto& p : pw)
      for (auto& h : p->theorems) {
        const auto s = h["status"].get<std::string>();
        if (s == "satisfied") {
          ++sat;
          if (!h["trivial"].get<bool>()) ++nontrivial;
        } else if (s == "violated") {
          ++viol;
        } else {
          ++vac;
        }
        inst.push_back(std::move(h));
      }
    r["theorems"] = {{"summary",
                      {{"satisfied", sat}, {"satisfied_nontrivial", nontrivial}, {"violated", viol}, {"vacuous", vac}}},
                     {"instances", std::move(inst)}};
  }
  for (auto& p : pw)
    for (auto& f : p->failures) res.failures.push_back(std::move(f));

  res.exit_code = res.failures.empty() ? kExitPass : kExitCheckFailed;
  r["result"] = {{"exit_code", res.exit_code}, {"failures", res.failures}};
  return res;
}

}  // namespace finsler::lab
