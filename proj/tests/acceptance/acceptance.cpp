// One line per acceptance criterion; exit status 1 when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <finsler/diffcore.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "runner.hpp"

using namespace finsler;

namespace {

struct Criterion {
  int id;
  std::string what;
  std::function<std::pair<double, double>()> measure;  // (measured, bound); pass when measured < bound
  bool inverted = false;  // pass when measured >= bound
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<JetPoint> corpus_of(const MetricModel& m, int count, std::uint64_t seed) {
  return sample_corpus(m, {.count = count, .seed = seed});
}

// 1. Jet derivatives of L^2 against the Richardson oracle.
double energy_derivative_error() {
  double worst = 0.0;
  for (const auto& m : {fx::euclidean(), fx::sphere(), fx::randers_x(), fx::expression_metric()}) {
    const auto field = m.energy_field();
    const auto e = oracle::energy(m);
    const int nv = 2 * m.dimension();
    const auto indices = multi_indices(nv, 4);
    for (const auto& p : corpus_of(m, 100, 101)) {
      const auto at = p.coordinates();
      for (const auto& mi : indices) {
        std::vector<int> orders(nv, 0);
        for (int v : mi) ++orders[v];
        const double ad = derive(field, at, mi);
        const double fd = oracle::derivative(e, at, orders);
        worst = std::max(worst, std::abs(ad - fd) / std::max(1.0, std::abs(ad)));
      }
    }
  }
  return worst;
}

double cartan_axiom_max(const MetricModel& m, int count) {
  double worst = 0.0;
  for (const auto& p : corpus_of(m, count, 202)) {
    const auto c = cartan_axioms(LocalGeometry(m, p));
    worst = std::max({worst, c.h_metricity, c.v_metricity, c.f_symmetry, c.t_symmetry, c.deflection});
  }
  return worst;
}

double berwald_axiom_max() {
  double worst = 0.0;
  const auto probe = TensorField::from_expressions(3, {kUp}, fx::exprs({"1 + x1*y2", "1 + x2*y3", "1 + x3*y1"}, 3));
  for (const auto& m : {fx::randers_const(), fx::randers_x(), fx::expression_metric()})
    for (const auto& p : corpus_of(m, 100, 303)) {
      const LocalGeometry geo(m, p);
      const auto b = berwald_axioms(geo);
      worst = std::max({worst, b.symmetry, b.contraction, b.h_derivative_of_l, berwald_bridge_check(geo, probe).max()});
    }
  return worst;
}

// 4. Relative deviation of F and R from the Christoffel oracle; S and P in absolute terms.
std::pair<double, double> riemannian_oracle_errors() {
  double rel = 0.0, sp = 0.0;
  for (const auto& m : {fx::sphere(), fx::hyperbolic(), fx::warped()}) {
    const auto a = oracle::riemannian_matrix(std::get<RiemannianFamily>(m.family()).a, 3);
    for (const auto& p : corpus_of(m, 20, 404)) {
      const auto G = oracle::christoffel(a, p.x);
      const auto R = oracle::riemann(a, p.x);
      const auto d = cartan_coefficients(m, p);
      const auto k = curvatures(m, p);
      double gs = 1.0, rs = 1.0, ge = 0.0, re = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int l = 0; l < 3; ++l) {
            gs = std::max(gs, std::abs(G[i](j, l)));
            ge = std::max(ge, std::abs(d.cartan_h(i, j, l) - G[i](j, l)));
            for (int c = 0; c < 3; ++c) {
              rs = std::max(rs, std::abs(R[i][c](j, l)));
              re = std::max(re, std::abs(k.R_mixed(j, l, c, i) + R[i][c](j, l)));
            }
          }
      rel = std::max({rel, ge / gs, re / rs});
      sp = std::max({sp, max_abs(k.S), max_abs(k.P)});
    }
  }
  return {rel, sp};
}

double identity_battery_max() {
  double worst = 0.0;
  for (const auto& m : {fx::randers_const(), fx::randers_x()})
    for (const auto& r : identity_battery(m, corpus_of(m, 50, 505)).identities) worst = std::max(worst, r.residual);
  return worst;
}

// 6. Verdicts and psi on the known examples, plus the consequence battery.
std::pair<double, double> concircular_detection() {
  double psi_err = 0.0, battery = 0.0;
  bool verdicts = true;
  auto account = [&](const MetricModel& m, const CandidateField& c, const std::string& want,
                     const std::function<double(const JetPoint&)>& psi) {
    const auto corpus = corpus_of(m, 30, 606);
    const auto r = fit_and_verify(m, c, corpus);
    verdicts = verdicts && r.verdict() == want;
    for (std::size_t k = 0; k < corpus.size(); ++k) {
      psi_err = std::max(psi_err, std::abs(r.data[k].psi - psi(corpus[k])));
      for (double a : r.data[k].alpha) psi_err = std::max(psi_err, std::abs(a));  // alpha = 0 for all of these
    }
    const auto b = consequence_battery(m, c, corpus, r);
    verdicts = verdicts && b.passed();
    for (const auto& i : b.items)
      if (i.applicable && i.name.find("not identically zero") == std::string::npos)
        battery = std::max(battery, i.residual);
  };
  auto r2 = [](const JetPoint& p) { return p.x[0] * p.x[0] + p.x[1] * p.x[1] + p.x[2] * p.x[2]; };
  account(fx::euclidean(), fx::minus_x(), "concurrent", [](const JetPoint&) { return -1.0; });
  account(fx::euclidean(), fx::plus_x(), "concircular", [](const JetPoint&) { return 1.0; });
  account(fx::sphere(), fx::sphere_gradient(), "concircular",
          [&](const JetPoint& p) { return -(1 - r2(p)) / (1 + r2(p)); });
  account(fx::warped(), fx::warped_gradient(), "concircular", [](const JetPoint& p) { return std::sinh(p.x[0]); });
  const auto e = fx::euclidean();
  const auto no = fit_and_verify(e, fx::candidate("constant", {"1", "0.5", "0"}), corpus_of(e, 30, 606));
  verdicts = verdicts && no.verdict() == "not concircular";
  if (!verdicts) return {INFINITY, INFINITY};
  return {psi_err, battery};
}

struct WarpedResult {
  double residual, rzeta, k0;
};
WarpedResult warped_example() {
  const auto m = fx::warped();
  const auto corpus = corpus_of(m, 50, 707);
  const auto r = fit_and_verify(m, fx::warped_gradient(), corpus);
  const auto b = consequence_battery(m, fx::warped_gradient(), corpus, r);
  const double rzeta = b.ran ? b.find("R(X,Y)zeta = A(Y)X - A(X)Y").residual : INFINITY;
  const double res = r.concircular ? std::max(r.residual_h, r.residual_v) : INFINITY;
  // closed form k0 = -A(m) / g(m, zeta) against the h-isotropic fit on the
  // constant-curvature models
  double k0 = 0.0;
  auto hg = fx::plus_x();
  hg.psi = Expression::parse("(1+" + fx::r2(3) + ")/(1-" + fx::r2(3) + ")", 3);
  for (const auto& [cm, cf] : {std::pair{fx::sphere(), fx::sphere_gradient()}, std::pair{fx::hyperbolic(), hg}}) {
    const auto cc = corpus_of(cm, 50, 707);
    const auto fit = fit_and_verify(cm, cf, cc);
    const auto cls = classify_special(cm, cc);
    int used = 0;
    for (std::size_t k = 0; k < cc.size(); ++k) {
      const auto& d = fit.data[k];
      double am = 0.0, gmz = 0.0, zz = 0.0;
      for (int i = 0; i < 3; ++i) {
        am += d.A_form[i] * d.m_field[i];
        gmz += d.omega[i] * d.m_field[i];
        zz += d.omega[i] * d.zeta[i];
      }
      if (std::abs(gmz) < 1e-6 * std::max(1.0, zz)) continue;  // zeta along eta
      ++used;
      const double closed = -am / gmz;
      k0 = std::max(k0, std::abs(closed - cls.k0[k]) / std::max(1.0, std::abs(cls.k0[k])));
    }
    if (used < 25 || !fit.concircular) k0 = INFINITY;
  }
  return {res, rzeta, k0};
}

struct CReducible {
  double synth_residual, synth_recovery, randers;
};
CReducible c_reducible_fits() {
  CReducible r{0.0, 0.0, 0.0};
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto m = fx::randers_x();
  for (const auto& p : corpus_of(m, 50, 808)) {
    const auto hbar = angular_metric(m, p).components;
    std::vector<double> c = {u(rng), u(rng), u(rng)};
    const auto f = fit_c_reducible(c_reducible_form(hbar, c), hbar);
    r.synth_residual = std::max(r.synth_residual, f.residual);
    for (int i = 0; i < 3; ++i) r.synth_recovery = std::max(r.synth_recovery, std::abs(f.coefficients[i] - c[i]));
  }
  for (const auto& rm : {fx::randers_const(), fx::randers_x()})
    r.randers = std::max(r.randers, classify_special(rm, corpus_of(rm, 50, 808)).find("C-reducible").residual);
  return r;
}

}  // namespace

int main() {
  const std::string corpus_path = std::string(FINSLER_SOURCE_DIR) + "/configs/corpus.yaml";
  std::pair<double, double> riem{}, conc{};
  CReducible cred{};
  WarpedResult warped{};
  finsler::lab::RunResult corpus_run;
  bool riem_done = false, conc_done = false, cred_done = false, warped_done = false, run_done = false;
  auto lazy_riem = [&] { if (!riem_done) riem = riemannian_oracle_errors(), riem_done = true; return riem; };
  auto lazy_conc = [&] { if (!conc_done) conc = concircular_detection(), conc_done = true; return conc; };
  auto lazy_cred = [&] { if (!cred_done) cred = c_reducible_fits(), cred_done = true; return cred; };
  auto lazy_warp = [&] { if (!warped_done) warped = warped_example(), warped_done = true; return warped; };
  auto lazy_run = [&]() -> const finsler::lab::RunResult& {
    if (!run_done) corpus_run = finsler::lab::run(finsler::lab::load_config(corpus_path)), run_done = true;
    return corpus_run;
  };

  const std::vector<Criterion> criteria = {
      {1, "L^2 derivatives to order 4 match the Richardson oracle (rel), 4 families x 100 points",
       [] { return std::pair{energy_derivative_error(), 1e-5}; }},
      {2, "Cartan axioms on Randers, 100 points", [] { return std::pair{cartan_axiom_max(fx::randers_x(), 100), 1e-7}; }},
      {2, "Cartan axioms on Euclidean, 100 points", [] { return std::pair{cartan_axiom_max(fx::euclidean(), 100), 1e-12}; }},
      {3, "Berwald axioms and bridge check, 100 points", [] { return std::pair{berwald_axiom_max(), 1e-7}; }},
      {4, "Riemannian F and R match the Christoffel oracle (rel)", [&] { return std::pair{lazy_riem().first, 1e-7}; }},
      {4, "Riemannian S and P vanish", [&] { return std::pair{lazy_riem().second, 1e-9}; }},
      {5, "identity battery on Randers, 50 points", [] { return std::pair{identity_battery_max(), 1e-6}; }},
      {6, "concircular verdicts, fitted psi and alpha on known fields", [&] { return std::pair{lazy_conc().first, 1e-8}; }},
      {6, "consequence battery on concircular fields", [&] { return std::pair{lazy_conc().second, 1e-8}; }},
      {7, "warped product field is concircular", [&] { return std::pair{lazy_warp().residual, 1e-6}; }},
      {7, "warped product R(X,Y)zeta = A(Y)X - A(X)Y", [&] { return std::pair{lazy_warp().rzeta, 1e-6}; }},
      {7, "constant curvature: closed-form k0 = -A(m)/g(m,zeta) against the fit (rel)", [&] { return std::pair{lazy_warp().k0, 1e-5}; }},
      {8, "theorem harness over the shipped corpus: violated instances",
       [&] { return std::pair{lazy_run().report["theorems"]["summary"]["violated"].get<double>(), 0.5}; }},
      {8, "theorem harness over the shipped corpus: non-trivially satisfied instances",
       [&] { return std::pair{lazy_run().report["theorems"]["summary"]["satisfied_nontrivial"].get<double>(), 3.0}; },
       true},
      {9, "synthetic C-reducible tensor: fit residual", [&] { return std::pair{lazy_cred().synth_residual, 1e-10}; }},
      {9, "synthetic C-reducible tensor: recovered one-form", [&] { return std::pair{lazy_cred().synth_recovery, 1e-9}; }},
      {9, "Randers metrics are C-reducible", [&] { return std::pair{lazy_cred().randers, 1e-6}; }},
      {10, "two command line runs of the shipped corpus write byte-identical reports", [&] {
         const std::string exe = FINSLER_LAB_EXE;
         for (const char* out : {"acceptance_run_a.json", "acceptance_run_b.json"}) {
           const std::string cmd = exe + " run " + corpus_path + " --out " + out + " 2> /dev/null";
           if (std::system(cmd.c_str()) != 0) return std::pair{1.0, 0.5};
         }
         return std::pair{slurp("acceptance_run_a.json") == slurp("acceptance_run_b.json") ? 0.0 : 1.0, 0.5};
       }},
      {10, "in-process report equals the command line report",
       [&] { return std::pair{lazy_run().report.dump(2) + "\n" == slurp("acceptance_run_a.json") ? 0.0 : 1.0, 0.5}; }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    double measured = INFINITY, bound = 0.0;
    std::string error;
    try {
      std::tie(measured, bound) = c.measure();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const bool pass = error.empty() && (c.inverted ? measured >= bound : measured < bound);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!pass) ++failed;
    std::printf("%s [%2d] %s: measured %.3e, %s %.3e (%.1fs)%s%s\n", pass ? "PASS" : "FAIL", c.id, c.what.c_str(),
                measured, c.inverted ? "needs >=" : "bound", bound, secs, error.empty() ? "" : " error: ",
                error.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
