#include <doctest.h>

#include <cmath>

#include <finsler/concircular.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace finsler;

namespace {

std::vector<JetPoint> corpus_of(const MetricModel& m, int count = 12, std::uint64_t seed = 3) {
  return sample_corpus(m, {.count = count, .seed = seed});
}

double max_applicable_residual(const ConsequenceReport& r) {
  double worst = 0.0;
  for (const auto& i : r.items)
    if (i.applicable && i.name.find("not identically zero") == std::string::npos)
      worst = std::max(worst, i.residual);
  return worst;
}

}  // namespace

TEST_CASE("flat space: -x is concurrent, x concircular, a constant field neither") {
  const auto m = fx::euclidean();
  const auto corpus = corpus_of(m);

  const auto in = fit_and_verify(m, fx::minus_x(), corpus);
  CHECK(in.verdict() == "concurrent");
  for (const auto& p : in.data) {
    CHECK(p.psi == doctest::Approx(-1.0).epsilon(1e-12));
    for (double a : p.alpha) CHECK(std::abs(a) < 1e-12);
  }

  const auto out = fit_and_verify(m, fx::plus_x(), corpus);
  CHECK(out.verdict() == "concircular");
  CHECK(out.min_abs_psi == doctest::Approx(1.0).epsilon(1e-12));

  const auto c = fit_and_verify(m, fx::candidate("constant", {"1", "0.5", "0"}), corpus);
  CHECK(c.verdict() == "not concircular");
  CHECK(c.min_abs_psi < 1e-12);
}

TEST_CASE("the zero field is indeterminate") {
  const auto m = fx::euclidean();
  const auto r = fit_and_verify(m, fx::candidate("zero", {"0", "0", "0"}), corpus_of(m, 4));
  CHECK(r.indeterminate);
  CHECK(r.verdict() == "indeterminate");
  CHECK_FALSE(consequence_battery(m, fx::candidate("zero", {"0", "0", "0"}), corpus_of(m, 4)).ran);
}

TEST_CASE("gradient fields on the constant-curvature models are concircular") {
  const auto s = fx::sphere();
  const auto rs = fit_and_verify(s, fx::sphere_gradient(), corpus_of(s));
  CHECK(rs.verdict() == "concircular");
  CHECK(rs.closed_form_psi_residual < 1e-10);
  CHECK(rs.max_abs_alpha < 1e-10);
  double lo = 1e9, hi = -1e9;
  for (const auto& p : rs.data) lo = std::min(lo, p.psi), hi = std::max(hi, p.psi);
  CHECK(hi - lo > 1e-2);  // psi is not constant, unlike the flat case

  const auto h = fx::hyperbolic();
  auto hg = fx::plus_x();
  hg.psi = Expression::parse("(1+" + fx::r2(3) + ")/(1-" + fx::r2(3) + ")", 3);
  const auto rh = fit_and_verify(h, hg, corpus_of(h));
  CHECK(rh.verdict() == "concircular");
  CHECK(rh.closed_form_psi_residual < 1e-10);
}

TEST_CASE("warped product: the Hessian oracle confirms Hess f = psi g") {
  const auto m = fx::warped();
  const auto& fam = std::get<RiemannianFamily>(m.family());
  const auto a = oracle::riemannian_matrix(fam.a, 3);
  const oracle::Fn f = [](const oracle::Vec& x) { return std::sinh(x[0]); };
  for (const auto& p : corpus_of(m, 5)) {
    const auto H = oracle::hessian(a, f, p.x);
    const auto g = a(p.x);
    const double psi = std::sinh(p.x[0]);
    CHECK(oracle::max_abs(H - psi * g) < 1e-7);
  }
}

TEST_CASE("warped product: cosh(x1) d/dx1 is concircular and its consequences hold") {
  const auto m = fx::warped();
  const auto corpus = corpus_of(m, 20);
  const auto r = fit_and_verify(m, fx::warped_gradient(), corpus);
  CHECK(r.verdict() == "concircular");
  CHECK(r.residual_h < 1e-6);
  CHECK(r.closed_form_psi_residual < 1e-8);
  const auto b = consequence_battery(m, fx::warped_gradient(), corpus, r);
  REQUIRE(b.ran);
  CHECK(b.passed());
  CHECK(b.find("R(X,Y)zeta = A(Y)X - A(X)Y").residual < 1e-6);
  CHECK(b.find("R(X,Y)zeta = A(Y)X - A(X)Y").scale > 1e-3);  // curvature is not zero here
}

TEST_CASE("consequence battery passes on every concircular corpus pair") {
  struct Case {
    MetricModel m;
    CandidateField c;
  };
  auto hg = fx::plus_x();
  hg.psi = Expression::parse("(1+" + fx::r2(3) + ")/(1-" + fx::r2(3) + ")", 3);
  const std::vector<Case> cases = {{fx::euclidean(), fx::minus_x()},
                                   {fx::euclidean(), fx::plus_x()},
                                   {fx::sphere(), fx::sphere_gradient()},
                                   {fx::hyperbolic(), hg},
                                   {fx::warped(), fx::warped_gradient()}};
  for (const auto& c : cases) {
    CAPTURE(c.m.name());
    const auto b = consequence_battery(c.m, c.c, corpus_of(c.m, 15, 8));
    REQUIRE(b.ran);
    for (const auto& i : b.items) {
      CAPTURE(i.name);
      CHECK((!i.applicable || i.holds));
    }
    CHECK(max_applicable_residual(b) < 1e-8);
  }
}

TEST_CASE("concurrent-only items are not applicable for a merely concircular field") {
  const auto m = fx::euclidean();
  const auto b = consequence_battery(m, fx::plus_x(), corpus_of(m, 4));
  CHECK_FALSE(b.find("concurrent: R(X,Y)zeta = 0").applicable);
  const auto c = consequence_battery(m, fx::minus_x(), corpus_of(m, 4));
  CHECK(c.find("concurrent: R(X,Y)zeta = 0").applicable);
}

TEST_CASE("Cartan-concircular fields are Berwald-concircular with the same psi") {
  auto hg = fx::plus_x();
  hg.psi = Expression::parse("(1+" + fx::r2(3) + ")/(1-" + fx::r2(3) + ")", 3);
  const std::vector<std::pair<MetricModel, CandidateField>> cases = {
      {fx::euclidean(), fx::minus_x()},      {fx::euclidean(), fx::plus_x()},
      {fx::sphere(), fx::sphere_gradient()}, {fx::hyperbolic(), hg},
      {fx::warped(), fx::warped_gradient()}, {fx::randers_const(), fx::minus_x()},
      {fx::randers_x(), fx::minus_x()},      {fx::euclidean(), fx::candidate("c", {"1", "0.5", "0"})}};
  for (const auto& [m, c] : cases) {
    CAPTURE(m.name());
    CAPTURE(c.name);
    const auto r = fit_and_verify(m, c, corpus_of(m, 10, 12));
    if (!r.concircular) continue;
    CHECK(r.berwald_concircular);
    for (const auto& p : r.data) CHECK(std::abs(p.psi - p.psi_berwald) < 1e-8 * std::max(1.0, std::abs(p.psi)));
  }
}

// The converse direction fails: on a Minkowski-type Randers metric the
// Berwald connection is the flat coordinate connection, so -x is concurrent
// for it, while the Cartan v-derivative of zeta picks up T(X, zeta) != 0.
TEST_CASE("Berwald-concircular does not imply Cartan-concircular on Randers") {
  const auto m = fx::randers_const();
  const auto r = fit_and_verify(m, fx::minus_x(), corpus_of(m, 10, 12));
  CHECK(r.berwald_concircular);
  CHECK(r.residual_h_berwald < 1e-10);
  CHECK(r.residual_v_berwald < 1e-10);
  CHECK_FALSE(r.concircular);
  CHECK(r.residual_v > 1e-2);
}

TEST_CASE("declared y-independence is measured") {
  const auto m = fx::euclidean();
  auto c = fx::candidate("y_dependent", {"-x1 + 0.1*y1", "-x2", "-x3"});
  const auto r = fit_and_verify(m, c, corpus_of(m, 4));
  CHECK(r.declared_y_independence == doctest::Approx(0.1));
  CHECK(fit_and_verify(m, fx::minus_x(), corpus_of(m, 4)).declared_y_independence == 0.0);
}

TEST_CASE("a perturbed connection destroys the flat concurrent verdict") {
  const auto m = fx::euclidean();
  ConcircularOptions o;
  o.connection_fault = 1e-3;
  CHECK(fit_and_verify(m, fx::minus_x(), corpus_of(m, 4), o).verdict() != "concurrent");
}
