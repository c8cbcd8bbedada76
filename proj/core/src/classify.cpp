#include "finsler/classify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "finsler/linalg.hpp"

namespace finsler {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kVacuous: return "vacuous";
    case Verdict::kNotApplicable: return "not-applicable";
  }
  return "?";
}

std::string to_string(InstanceStatus s) {
  switch (s) {
    case InstanceStatus::kSatisfied: return "satisfied";
    case InstanceStatus::kViolated: return "violated";
    case InstanceStatus::kVacuous: return "vacuous";
  }
  return "?";
}

bool PredicateResult::holds(const Tolerance& tol) const {
  if (verdict == Verdict::kVacuous) return true;
  if (verdict == Verdict::kNotApplicable) return false;
  return tol.holds(residual, scale);
}

const PredicateResult& ClassificationReport::find(const std::string& name) const {
  for (const auto& p : predicates)
    if (p.name == name) return p;
  throw std::out_of_range("classification has no predicate '" + name + "'");
}

// ---------------------------------------------------------------------------
// Form fits at one point

namespace {

double dot(const Tensor<double>& a, const Tensor<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

Tensor<double> ccc_over_c2(int n, std::span<const double> C, double c2) {
  Tensor<double> t(n, {kDown, kDown, kDown});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) t(i, j, k) = C[i] * C[j] * C[k] / c2;
  return t;
}

// max |a - s b|
double defect(const Tensor<double>& a, const Tensor<double>& b, double s) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - s * b[k]));
  return d;
}

}  // namespace

Tensor<double> c_reducible_form(const Tensor<double>& hbar, std::span<const double> c) {
  const int n = hbar.dimension();
  Tensor<double> t(n, {kDown, kDown, kDown});
  const double f = 1.0 / (n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        t(i, j, k) = f * (hbar(i, j) * c[k] + hbar(j, k) * c[i] + hbar(k, i) * c[j]);
  return t;
}

FormFit fit_c_reducible(const Tensor<double>& T, const Tensor<double>& hbar) {
  const int n = hbar.dimension();
  const auto rows = static_cast<Eigen::Index>(T.size());
  Eigen::MatrixXd A(rows, n);
  Eigen::VectorXd b(rows);
  for (int k = 0; k < n; ++k) {
    std::vector<double> e(n, 0.0);
    e[k] = 1.0;
    const auto col = c_reducible_form(hbar, e);
    for (Eigen::Index r = 0; r < rows; ++r) A(r, k) = col[r];
  }
  for (Eigen::Index r = 0; r < rows; ++r) b(r) = T[r];
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  FormFit f;
  f.coefficients.assign(c.data(), c.data() + n);
  f.residual = (A * c - b).cwiseAbs().maxCoeff();
  f.scale = max_abs(T);
  return f;
}

FormFit fit_semi_c_reducible(const Tensor<double>& T, const Tensor<double>& hbar,
                             std::span<const double> C, double c2) {
  const int n = hbar.dimension();
  const auto ccc = ccc_over_c2(n, C, c2);
  const auto cyc = c_reducible_form(hbar, C);
  // T - CCC/C^2 = mu (cyc - CCC/C^2)
  Tensor<double> W = T, B = cyc;
  for (std::size_t k = 0; k < T.size(); ++k) {
    W[k] -= ccc[k];
    B[k] -= ccc[k];
  }
  const double bb = dot(B, B);
  const double mu = bb > 0.0 ? dot(W, B) / bb : 0.0;
  FormFit f;
  f.coefficients = {mu, 1.0 - mu};
  f.residual = defect(W, B, mu);
  f.scale = max_abs(T);
  return f;
}

FormFit check_c2_like(const Tensor<double>& T, std::span<const double> C, double c2) {
  FormFit f;
  f.residual = max_abs_diff(T, ccc_over_c2(T.dimension(), C, c2));
  f.scale = max_abs(T);
  return f;
}

FormFit check_quasi_c_reducible(const Tensor<double>& T, const Tensor<double>& A,
                                std::span<const double> C, std::span<const double> y) {
  const int n = T.dimension();
  FormFit f;
  f.scale = max_abs(T);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double form = A(i, j) * C[k] + A(j, k) * C[i] + A(k, i) * C[j];
        f.residual = std::max(f.residual, std::abs(T(i, j, k) - form));
      }
      f.residual = std::max(f.residual, std::abs(A(i, j) - A(j, i)));
    }
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += A(i, j) * y[j];
    f.residual = std::max(f.residual, std::abs(s));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Classification

namespace {

// Running max/min/mean of a fitted scalar.
struct Stat {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  int count = 0;
  void add(double v) {
    min = std::min(min, v);
    max = std::max(max, v);
    sum += v;
    ++count;
  }
  void into(std::vector<std::pair<std::string, double>>& out, const std::string& name) const {
    if (count == 0) return;
    out.emplace_back(name + "_min", min);
    out.emplace_back(name + "_max", max);
    out.emplace_back(name + "_mean", sum / count);
  }
};

struct Acc {
  double residual = 0.0;
  double scale = 0.0;
  void add(double r, double s) {
    residual = std::max(residual, r);
    scale = std::max(scale, s);
  }
};

Tensor<double> angular(const Tensor<double>& g, std::span<const double> y, double l2) {
  const int n = g.dimension();
  std::vector<double> l(n, 0.0);
  const double L = std::sqrt(l2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) l[i] += g(i, j) * y[j] / L;
  Tensor<double> h(n, {kDown, kDown});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = g(i, j) - l[i] * l[j];
  return h;
}

struct PointFits {
  double riemannian = 0.0, berwald = 0.0, landsberg = 0.0;
  double T_norm = 0.0, S_norm = 0.0, R_norm = 0.0, P_norm = 0.0;
  double c2 = 0.0;
  FormFit c2_like, c_red, semi, quasi;
  bool quasi_checked = false;
  double s3_residual = 0.0, s3_fit = 0.0, s3_scalar = 0.0;
  double p2_residual = 0.0, p2_y_variation = 0.0;
  std::vector<double> phi;
  double p_red_residual = 0.0, p_red_scale = 0.0;
  double k0 = 0.0, h_iso_residual = 0.0;
};

PointFits fit_point(const LocalGeometry& geo, const ClassifyOptions& opt) {
  const int n = geo.dimension();
  const auto& y = geo.at().y;
  const double l2 = geo.metric().energy.value();
  const auto g = values(geo.g());
  const auto ginv = values(geo.g_inv());
  const auto hbar = angular(g, y, l2);
  const JetTensor& Tj = geo.cartan_tensor();
  const auto T = values(Tj);
  PointFits f;
  f.T_norm = f.riemannian = max_abs(T);
  f.berwald = max_abs(values(geo.h_derivative(Tj)));

  // contracted torsion C_k = g^ij T_ijk, as jets for nabla C
  JetTensor Cj(n, {kDown});
  for (int k = 0; k < n; ++k) {
    MultiDual s(0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += geo.g_inv()(i, j) * Tj(i, j, k);
    Cj(k) = s;
  }
  std::vector<double> C(n);
  for (int k = 0; k < n; ++k) C[k] = Cj(k).value();
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) f.c2 += ginv(k, l) * C[k] * C[l];

  if (f.c2 > opt.c2_min) {
    f.c2_like = check_c2_like(T, C, f.c2);
    f.semi = fit_semi_c_reducible(T, hbar, C, f.c2);
  }
  f.c_red = fit_c_reducible(T, hbar);
  if (opt.A_tensor) {
    Tensor<double> A(n, {kDown, kDown});
    const auto coords = geo.at().coordinates();
    for (int i = 0; i < n * n; ++i) A[i] = (*opt.A_tensor)[i].evaluate<double>(coords);
    f.quasi = check_quasi_c_reducible(T, A, C, y);
    f.quasi_checked = true;
  }

  const CurvatureJets K(geo);
  const auto Phat = values(K.Phat);
  f.landsberg = max_abs(Phat);
  const auto Rm = values(K.R);
  const auto Sl = lower_last(values(K.S), g);
  f.R_norm = max_abs(Rm);
  f.S_norm = max_abs(Sl);
  const JetTensor Pj = lower_last(K.P, geo.g());
  const auto Pl = values(Pj);
  f.P_norm = max_abs(Pl);

  // h-isotropic: R(a,b,c,i) = k0 (g_ac d_bi - g_bc d_ai)
  {
    Tensor<double> B(n, {kDown, kDown, kDown, kUp});
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int i = 0; i < n; ++i)
            B(a, b, c, i) = (b == i ? g(a, c) : 0.0) - (a == i ? g(b, c) : 0.0);
    const double bb = dot(B, B);
    f.k0 = bb > 0.0 ? dot(Rm, B) / bb : 0.0;
    f.h_iso_residual = defect(Rm, B, f.k0);
  }

  // S3-like: S(a,b,c,w) = s (hbar_ac hbar_bw - hbar_aw hbar_bc)
  if (n >= 4) {
    Tensor<double> H(n, {kDown, kDown, kDown, kDown});
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int w = 0; w < n; ++w)
            H(a, b, c, w) = hbar(a, c) * hbar(b, w) - hbar(a, w) * hbar(b, c);
    const double hh = dot(H, H);
    f.s3_fit = hh > 0.0 ? dot(Sl, H) / hh : 0.0;
    const auto Sm = values(K.S);
    double sc = 0.0;
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) {
        double ric = 0.0;
        for (int b = 0; b < n; ++b) ric += Sm(a, b, c, b);
        sc += ginv(a, c) * ric;
      }
    f.s3_scalar = sc / ((n - 1.0) * (n - 2.0));
    f.s3_residual = std::max(defect(Sl, H, f.s3_fit), defect(Sl, H, f.s3_scalar));
  }

  if (n >= 3) {
    // P2-like: P(a,b,c,w) = phi_c T(a,b,w) - phi_w T(a,b,c), fitted on jets so
    // that the y-dependence of phi is available.
    std::vector<MultiDual> N(static_cast<std::size_t>(n) * n, MultiDual(0.0));
    std::vector<MultiDual> rhs(n, MultiDual(0.0));
    auto basis = [&](int k, int a, int b, int c, int w) {
      MultiDual v(0.0);
      if (c == k) v += Tj(a, b, w);
      if (w == k) v -= Tj(a, b, c);
      return v;
    };
    std::vector<MultiDual> Bk(n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int w = 0; w < n; ++w) {
            for (int k = 0; k < n; ++k) Bk[k] = basis(k, a, b, c, w);
            for (int k = 0; k < n; ++k) {
              rhs[k] += Bk[k] * Pj(a, b, c, w);
              for (int l = 0; l < n; ++l) N[k * n + l] += Bk[k] * Bk[l];
            }
          }
    f.phi.assign(n, 0.0);
    try {
      const auto inv = invert(N, n);
      std::vector<MultiDual> phi(n, MultiDual(0.0));
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) phi[k] += inv[k * n + l] * rhs[l];
      for (int k = 0; k < n; ++k) {
        f.phi[k] = phi[k].value();
        for (int j = 0; j < n; ++j)
          f.p2_y_variation = std::max(f.p2_y_variation, std::abs(geo.dot(phi[k], j).value()));
      }
    } catch (const SingularMatrixError&) {
      // T vanishes or is degenerate; phi stays 0 and the defect is |P|
    }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int w = 0; w < n; ++w) {
            const double form = f.phi[c] * T(a, b, w) - f.phi[w] * T(a, b, c);
            f.p2_residual = std::max(f.p2_residual, std::abs(Pl(a, b, c, w) - form));
          }

    // P-reducible: Phat(a,b,c) = d_a hbar_bc + d_b hbar_ac + d_c hbar_ab,
    // d = (nabla_{beta eta} C) / (n + 1)
    const auto hC = values(geo.h_derivative(Cj));
    std::vector<double> d(n, 0.0);
    for (int k = 0; k < n; ++k) {
      for (int z = 0; z < n; ++z) d[k] += hC(k, z) * y[z];
      d[k] /= (n + 1.0);
    }
    const auto Pl3 = lower_last(Phat, g);
    f.p_red_scale = max_abs(Pl3);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          const double form = d[a] * hbar(b, c) + d[b] * hbar(a, c) + d[c] * hbar(a, b);
          f.p_red_residual = std::max(f.p_red_residual, std::abs(Pl3(a, b, c) - form));
        }
  }
  return f;
}

PredicateResult make(const std::string& name, double residual, double scale, const Tolerance& tol) {
  PredicateResult p;
  p.name = name;
  p.residual = residual;
  p.scale = scale;
  p.bound = tol.bound(scale);
  p.verdict = tol.holds(residual, scale) ? Verdict::kPass : Verdict::kFail;
  return p;
}

PredicateResult gated(const std::string& name, const std::string& note) {
  PredicateResult p;
  p.name = name;
  p.verdict = Verdict::kNotApplicable;
  p.note = note;
  return p;
}

PredicateResult vacuous(const std::string& name, const Tolerance& tol) {
  PredicateResult p;
  p.name = name;
  p.bound = tol.bound(0.0);
  p.verdict = Verdict::kVacuous;
  p.note = "T vanishes identically";
  return p;
}

}  // namespace

ClassificationReport classify_special(const MetricModel& m, const std::vector<JetPoint>& corpus,
                                      const ClassifyOptions& opt) {
  if (corpus.empty()) throw std::invalid_argument("classify_special: empty corpus");
  const int n = m.dimension();
  if (opt.A_tensor && static_cast<int>(opt.A_tensor->size()) != n * n)
    throw std::invalid_argument("A_tensor needs n*n components");
  ClassificationReport r;
  r.metric = m.name();
  r.dimension = n;
  r.points = static_cast<int>(corpus.size());
  r.tol = opt.tol;

  Acc riem, berw, lands, c2like, cred, semi, quasi, s3, p2, pred, hiso;
  Stat k0, s3fit, s3sc, semi_mu, cred_c;
  double min_c2 = std::numeric_limits<double>::infinity();
  double p2_yvar = 0.0, p2_phi = 0.0;
  for (const auto& p : corpus) {
    const LocalGeometry geo(m, p, {.order = std::max(opt.order, 5)});
    const auto f = fit_point(geo, opt);
    riem.add(f.riemannian, 0.0);
    berw.add(f.berwald, 0.0);
    lands.add(f.landsberg, 0.0);
    r.max_abs_T = std::max(r.max_abs_T, f.T_norm);
    r.max_abs_S = std::max(r.max_abs_S, f.S_norm);
    r.max_abs_R = std::max(r.max_abs_R, f.R_norm);
    r.max_abs_P = std::max(r.max_abs_P, f.P_norm);
    min_c2 = std::min(min_c2, f.c2);
    if (f.c2 > opt.c2_min) {
      c2like.add(f.c2_like.residual, f.c2_like.scale);
      semi.add(f.semi.residual, f.semi.scale);
      semi_mu.add(f.semi.coefficients[0]);
    }
    cred.add(f.c_red.residual, f.c_red.scale);
    for (double c : f.c_red.coefficients) cred_c.add(c);
    if (f.quasi_checked) quasi.add(f.quasi.residual, f.quasi.scale);
    s3.add(f.s3_residual, f.S_norm);
    s3fit.add(f.s3_fit);
    s3sc.add(f.s3_scalar);
    p2.add(f.p2_residual, f.P_norm);
    p2_yvar = std::max(p2_yvar, f.p2_y_variation);
    for (double v : f.phi) p2_phi = std::max(p2_phi, std::abs(v));
    pred.add(f.p_red_residual, f.p_red_scale);
    hiso.add(f.h_iso_residual, f.R_norm);
    k0.add(f.k0);
    r.k0.push_back(f.k0);
    r.phi.push_back(f.phi);
  }

  const auto& tol = opt.tol;
  const bool t_zero = tol.holds(r.max_abs_T, 0.0);
  auto& out = r.predicates;
  out.push_back(make("riemannian", riem.residual, 0.0, tol));
  out.push_back(make("berwald", berw.residual, 0.0, tol));
  out.push_back(make("landsberg", lands.residual, 0.0, tol));

  // C2-like
  if (n < 2) {
    out.push_back(gated("C2-like", "needs dim >= 2"));
  } else if (t_zero) {
    out.push_back(vacuous("C2-like", tol));
  } else if (!(min_c2 > opt.c2_min)) {
    out.push_back(gated("C2-like", "C^2 below threshold"));
  } else {
    out.push_back(make("C2-like", c2like.residual, c2like.scale, tol));
  }

  // C-reducible
  if (n < 3) {
    out.push_back(gated("C-reducible", "needs dim >= 3"));
  } else if (t_zero) {
    out.push_back(vacuous("C-reducible", tol));
  } else {
    auto p = make("C-reducible", cred.residual, cred.scale, tol);
    cred_c.into(p.fitted, "c");
    out.push_back(std::move(p));
  }

  // semi-C-reducible
  if (n < 3) {
    out.push_back(gated("semi-C-reducible", "needs dim >= 3"));
  } else if (t_zero) {
    out.push_back(vacuous("semi-C-reducible", tol));
  } else if (!(min_c2 > opt.c2_min)) {
    out.push_back(gated("semi-C-reducible", "C^2 below threshold"));
  } else {
    auto p = make("semi-C-reducible", semi.residual, semi.scale, tol);
    semi_mu.into(p.fitted, "mu");
    out.push_back(std::move(p));
  }

  // quasi-C-reducible
  if (n < 3) {
    out.push_back(gated("quasi-C-reducible", "needs dim >= 3"));
  } else if (!opt.A_tensor) {
    out.push_back(gated("quasi-C-reducible", "needs a supplied A_tensor"));
  } else if (t_zero) {
    out.push_back(vacuous("quasi-C-reducible", tol));
  } else {
    out.push_back(make("quasi-C-reducible", quasi.residual, quasi.scale, tol));
  }

  // S3-like
  if (n < 4) {
    out.push_back(gated("S3-like", "needs dim >= 4"));
  } else {
    auto p = make("S3-like", s3.residual, s3.scale, tol);
    s3fit.into(p.fitted, "s");
    s3sc.into(p.fitted, "scv_over_n1n2");
    out.push_back(std::move(p));
  }

  // P2-like
  if (n < 3) {
    out.push_back(gated("P2-like", "needs dim >= 3"));
  } else if (t_zero) {
    out.push_back(vacuous("P2-like", tol));
  } else {
    auto p = make("P2-like", p2.residual, p2.scale, tol);
    p.fitted.emplace_back("phi_max_abs", p2_phi);
    p.fitted.emplace_back("phi_y_variation", p2_yvar);
    out.push_back(std::move(p));
  }

  // P-reducible
  if (n < 3) {
    out.push_back(gated("P-reducible", "needs dim >= 3"));
  } else if (t_zero) {
    out.push_back(vacuous("P-reducible", tol));
  } else {
    out.push_back(make("P-reducible", pred.residual, pred.scale, tol));
  }

  // h-isotropic
  if (n < 3) {
    out.push_back(gated("h-isotropic", "needs dim >= 3"));
  } else {
    auto p = make("h-isotropic", hiso.residual, hiso.scale, tol);
    k0.into(p.fitted, "k0");
    out.push_back(std::move(p));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Recurrence

std::string recurrence_name(TensorKind kind, Direction direction) {
  std::string s;
  switch (kind) {
    case TensorKind::kT: s = "T"; break;
    case TensorKind::kS: s = "S"; break;
    case TensorKind::kP: s = "P"; break;
    case TensorKind::kR: s = "R"; break;
  }
  return s + (direction == Direction::kHorizontal ? "^h" : "^v");
}

std::string RecurrenceResult::verdict() const {
  if (zero_tensor) return "trivially recurrent (zero tensor)";
  return recurrent ? "recurrent" : "not recurrent";
}

bool RecurrenceResult::holds(const Tolerance& tol) const {
  if (zero_tensor) return true;
  return tol.holds(residual, scale);
}

RecurrenceResult fit_recurrence(const MetricModel& m, const std::vector<JetPoint>& corpus,
                                TensorKind kind, Direction direction, const Tolerance& tol,
                                int order) {
  if (corpus.empty()) throw std::invalid_argument("fit_recurrence: empty corpus");
  RecurrenceResult r;
  r.name = recurrence_name(kind, direction);
  r.kind = kind;
  r.direction = direction;
  const int n = m.dimension();
  const int need = kind == TensorKind::kT ? 4 : 5;
  for (const auto& p : corpus) {
    const LocalGeometry geo(m, p, {.order = std::max(order, need)});
    JetTensor W;
    if (kind == TensorKind::kT) {
      W = geo.cartan_tensor();
    } else {
      const CurvatureJets K(geo);
      const JetTensor& mixed = kind == TensorKind::kS ? K.S : kind == TensorKind::kP ? K.P : K.R;
      W = lower_last(mixed, geo.g());
    }
    const auto dW = values(direction == Direction::kHorizontal ? geo.h_derivative(W)
                                                               : geo.v_derivative(W));
    const auto w = values(W);
    const double ww = dot(w, w);
    const double wmax = max_abs(w);
    r.tensor_norm = std::max(r.tensor_norm, wmax);
    r.scale = std::max(r.scale, max_abs(dW));
    // lambda_k = <dW(., k), W> / <W, W>
    std::vector<double> lambda(n, 0.0);
    if (ww > 0.0) {
      for (std::size_t f = 0; f < w.size(); ++f)
        for (int k = 0; k < n; ++k) lambda[k] += dW[f * n + k] * w[f];
      for (double& l : lambda) l /= ww;
    }
    for (std::size_t f = 0; f < w.size(); ++f)
      for (int k = 0; k < n; ++k)
        r.residual = std::max(r.residual, std::abs(dW[f * n + k] - lambda[k] * w[f]));
    r.lambda.push_back(std::move(lambda));
  }
  r.bound = tol.bound(r.scale);
  r.zero_tensor = tol.holds(r.tensor_norm, 0.0);
  r.recurrent = r.zero_tensor || tol.holds(r.residual, r.scale);
  return r;
}

// ---------------------------------------------------------------------------
// Harness

const RecurrenceResult& MetricEvidence::find(TensorKind k, Direction d) const {
  for (const auto& r : recurrence)
    if (r.kind == k && r.direction == d) return r;
  throw std::out_of_range("missing recurrence fit " + recurrence_name(k, d));
}

MetricEvidence gather_evidence(const MetricModel& m, const std::vector<JetPoint>& corpus,
                               const ClassifyOptions& options) {
  MetricEvidence e;
  e.classification = classify_special(m, corpus, options);
  for (auto k : {TensorKind::kT, TensorKind::kS, TensorKind::kP, TensorKind::kR})
    for (auto d : {Direction::kHorizontal, Direction::kVertical})
      e.recurrence.push_back(fit_recurrence(m, corpus, k, d, options.tol, options.order));
  return e;
}

namespace {

double lambda_on(const std::vector<double>& lambda, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t k = 0; k < lambda.size(); ++k) s += lambda[k] * v[k];
  return s;
}

// Builder for one harness instance.
class Instance {
 public:
  Instance(std::string theorem, const std::string& metric, const std::string& candidate) {
    h_.theorem = std::move(theorem);
    h_.metric = metric;
    h_.candidate = candidate;
  }

  Instance& hypothesis(const std::string& name, bool holds, bool trivially = false) {
    h_.hypotheses.emplace_back(name, holds);
    all_ = all_ && holds;
    if (holds && trivially) h_.trivial = true;
    return *this;
  }

  HarnessInstance conclude(const std::string& conclusion, bool holds, double residual = 0.0,
                           std::string note = {}) {
    h_.conclusion = conclusion;
    h_.conclusion_residual = residual;
    h_.note = std::move(note);
    if (!all_) {
      h_.status = InstanceStatus::kVacuous;
      h_.trivial = false;
    } else {
      h_.status = holds ? InstanceStatus::kSatisfied : InstanceStatus::kViolated;
    }
    return h_;
  }

 private:
  HarnessInstance h_;
  bool all_ = true;
};

}  // namespace

std::vector<HarnessInstance> harness_instances(const MetricModel& m,
                                               const std::vector<JetPoint>& corpus,
                                               const CandidateField& cand,
                                               const ConcircularReport& fit,
                                               const MetricEvidence& ev,
                                               const HarnessOptions& options,
                                               const std::optional<std::vector<Expression>>& A_tensor) {
  const int n = m.dimension();
  const Tolerance& tol = options.tol;
  const Tolerance hyp = tol.scaled(options.hypothesis_factor);
  const auto& cls = ev.classification;
  const auto& name = m.name();
  const auto& cname = cand.name;
  std::vector<HarnessInstance> out;

  const bool conc = fit.concircular_under(hyp);
  const bool concurrent = fit.concurrent_under(hyp);
  auto pred = [&](const std::string& p) -> const PredicateResult& { return cls.find(p); };
  auto hyp_pred = [&](Instance& in, const std::string& p) {
    const auto& r = pred(p);
    in.hypothesis(p, r.holds(hyp), r.verdict == Verdict::kVacuous);
  };
  auto hyp_rec = [&](Instance& in, TensorKind k, Direction d) -> const RecurrenceResult& {
    const auto& r = ev.find(k, d);
    in.hypothesis(r.name + "-recurrent", r.holds(hyp), r.zero_tensor);
    return r;
  };
  const bool riem = pred("riemannian").holds(tol);
  const bool berw = pred("berwald").holds(tol);
  const bool lands = pred("landsberg").holds(tol);
  const double riem_res = pred("riemannian").residual;
  const bool s_zero = tol.holds(cls.max_abs_S, 0.0);
  const bool r_zero = tol.holds(cls.max_abs_R, 0.0);
  const bool p_zero = tol.holds(cls.max_abs_P, 0.0);
  // |f| > floor at every point
  auto nonzero_everywhere = [&](auto&& f) {
    for (std::size_t i = 0; i < corpus.size(); ++i)
      if (!(std::abs(f(i)) > hyp.bound(0.0))) return false;
    return true;
  };
  auto lambda_zeta = [&](const RecurrenceResult& r) {
    return [&](std::size_t i) { return lambda_on(r.lambda[i], fit.data[i].zeta); };
  };
  const std::string tag = "concircular";

  {
    Instance in("landsberg with concircular field is riemannian", name, cname);
    in.hypothesis(tag, conc);
    hyp_pred(in, "landsberg");
    out.push_back(in.conclude("riemannian", riem, riem_res));
  }
  {
    Instance in("concircular field makes landsberg, berwald, riemannian coincide", name, cname);
    in.hypothesis(tag, conc);
    out.push_back(in.conclude("landsberg == berwald == riemannian", lands == berw && berw == riem,
                              riem_res));
  }
  if (n >= 3) {
    Instance in("quasi-C-reducible with concircular field is riemannian", name, cname);
    in.hypothesis(tag, conc);
    if (A_tensor) {
      ClassifyOptions co{.tol = tol, .c2_min = options.c2_min, .A_tensor = A_tensor};
      const auto q = classify_special(m, corpus, co).find("quasi-C-reducible");
      in.hypothesis("quasi-C-reducible", q.holds(hyp), q.verdict == Verdict::kVacuous);
      const bool azz = fit.data.size() == corpus.size() && nonzero_everywhere([&](std::size_t i) {
        const auto coords = corpus[i].coordinates();
        const auto& z = fit.data[i].zeta;
        double s = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) s += (*A_tensor)[a * n + b].evaluate<double>(coords) * z[a] * z[b];
        return s;
      });
      in.hypothesis("A(zeta, zeta) != 0", azz);
    } else {
      in.hypothesis("quasi-C-reducible", false);
    }
    out.push_back(in.conclude("riemannian", riem, riem_res, A_tensor ? "" : "no A_tensor supplied"));
  }
  if (n >= 3) {
    Instance in("C-reducible with concircular field is riemannian", name, cname);
    in.hypothesis(tag, conc);
    hyp_pred(in, "C-reducible");
    out.push_back(in.conclude("riemannian", riem, riem_res));
  }
  if (n >= 3) {
    Instance in("semi-C-reducible with concircular field is C2-like", name, cname);
    in.hypothesis(tag, conc);
    hyp_pred(in, "semi-C-reducible");
    const auto& c2 = pred("C2-like");
    out.push_back(in.conclude("C2-like", c2.holds(tol), c2.residual));
  }
  if (n >= 4) {
    Instance in("S3-like with concircular field has S = 0", name, cname);
    in.hypothesis(tag, conc);
    hyp_pred(in, "S3-like");
    out.push_back(in.conclude("S = 0", s_zero, cls.max_abs_S));
  }
  if (n >= 3) {
    Instance in("P2-like with concircular field is riemannian", name, cname);
    in.hypothesis(tag, conc);
    hyp_pred(in, "P2-like");
    const bool ok = conc && nonzero_everywhere([&](std::size_t i) {
      return lambda_on(cls.phi[i], fit.data[i].zeta) - fit.data[i].psi;
    });
    in.hypothesis("phi(zeta) != psi", ok);
    out.push_back(in.conclude("riemannian", riem, riem_res));
  }
  if (n >= 3) {
    Instance in("P-reducible with concircular field is landsberg", name, cname);
    in.hypothesis(tag, conc);
    hyp_pred(in, "P-reducible");
    out.push_back(in.conclude("landsberg", lands, pred("landsberg").residual));
  }
  if (n >= 3) {
    Instance in("h-isotropic with concircular field has k0 = -A(m)/g(m, zeta)", name, cname);
    in.hypothesis(tag, conc);
    hyp_pred(in, "h-isotropic");
    double worst = 0.0;
    bool ok = true;
    int used = 0;
    if (conc) {
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& d = fit.data[i];
        const auto g = values(MetricJets(m, corpus[i], 2).g);
        double gmz = 0.0, Am = 0.0, gzz = 0.0;
        for (int a = 0; a < n; ++a) {
          Am += d.A_form[a] * d.m_field[a];
          for (int b = 0; b < n; ++b) {
            gmz += g(a, b) * d.m_field[a] * d.zeta[b];
            gzz += g(a, b) * d.zeta[a] * d.zeta[b];
          }
        }
        // skip points where zeta is nearly parallel to eta
        if (std::abs(gmz) < 1e-6 * std::max(1.0, gzz)) continue;
        ++used;
        const double k0 = -Am / gmz;
        const double e = std::abs(cls.k0[i] - k0);
        worst = std::max(worst, e);
        ok = ok && tol.holds(e, std::max(std::abs(k0), std::abs(cls.k0[i])));
      }
    }
    out.push_back(in.conclude("fitted k0 equals -A(m)/g(m, zeta)", ok && (used > 0 || !conc), worst,
                              "compared at " + std::to_string(used) + " points"));
  }
  if (n >= 3) {
    Instance in("h-isotropic with concurrent field has R = 0", name, cname);
    in.hypothesis("concurrent", concurrent);
    hyp_pred(in, "h-isotropic");
    out.push_back(in.conclude("R = 0", r_zero, cls.max_abs_R));
  }

  const auto& Th = ev.find(TensorKind::kT, Direction::kHorizontal);
  const auto& Tv = ev.find(TensorKind::kT, Direction::kVertical);
  const auto& Sh = ev.find(TensorKind::kS, Direction::kHorizontal);
  const auto& Sv = ev.find(TensorKind::kS, Direction::kVertical);
  const auto& Ph = ev.find(TensorKind::kP, Direction::kHorizontal);
  const auto& Pv = ev.find(TensorKind::kP, Direction::kVertical);
  const auto& Rh = ev.find(TensorKind::kR, Direction::kHorizontal);
  const auto& Rv = ev.find(TensorKind::kR, Direction::kVertical);
  const bool have = conc && fit.data.size() == corpus.size();

  {
    Instance in("T^h-recurrent with concircular field is riemannian", name, cname);
    in.hypothesis(tag, conc);
    hyp_rec(in, TensorKind::kT, Direction::kHorizontal);
    in.hypothesis("lambda1(zeta) != 0", have && !Th.zero_tensor && nonzero_everywhere(lambda_zeta(Th)));
    out.push_back(in.conclude("riemannian", riem, riem_res));
  }
  {
    Instance in("concircular field makes T^h-, T^v-recurrence and riemannian coincide", name, cname);
    in.hypothesis(tag, conc);
    const bool lam = !Th.zero_tensor && have && nonzero_everywhere(lambda_zeta(Th));
    // T^v-recurrence always forces riemannian; T^h-recurrence does when lambda1(zeta) != 0
    const bool ok = (Tv.holds(tol) == riem) && (!riem || Th.holds(tol)) &&
                    (!(lam && Th.holds(tol)) || riem);
    out.push_back(in.conclude("T^h-recurrent (lambda1(zeta) != 0) <=> T^v-recurrent <=> riemannian",
                              ok, Tv.residual));
  }
  {
    Instance in("S^h-recurrent with concircular field has S = 0", name, cname);
    in.hypothesis(tag, conc);
    hyp_rec(in, TensorKind::kS, Direction::kHorizontal);
    out.push_back(in.conclude("S = 0", s_zero, cls.max_abs_S));
  }
  {
    Instance in("concircular field makes S^h-, S^v-recurrence and S = 0 coincide", name, cname);
    in.hypothesis(tag, conc);
    const bool ok = Sh.holds(tol) == s_zero && Sv.holds(tol) == s_zero;
    out.push_back(in.conclude("S^h-recurrent <=> S^v-recurrent <=> S = 0", ok, cls.max_abs_S));
  }
  {
    Instance in("P^h-recurrent with concircular field is riemannian or (A - psi lambda1)(eta) = 0",
                name, cname);
    in.hypothesis(tag, conc);
    hyp_rec(in, TensorKind::kP, Direction::kHorizontal);
    double worst = 0.0;
    if (have)
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& d = fit.data[i];
        const auto& y = corpus[i].y;
        double v = 0.0;
        for (int k = 0; k < n; ++k) v += (d.A_form[k] - d.psi * Ph.lambda[i][k]) * y[k];
        worst = std::max(worst, std::abs(v));
      }
    out.push_back(in.conclude("riemannian or (A - psi lambda1)(eta) = 0",
                              riem || tol.holds(worst, 1.0), riem ? riem_res : worst));
  }
  {
    Instance in("P^v-recurrent has P = 0", name, cname);
    hyp_rec(in, TensorKind::kP, Direction::kVertical);
    out.push_back(in.conclude("P = 0", p_zero, cls.max_abs_P));
  }
  {
    Instance in("concircular field makes P^v-recurrence and riemannian coincide", name, cname);
    in.hypothesis(tag, conc);
    out.push_back(in.conclude("P^v-recurrent <=> riemannian", Pv.holds(tol) == riem, Pv.residual));
  }
  if (n >= 3) {
    Instance in("R^h-recurrent with concircular field is h-isotropic with k0 = trace(phi)/n", name,
                cname);
    in.hypothesis(tag, conc);
    hyp_rec(in, TensorKind::kR, Direction::kHorizontal);
    const auto& hi = pred("h-isotropic");
    bool ok = hi.holds(tol);
    double worst = 0.0;
    if (have)
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& d = fit.data[i];
        const auto ginv = values(MetricJets(m, corpus[i], 2).g_inv);
        // psi phi(X, Y) = alpha(Y) A(X) + lambda1(Y) A(X) - (nabla_{beta Y} A)(X)
        double phi0 = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            const double phi =
                ((d.alpha[b] + Rh.lambda[i][b]) * d.A_form[a] - d.grad_A(a, b)) / d.psi;
            phi0 += ginv(a, b) * phi;
          }
        const double e = std::abs(cls.k0[i] - phi0 / n);
        worst = std::max(worst, e);
        ok = ok && tol.holds(e, std::abs(cls.k0[i]));
      }
    out.push_back(in.conclude("h-isotropic with k0 = trace(phi)/n", ok, worst));
  }
  {
    Instance in("R^v-recurrent with lambda2(eta) != 0 has R = 0", name, cname);
    hyp_rec(in, TensorKind::kR, Direction::kVertical);
    const bool lam = !Rv.zero_tensor && nonzero_everywhere([&](std::size_t i) {
      return lambda_on(Rv.lambda[i], corpus[i].y);
    });
    in.hypothesis("lambda2(eta) != 0", lam);
    out.push_back(in.conclude("R = 0", r_zero, cls.max_abs_R));
  }
  {
    Instance in("R^h-recurrent with concurrent field has R = 0", name, cname);
    in.hypothesis("concurrent", concurrent);
    hyp_rec(in, TensorKind::kR, Direction::kHorizontal);
    out.push_back(in.conclude("R = 0", r_zero, cls.max_abs_R));
  }
  return out;
}

HarnessReport theorem_harness(const std::vector<HarnessPair>& pairs, const HarnessOptions& options) {
  HarnessReport rep;
  std::map<std::pair<const MetricModel*, const std::vector<JetPoint>*>, MetricEvidence> cache;
  for (const auto& pair : pairs) {
    if (!pair.metric || !pair.corpus || !pair.candidate)
      throw std::invalid_argument("theorem_harness: incomplete pair");
    const auto key = std::make_pair(pair.metric, pair.corpus);
    auto it = cache.find(key);
    if (it == cache.end()) {
      ClassifyOptions co;
      co.tol = options.tol;
      co.c2_min = options.c2_min;
      it = cache.emplace(key, gather_evidence(*pair.metric, *pair.corpus, co)).first;
    }
    const auto fit = fit_and_verify(*pair.metric, *pair.candidate, *pair.corpus,
                                    {.tol = options.tol, .psi_min = options.psi_min});
    auto inst = harness_instances(*pair.metric, *pair.corpus, *pair.candidate, fit, it->second,
                                  options, pair.A_tensor);
    for (auto& i : inst) rep.instances.push_back(std::move(i));
  }
  for (const auto& i : rep.instances) {
    switch (i.status) {
      case InstanceStatus::kSatisfied:
        ++rep.satisfied;
        if (!i.trivial) ++rep.satisfied_nontrivial;
        break;
      case InstanceStatus::kViolated: ++rep.violated; break;
      case InstanceStatus::kVacuous: ++rep.vacuous; break;
    }
  }
  return rep;
}

}  // namespace finsler
