#include "finsler/metric.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

#include "finsler/error.hpp"
#include "finsler/linalg.hpp"

namespace finsler {
namespace {

void require_size(const std::vector<Expression>& v, std::size_t count, int n, const char* what) {
  if (v.size() != count)
    throw std::invalid_argument(std::string(what) + ": wrong number of components");
  for (const auto& e : v) {
    if (e.dimension() != n)
      throw std::invalid_argument(std::string(what) + ": component dimension mismatch");
    if (e.depends_on_y())
      throw std::invalid_argument(std::string(what) + ": component '" + e.text() +
                                  "' must not depend on y");
  }
}

Eigen::MatrixXd to_matrix(const Tensor<double>& t) {
  const int n = t.dimension();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = t(i, j);
  return m;
}

Eigen::MatrixXd evaluate_matrix(const std::vector<Expression>& a, int n, const JetPoint& p) {
  const auto c = p.coordinates();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = a[i * n + j].evaluate<double>(std::span<const double>(c));
  return m;
}

void check_positive_definite(const Eigen::MatrixXd& m, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().cwiseAbs().maxCoeff();
  if (!(lo > 1e-12 * std::max(1.0, hi)))
    throw AdmissibilityError(what + " is not positive definite (min eigenvalue " +
                             std::to_string(lo) + ")");
}

}  // namespace

MetricModel::MetricModel(int n, MetricFamily family) : n_(n), family_(std::move(family)) {
  if (n < 2) throw std::invalid_argument("MetricModel: dimension must be >= 2");
  box_.assign(n, {-0.5, 0.5});
}

MetricModel MetricModel::euclidean(int n) { return {n, EuclideanFamily{}}; }

MetricModel MetricModel::riemannian(int n, std::vector<Expression> a) {
  require_size(a, static_cast<std::size_t>(n) * n, n, "riemannian a_ij");
  return {n, RiemannianFamily{std::move(a)}};
}

MetricModel MetricModel::randers(int n, std::vector<Expression> a, std::vector<Expression> b) {
  require_size(a, static_cast<std::size_t>(n) * n, n, "randers a_ij");
  require_size(b, static_cast<std::size_t>(n), n, "randers b_i");
  return {n, RandersFamily{std::move(a), std::move(b)}};
}

MetricModel MetricModel::from_expression(int n, Expression finsler_function) {
  if (finsler_function.dimension() != n)
    throw std::invalid_argument("expression metric: dimension mismatch");
  return {n, ExpressionFamily{std::move(finsler_function)}};
}

MetricModel& MetricModel::set_x_box(Box box) {
  if (static_cast<int>(box.size()) != n_)
    throw std::invalid_argument("MetricModel: box must have one interval per coordinate");
  for (const auto& [lo, hi] : box)
    if (!(lo <= hi)) throw std::invalid_argument("MetricModel: empty box interval");
  box_ = std::move(box);
  return *this;
}

std::string MetricModel::family_name() const {
  return std::visit(
      [](const auto& f) -> std::string {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, EuclideanFamily>) return "euclidean";
        if constexpr (std::is_same_v<F, RiemannianFamily>) return "riemannian";
        if constexpr (std::is_same_v<F, RandersFamily>) return "randers";
        return "expression";
      },
      family_);
}

double MetricModel::finsler_function(const JetPoint& p) const {
  const auto c = p.coordinates();
  const std::span<const double> v(c);
  if (const auto* f = std::get_if<ExpressionFamily>(&family_))
    return f->finsler_function.evaluate<double>(v);
  if (const auto* f = std::get_if<RandersFamily>(&family_)) {
    // L itself, not sqrt(L^2): the sign of alpha + beta matters here.
    double aa = 0.0, beta = 0.0;
    for (int i = 0; i < n_; ++i) {
      beta += f->b[i].evaluate<double>(v) * p.y[i];
      for (int j = 0; j < n_; ++j) aa += f->a[i * n_ + j].evaluate<double>(v) * p.y[i] * p.y[j];
    }
    if (!(aa > 0.0)) throw DomainError("randers: a(y, y) is not positive");
    return std::sqrt(aa) + beta;
  }
  return std::sqrt(energy<double>(p.x, p.y));
}

ScalarField MetricModel::energy_field() const {
  auto self = std::make_shared<const MetricModel>(*this);
  ScalarField f;
  f.n = n_;
  f.evaluate = [self](std::span<const double> v) {
    const int n = self->dimension();
    return self->energy<double>(v.first(n), v.subspan(n));
  };
  f.evaluate_jet = [self](std::span<const MultiDual> v) {
    const int n = self->dimension();
    return self->energy<MultiDual>(v.first(n), v.subspan(n));
  };
  return f;
}

void MetricModel::check_admissible(const JetPoint& p) const {
  if (p.dimension() != n_ || static_cast<int>(p.y.size()) != n_)
    throw AdmissibilityError("point dimension does not match metric dimension");
  double ynorm = 0.0;
  for (double v : p.y) ynorm = std::max(ynorm, std::abs(v));
  if (ynorm == 0.0) throw AdmissibilityError("direction y is zero");
  for (double v : p.coordinates())
    if (!std::isfinite(v)) throw AdmissibilityError("non-finite coordinate");

  if (const auto* r = std::get_if<RiemannianFamily>(&family_)) {
    const auto a = evaluate_matrix(r->a, n_, p);
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()))
      throw AdmissibilityError("a_ij is not symmetric");
    check_positive_definite(a, "a_ij");
  }
  if (const auto* r = std::get_if<RandersFamily>(&family_)) {
    const auto a = evaluate_matrix(r->a, n_, p);
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()))
      throw AdmissibilityError("a_ij is not symmetric");
    check_positive_definite(a, "a_ij");
    const auto c = p.coordinates();
    Eigen::VectorXd b(n_);
    for (int i = 0; i < n_; ++i) b(i) = r->b[i].evaluate<double>(std::span<const double>(c));
    const double norm2 = b.dot(a.ldlt().solve(b));
    if (!(norm2 < 1.0))
      throw AdmissibilityError("randers: ||b||_a = " + std::to_string(std::sqrt(norm2)) +
                               " is not < 1");
  }

  const double l = finsler_function(p);
  if (!(l > 0.0) || !std::isfinite(l))
    throw AdmissibilityError("L(x, y) = " + std::to_string(l) + " is not positive");
  const auto g = fundamental_tensor(*this, p);
  check_positive_definite(to_matrix(g.components), "fundamental tensor g");
}

MetricJets::MetricJets(const MetricModel& m, const JetPoint& p, int order_)
    : n(m.dimension()), order(order_), at(p) {
  if (order < 2) throw std::invalid_argument("MetricJets: order must be >= 2");
  if (p.dimension() != n || static_cast<int>(p.y.size()) != n)
    throw std::invalid_argument("MetricJets: point dimension mismatch");
  const auto coords = p.coordinates();
  vars = seed_variables(coords, order);
  const std::span<const MultiDual> all(vars);
  energy = m.energy<MultiDual>(all.first(n), all.subspan(n));
  if (!(energy.value() > 0.0)) throw AdmissibilityError("L^2 is not positive");
  finsler = sqrt(energy);

  g = JetTensor(n, {kDown, kDown});
  std::vector<MultiDual> dE(n);
  for (int i = 0; i < n; ++i) dE[i] = dy(energy, i);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      g(i, j) = 0.5 * dy(dE[i], j);
      g(j, i) = g(i, j);
    }
  std::vector<MultiDual> flat(g.data().begin(), g.data().end());
  std::vector<MultiDual> inv;
  try {
    inv = invert(std::move(flat), n);
  } catch (const SingularMatrixError&) {
    throw AdmissibilityError("fundamental tensor g is singular");
  }
  g_inv = JetTensor(n, {kUp, kUp});
  for (std::size_t k = 0; k < inv.size(); ++k) g_inv[k] = inv[k];
  // Symmetrize: elimination order makes g^ij and g^ji differ in the last bit.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const MultiDual s = 0.5 * (g_inv(i, j) + g_inv(j, i));
      g_inv(i, j) = s;
      g_inv(j, i) = s;
    }

  if (order >= 3) {
    cartan = JetTensor(n, {kDown, kDown, kDown});
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k) {
          const MultiDual t = 0.5 * dy(g(i, j), k);
          cartan(i, j, k) = t;
          cartan(i, k, j) = t;
          cartan(j, i, k) = t;
          cartan(j, k, i) = t;
          cartan(k, i, j) = t;
          cartan(k, j, i) = t;
        }
  }
}

PointTensor fundamental_tensor(const MetricModel& m, const JetPoint& p) {
  MetricJets jets(m, p, 2);
  PointTensor t{values(jets.g), p, {{0, 1, false}}};
  t.check_symmetries();
  return t;
}

PointTensor normalized_supporting_form(const MetricModel& m, const JetPoint& p) {
  MetricJets jets(m, p, 2);
  const int n = jets.n;
  const double l = jets.finsler.value();
  Tensor<double> ell(n, {kDown});
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += jets.g(i, j).value() * p.y[j];
    ell(i) = s / l;
  }
  return {ell, p, {}};
}

PointTensor angular_metric(const MetricModel& m, const JetPoint& p) {
  const auto g = fundamental_tensor(m, p);
  const auto ell = normalized_supporting_form(m, p);
  const int n = m.dimension();
  Tensor<double> h(n, {kDown, kDown});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = g.components(i, j) - ell.components(i) * ell.components(j);
  PointTensor t{h, p, {{0, 1, false}}};
  t.check_symmetries();
  return t;
}

PointTensor cartan_tensor(const MetricModel& m, const JetPoint& p) {
  MetricJets jets(m, p, 3);
  PointTensor t{values(jets.cartan), p, {{0, 1, false}, {1, 2, false}}};
  t.check_symmetries();
  return t;
}

ContractedTorsion contracted_torsion(const MetricModel& m, const JetPoint& p) {
  MetricJets jets(m, p, 3);
  const int n = jets.n;
  const auto ginv = values(jets.g_inv);
  const auto t = values(jets.cartan);
  Tensor<double> c(n, {kDown}), cbar(n, {kUp});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) c(i) += ginv(j, k) * t(i, j, k);
  double c2 = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) cbar(i) += ginv(i, j) * c(j);
    c2 += c(i) * cbar(i);
  }
  return {{c, p, {}}, {cbar, p, {}}, std::max(0.0, c2)};
}

std::vector<JetPoint> sample_corpus(const MetricModel& m, const SamplingSpec& spec) {
  if (spec.count < 0) throw std::invalid_argument("sample_corpus: negative count");
  const int n = m.dimension();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<JetPoint> corpus;
  corpus.reserve(spec.count);
  for (int k = 0; k < spec.count; ++k) {
    bool found = false;
    std::string last_error;
    for (int attempt = 0; attempt <= spec.max_retries && !found; ++attempt) {
      JetPoint p;
      p.x.resize(n);
      p.y.resize(n);
      for (int i = 0; i < n; ++i) {
        const auto [lo, hi] = m.x_box()[i];
        std::uniform_real_distribution<double> u(lo, hi);
        p.x[i] = u(rng);
      }
      double norm = 0.0;
      for (int i = 0; i < n; ++i) {
        p.y[i] = normal(rng);
        norm += p.y[i] * p.y[i];
      }
      norm = std::sqrt(norm);
      if (norm < 1e-8) continue;
      for (auto& v : p.y) v /= norm;
      try {
        const double l = m.finsler_function(p);
        if (!(l > 0.0) || !std::isfinite(l)) throw AdmissibilityError("L is not positive");
        for (auto& v : p.y) v /= l;
        m.check_admissible(p);
        corpus.push_back(std::move(p));
        found = true;
      } catch (const AdmissibilityError& e) {
        last_error = e.what();
      } catch (const DomainError& e) {
        last_error = e.what();
      }
    }
    if (!found)
      throw AdmissibilityError("could not sample an admissible point for metric '" + m.name() +
                               "' after " + std::to_string(spec.max_retries) +
                               " retries: " + last_error);
  }
  return corpus;
}

std::vector<std::pair<std::string, std::string>> metric_families() {
  return {
      {"euclidean", "L = |y|; flat reference metric"},
      {"riemannian", "L = sqrt(a_ij(x) y^i y^j) with a symmetric positive-definite a(x)"},
      {"randers", "L = sqrt(a_ij(x) y^i y^j) + b_i(x) y^i with ||b||_a < 1"},
      {"expression", "L(x, y) given as a positively 1-homogeneous expression"},
  };
}

}  // namespace finsler
