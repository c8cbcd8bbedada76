#include "finsler/multidual.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "finsler/error.hpp"

namespace finsler {
namespace {

constexpr std::uint32_t kNoIndex = std::numeric_limits<std::uint32_t>::max();

std::uint64_t encode(std::span<const std::uint8_t> e) {
  std::uint64_t key = 0;
  for (auto v : e) key = (key << 3) | v;
  return key;
}

std::uint64_t encode(std::span<const int> e) {
  std::uint64_t key = 0;
  for (auto v : e) key = (key << 3) | static_cast<std::uint64_t>(v);
  return key;
}

// Appends all exponent vectors of total degree `degree` in lexicographic order.
void enumerate_degree(int nvars, int degree, std::vector<std::uint8_t>& out) {
  std::vector<std::uint8_t> current(nvars, 0);
  auto recurse = [&](auto&& self, int var, int remaining) -> void {
    if (var == nvars - 1) {
      current[var] = static_cast<std::uint8_t>(remaining);
      out.insert(out.end(), current.begin(), current.end());
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      current[var] = static_cast<std::uint8_t>(k);
      self(self, var + 1, remaining - k);
    }
  };
  recurse(recurse, 0, degree);
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

JetSpace::JetSpace(int nvars, int max_order) : nvars_(nvars), max_order_(max_order) {
  if (nvars < 1 || nvars > kMaxVars)
    throw std::invalid_argument("JetSpace: variable count out of range");
  if (max_order < 0 || max_order > kMaxOrder)
    throw std::invalid_argument("JetSpace: order out of range");

  for (int d = 0; d <= max_order; ++d) {
    enumerate_degree(nvars, d, exponents_);
    size_by_order_.push_back(exponents_.size() / nvars);
  }
  const std::size_t count = size_by_order_.back();
  degree_.resize(count);
  std::unordered_map<std::uint64_t, std::uint32_t> lookup;
  lookup.reserve(count * 2);
  for (std::size_t m = 0; m < count; ++m) {
    int deg = 0;
    for (auto v : exponents(m)) deg += v;
    degree_[m] = deg;
    lookup.emplace(encode(exponents(m)), static_cast<std::uint32_t>(m));
  }

  raise_.assign(count * nvars, kNoIndex);
  std::vector<std::uint8_t> tmp(nvars);
  for (std::size_t m = 0; m < count; ++m) {
    if (degree_[m] >= max_order) continue;
    for (int v = 0; v < nvars; ++v) {
      auto e = exponents(m);
      std::copy(e.begin(), e.end(), tmp.begin());
      ++tmp[v];
      raise_[m * nvars + v] = lookup.at(encode(tmp));
    }
  }

  for (int dc = 0; dc <= max_order; ++dc) {
    for (int da = 0; da <= dc; ++da) {
      const int db = dc - da;
      const std::size_t a_begin = da == 0 ? 0 : size_by_order_[da - 1];
      const std::size_t b_begin = db == 0 ? 0 : size_by_order_[db - 1];
      for (std::size_t a = a_begin; a < size_by_order_[da]; ++a) {
        for (std::size_t b = b_begin; b < size_by_order_[db]; ++b) {
          auto ea = exponents(a);
          auto eb = exponents(b);
          for (int v = 0; v < nvars; ++v) tmp[v] = ea[v] + eb[v];
          triples_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                              lookup.at(encode(tmp))});
        }
      }
    }
    triple_count_by_order_.push_back(triples_.size());
  }
}

std::shared_ptr<const JetSpace> JetSpace::get(int nvars, int max_order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{nvars, max_order}];
  if (!slot) slot = std::make_shared<const JetSpace>(nvars, max_order);
  return slot;
}

long JetSpace::index_of(std::span<const int> e) const {
  if (static_cast<int>(e.size()) != nvars_)
    throw std::invalid_argument("JetSpace::index_of: wrong exponent count");
  int deg = 0;
  for (int v : e) {
    if (v < 0) throw std::invalid_argument("JetSpace::index_of: negative exponent");
    deg += v;
  }
  if (deg > max_order_) return -1;
  // Linear scan inside the degree block; blocks are small.
  const std::size_t begin = deg == 0 ? 0 : size_by_order_[deg - 1];
  const std::uint64_t key = encode(e);
  for (std::size_t m = begin; m < size_by_order_[deg]; ++m)
    if (encode(exponents(m)) == key) return static_cast<long>(m);
  return -1;
}

MultiDual MultiDual::constant(std::shared_ptr<const JetSpace> space, int order,
                              double value) {
  if (order > space->max_order())
    throw std::invalid_argument("MultiDual: order exceeds space");
  MultiDual r;
  r.order_ = order;
  r.coeffs_.assign(space->size(order), 0.0);
  r.coeffs_[0] = value;
  r.space_ = std::move(space);
  return r;
}

MultiDual MultiDual::variable(std::shared_ptr<const JetSpace> space, int order, int var,
                              double value) {
  if (var < 0 || var >= space->nvars())
    throw std::invalid_argument("MultiDual: variable index out of range");
  MultiDual r = constant(std::move(space), order, value);
  if (order >= 1) r.coeffs_[1 + var] = 1.0;  // degree-1 block is e_0..e_{n-1}
  return r;
}

double MultiDual::partial(std::span<const int> vars) const {
  if (!space_) return vars.empty() ? coeffs_[0] : 0.0;
  std::vector<int> e(space_->nvars(), 0);
  for (int v : vars) {
    if (v < 0 || v >= space_->nvars())
      throw std::invalid_argument("MultiDual::partial: variable index out of range");
    ++e[v];
  }
  if (static_cast<int>(vars.size()) > order_)
    throw std::logic_error("MultiDual::partial: derivative order exceeds truncation order");
  const long idx = space_->index_of(e);
  double scale = 1.0;
  for (int k : e) scale *= factorial(k);
  return coeffs_[idx] * scale;
}

MultiDual MultiDual::derivative(int var) const {
  if (!space_) return MultiDual(0.0);
  if (order_ == 0)
    throw std::logic_error("MultiDual::derivative: truncation order exhausted");
  MultiDual r;
  r.space_ = space_;
  r.order_ = order_ - 1;
  const std::size_t count = space_->size(r.order_);
  r.coeffs_.resize(count);
  for (std::size_t m = 0; m < count; ++m) {
    const auto up = space_->raise(m, var);
    r.coeffs_[m] = (space_->exponents(m)[var] + 1) * coeffs_[up];
  }
  return r;
}

MultiDual MultiDual::truncated(int order) const {
  if (!space_ || order >= order_) return *this;
  MultiDual r = *this;
  r.order_ = order;
  r.coeffs_.resize(space_->size(order));
  return r;
}

void MultiDual::promote(const std::shared_ptr<const JetSpace>& space, int order) {
  const double v = coeffs_[0];
  space_ = space;
  order_ = order;
  coeffs_.assign(space->size(order), 0.0);
  coeffs_[0] = v;
}

int MultiDual::common_order(const MultiDual& a, const MultiDual& b) {
  if (a.space_ && b.space_ && a.space_ != b.space_ &&
      a.space_->nvars() != b.space_->nvars())
    throw std::invalid_argument("MultiDual: operands live in different jet spaces");
  return std::min(a.order(), b.order());
}

MultiDual& MultiDual::operator+=(const MultiDual& o) {
  if (!o.space_) {
    coeffs_[0] += o.coeffs_[0];
    return *this;
  }
  if (!space_) promote(o.space_, o.order_);
  const int r = common_order(*this, o);
  if (r < order_) *this = truncated(r);
  for (std::size_t m = 0; m < coeffs_.size(); ++m) coeffs_[m] += o.coeffs_[m];
  return *this;
}

MultiDual& MultiDual::operator-=(const MultiDual& o) {
  if (!o.space_) {
    coeffs_[0] -= o.coeffs_[0];
    return *this;
  }
  if (!space_) promote(o.space_, o.order_);
  const int r = common_order(*this, o);
  if (r < order_) *this = truncated(r);
  for (std::size_t m = 0; m < coeffs_.size(); ++m) coeffs_[m] -= o.coeffs_[m];
  return *this;
}

MultiDual& MultiDual::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

MultiDual& MultiDual::operator*=(const MultiDual& o) { return *this = *this * o; }
MultiDual& MultiDual::operator/=(const MultiDual& o) { return *this = *this / o; }

MultiDual MultiDual::operator-() const {
  MultiDual r = *this;
  for (auto& c : r.coeffs_) c = -c;
  return r;
}

MultiDual operator*(const MultiDual& a, const MultiDual& b) {
  if (!a.space_) return b * a.coeffs_[0];
  if (!b.space_) return a * b.coeffs_[0];
  const int r = MultiDual::common_order(a, b);
  MultiDual out;
  out.space_ = a.space_;
  out.order_ = r;
  out.coeffs_.assign(a.space_->size(r), 0.0);
  const double* ca = a.coeffs_.data();
  const double* cb = b.coeffs_.data();
  double* cc = out.coeffs_.data();
  for (const auto& t : a.space_->products(r)) cc[t.c] += ca[t.a] * cb[t.b];
  return out;
}

MultiDual MultiDual::compose(std::span<const double> derivs) const {
  if (!space_) return MultiDual(derivs[0]);
  if (static_cast<int>(derivs.size()) < order_ + 1)
    throw std::invalid_argument("MultiDual::compose: not enough derivatives");
  MultiDual h = *this;
  h.coeffs_[0] = 0.0;
  MultiDual result = constant(space_, order_, derivs[0]);
  MultiDual power = h;
  for (int k = 1; k <= order_; ++k) {
    if (k > 1) power = power * h;
    const double scale = derivs[k] / factorial(k);
    for (std::size_t m = 0; m < result.coeffs_.size(); ++m)
      result.coeffs_[m] += scale * power.coeffs_[m];
  }
  return result;
}

namespace {

std::vector<double> power_derivatives(double v, double p, int order) {
  std::vector<double> d(order + 1);
  double falling = 1.0;
  for (int k = 0; k <= order; ++k) {
    d[k] = falling * std::pow(v, p - k);
    falling *= (p - k);
  }
  return d;
}

int needed(const MultiDual& a) { return a.is_constant() ? 0 : a.order(); }

}  // namespace

MultiDual operator/(const MultiDual& a, const MultiDual& b) {
  const double v = b.value();
  if (v == 0.0 || !std::isfinite(v)) throw DomainError("division by zero");
  if (b.is_constant()) return a * (1.0 / v);
  return a * b.compose(power_derivatives(v, -1.0, b.order()));
}

MultiDual operator/(double a, const MultiDual& b) { return MultiDual(a) / b; }

MultiDual sqrt(const MultiDual& a) {
  const double v = a.value();
  if (!(v > 0.0)) {
    if (a.is_constant() && v == 0.0) return MultiDual(0.0);
    throw DomainError(v == 0.0 ? "sqrt at zero is not differentiable"
                               : "sqrt of negative value");
  }
  return a.compose(power_derivatives(v, 0.5, needed(a)));
}

MultiDual pow(const MultiDual& a, double exponent) {
  if (exponent == std::floor(exponent) && std::abs(exponent) <= 64)
    return ipow(a, static_cast<int>(exponent));
  const double v = a.value();
  if (!(v > 0.0)) throw DomainError("non-integer power of non-positive value");
  return a.compose(power_derivatives(v, exponent, needed(a)));
}

MultiDual ipow(const MultiDual& a, int exponent) {
  if (exponent < 0) return 1.0 / ipow(a, -exponent);
  MultiDual result(1.0);
  MultiDual base = a;
  while (exponent > 0) {
    if (exponent & 1) result = result * base;
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}

MultiDual exp(const MultiDual& a) {
  const double e = std::exp(a.value());
  if (!std::isfinite(e)) throw DomainError("exp overflow");
  std::vector<double> d(needed(a) + 1, e);
  return a.compose(d);
}

MultiDual log(const MultiDual& a) {
  const double v = a.value();
  if (!(v > 0.0)) throw DomainError("log of non-positive value");
  const int order = needed(a);
  std::vector<double> d(order + 1);
  d[0] = std::log(v);
  double f = 1.0;
  for (int k = 1; k <= order; ++k) {
    d[k] = ((k % 2 == 1) ? 1.0 : -1.0) * f / std::pow(v, k);
    f *= k;
  }
  return a.compose(d);
}

MultiDual sin(const MultiDual& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cycle[4] = {s, c, -s, -c};
  std::vector<double> d(needed(a) + 1);
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = cycle[k % 4];
  return a.compose(d);
}

MultiDual cos(const MultiDual& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cycle[4] = {c, -s, -c, s};
  std::vector<double> d(needed(a) + 1);
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = cycle[k % 4];
  return a.compose(d);
}

}  // namespace finsler
