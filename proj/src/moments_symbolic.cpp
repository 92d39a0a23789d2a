#include "dickesim/moments_symbolic.hpp"

#include <algorithm>
#include <stdexcept>

namespace dickesim::moments {

// ---------------------------------------------------------------- NPoly ----

NPoly NPoly::constant(Rational c) {
  NPoly p;
  if (c != 0) p.c_[0] = std::move(c);
  return p;
}

NPoly NPoly::n_power(int k, Rational c) {
  NPoly p;
  if (c != 0) p.c_[k] = std::move(c);
  return p;
}

void NPoly::trim() {
  for (auto it = c_.begin(); it != c_.end();)
    it = (it->second == 0) ? c_.erase(it) : std::next(it);
}

NPoly& NPoly::operator+=(const NPoly& o) {
  for (const auto& [k, v] : o.c_) c_[k] += v;
  trim();
  return *this;
}

NPoly& NPoly::operator-=(const NPoly& o) {
  for (const auto& [k, v] : o.c_) c_[k] -= v;
  trim();
  return *this;
}

NPoly& NPoly::operator*=(const NPoly& o) {
  std::map<int, Rational> out;
  for (const auto& [ka, va] : c_)
    for (const auto& [kb, vb] : o.c_) out[ka + kb] += va * vb;
  c_ = std::move(out);
  trim();
  return *this;
}

NPoly NPoly::operator-() const {
  NPoly p;
  for (const auto& [k, v] : c_) p.c_[k] = -v;
  return p;
}

double NPoly::eval(double n) const {
  double acc = 0.0;
  for (const auto& [k, v] : c_)
    acc += v.convert_to<double>() * std::pow(n, k);
  return acc;
}

std::string NPoly::str() const {
  if (c_.empty()) return "0";
  std::string out;
  // highest power first
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
    const auto& [k, v] = *it;
    if (!out.empty()) out += v > 0 ? " + " : " - ";
    else if (v < 0) out += "-";
    const Rational av = v > 0 ? v : Rational(-v);
    const bool unit = av == 1 && k > 0;
    if (!unit) out += av.str();
    if (k > 0) {
      if (!unit) out += "*";
      out += k == 1 ? "N" : "N^" + std::to_string(k);
    }
  }
  return out;
}

// -------------------------------------------------------------- PhysPoly ---

std::string PhysKey::str() const {
  if (a == 0 && b == 0) return "1";
  std::string out;
  if (a > 0) out += a == 1 ? "<Jz>" : "<Jz^" + std::to_string(a) + ">";
  if (b > 0) out += b == 1 ? "<J2>" : "<J2^" + std::to_string(b) + ">";
  return out;
}

PhysPoly PhysPoly::monomial(PhysKey k, NPoly c) {
  PhysPoly p;
  p.add(k, c);
  return p;
}

void PhysPoly::add(PhysKey k, const NPoly& c) {
  if (c.is_zero()) return;
  t_[k] += c;
  if (t_[k].is_zero()) t_.erase(k);
}

void PhysPoly::trim() {
  for (auto it = t_.begin(); it != t_.end();)
    it = it->second.is_zero() ? t_.erase(it) : std::next(it);
}

PhysPoly& PhysPoly::operator+=(const PhysPoly& o) {
  for (const auto& [k, c] : o.t_) t_[k] += c;
  trim();
  return *this;
}

PhysPoly& PhysPoly::operator-=(const PhysPoly& o) {
  for (const auto& [k, c] : o.t_) t_[k] -= c;
  trim();
  return *this;
}

PhysPoly PhysPoly::operator*(const PhysPoly& o) const {
  PhysPoly out;
  for (const auto& [ka, ca] : t_)
    for (const auto& [kb, cb] : o.t_)
      out.add({ka.a + kb.a, ka.b + kb.b}, ca * cb);
  return out;
}

PhysPoly PhysPoly::scaled(const NPoly& c) const {
  PhysPoly out;
  for (const auto& [k, v] : t_) out.add(k, v * c);
  return out;
}

namespace {
Rational binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  Rational r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}
}  // namespace

PhysPoly PhysPoly::shift_jz(int delta) const {
  PhysPoly out;
  for (const auto& [k, c] : t_) {
    // (Jz + delta)^a = sum_s C(a,s) delta^(a-s) Jz^s
    Rational dpow = 1;
    for (int s = k.a; s >= 0; --s) {
      out.add({s, k.b}, c * NPoly::constant(binom(k.a, s) * dpow));
      dpow *= delta;
    }
  }
  return out;
}

double PhysPoly::eval(double jz, double j2, double n) const {
  double acc = 0.0;
  for (const auto& [k, c] : t_)
    acc += c.eval(n) * std::pow(jz, k.a) * std::pow(j2, k.b);
  return acc;
}

std::string PhysPoly::str() const {
  if (t_.empty()) return "0";
  std::string out;
  for (const auto& [k, c] : t_) {
    if (!out.empty()) out += " + ";
    out += "(" + c.str() + ")";
    if (!(k == PhysKey{0, 0})) out += "*" + k.str();
  }
  return out;
}

// ------------------------------------------------- basis transformations ---

PhysPoly normal_to_physical(NormalKey k) {
  // J+^p Jz^r J-^p = J+^(p-1) [ (Jz-1)^r (J2 - Jz^2 + Jz) ] J-^(p-1)
  static const PhysPoly jpjm = [] {
    PhysPoly p;
    p.add({0, 1}, NPoly::constant(1));
    p.add({2, 0}, NPoly::constant(-1));
    p.add({1, 0}, NPoly::constant(1));
    return p;
  }();
  PhysPoly g = PhysPoly::monomial({k.r, 0});
  for (int i = 0; i < k.p; ++i) g = g.shift_jz(-1) * jpjm;
  return g;
}

PhysPoly normal_to_physical(const NormalPoly& p) {
  PhysPoly out;
  for (const auto& [k, c] : p) out += normal_to_physical(k).scaled(c);
  return out;
}

namespace {

void add_normal(NormalPoly& out, NormalKey k, const NPoly& c) {
  if (c.is_zero()) return;
  out[k] += c;
  if (out[k].is_zero()) out.erase(k);
}

/// Normal ordering of J+^k f(Jz,J2) J-^k; peels one J2 factor at a time.
void sandwich_to_normal(int k, const PhysPoly& f, const NPoly& scale,
                        NormalPoly& out) {
  for (const auto& [key, c] : f.terms()) {
    const NPoly coeff = c * scale;
    if (key.b == 0) {
      add_normal(out, {k, key.a}, coeff);
      continue;
    }
    // Jz^a (J2)^b = Jz^(a+2)(J2)^(b-1) - Jz^(a+1)(J2)^(b-1)
    //              + J+ (Jz+1)^a (J2)^(b-1) J-
    sandwich_to_normal(k, PhysPoly::monomial({key.a + 2, key.b - 1}), coeff,
                       out);
    sandwich_to_normal(k, PhysPoly::monomial({key.a + 1, key.b - 1}),
                       -coeff, out);
    sandwich_to_normal(k + 1,
                       PhysPoly::monomial({key.a, key.b - 1}).shift_jz(1),
                       coeff, out);
  }
}

}  // namespace

NormalPoly physical_to_normal(PhysKey k) {
  NormalPoly out;
  sandwich_to_normal(0, PhysPoly::monomial(k), NPoly::constant(1), out);
  return out;
}

// ------------------------------------------------------- master equation ---

namespace {

/// Coefficients of (Jz - 1)^r (N/2 + Jz) over powers of Jz.
std::vector<NPoly> dephasing_weight_poly(int r) {
  std::vector<NPoly> coef(r + 2);
  for (int s = 0; s <= r; ++s) {
    Rational sign = (r - s) % 2 == 0 ? 1 : -1;
    const Rational c = binom(r, s) * sign;
    coef[s] += NPoly::n_power(1, c / 2);  // (N/2) Jz^s
    coef[s + 1] += NPoly::constant(c);    // Jz^(s+1)
  }
  return coef;
}

/// Unit-rate action of each channel on a normal-ordered key, still over
/// normal-ordered keys.
struct NormalChannelRhs {
  NormalPoly s, l, d;
};

NormalChannelRhs general_equation(NormalKey key) {
  const int p = key.p, r = key.r;
  NormalChannelRhs out;

  // gamma_S: <(p+1,r)> - sum_s C(r,s) <(p+1,s)> + 2p <(p,r+1)>
  //          + p(p-1) <(p,r)>
  add_normal(out.s, {p + 1, r}, NPoly::constant(1));
  for (int s = 0; s <= r; ++s)
    add_normal(out.s, {p + 1, s}, NPoly::constant(-binom(r, s)));
  add_normal(out.s, {p, r + 1}, NPoly::constant(2 * p));
  add_normal(out.s, {p, r}, NPoly::constant(Rational(p) * (p - 1)));

  // gamma_L: (Jz-1)^r (Jz+N/2) sandwiched at p, - (p+N/2)<(p,r)> - <(p,r+1)>
  {
    const auto w = dephasing_weight_poly(r);
    for (int s = 0; s < static_cast<int>(w.size()); ++s)
      add_normal(out.l, {p, s}, w[s]);
    add_normal(out.l, {p, r},
               -(NPoly::constant(p) + NPoly::n_power(1, Rational(1, 2))));
    add_normal(out.l, {p, r + 1}, NPoly::constant(-1));
  }

  // gamma_D: -p <(p,r)> + p^2 (Jz-1)^r (N/2+Jz) sandwiched at p-1
  add_normal(out.d, {p, r}, NPoly::constant(-p));
  if (p >= 1) {
    const auto w = dephasing_weight_poly(r);
    for (int s = 0; s < static_cast<int>(w.size()); ++s)
      add_normal(out.d, {p - 1, s}, w[s] * NPoly::constant(Rational(p) * p));
  }
  return out;
}

}  // namespace

ChannelPolys raw_equation(PhysKey lhs) {
  const NormalPoly expansion = physical_to_normal(lhs);
  NormalPoly s, l, d;
  for (const auto& [key, c] : expansion) {
    const auto eq = general_equation(key);
    for (const auto& [k2, c2] : eq.s) add_normal(s, k2, c2 * c);
    for (const auto& [k2, c2] : eq.l) add_normal(l, k2, c2 * c);
    for (const auto& [k2, c2] : eq.d) add_normal(d, k2, c2 * c);
  }
  ChannelPolys out;
  out.s = normal_to_physical(s);
  out.l = normal_to_physical(l);
  out.d = normal_to_physical(d);
  return out;
}

// ----------------------------------------------------------- closed system -

namespace {

bool is_tracked(PhysKey k, int order) {
  if (k.b == 0) return k.a >= 1 && k.a <= order;
  return k.a == 0 && k.b == 1;
}

std::vector<Product> close_poly(const PhysPoly& poly, int order) {
  std::map<std::vector<PhysKey>, NPoly> bins;
  for (const auto& [key, coeff] : poly.terms()) {
    std::vector<PhysKey> factors;
    PhysKey cur = key;
    while (!(cur == PhysKey{0, 0}) && !is_tracked(cur, order)) {
      if (cur.a > 0) {
        factors.push_back({1, 0});  // peel one <Jz>
        --cur.a;
      } else if (cur.b > 1) {
        factors.push_back({0, 1});  // peel one <J2>
        --cur.b;
      } else {
        throw std::runtime_error(
            "closure rule unable to reduce " + key.str());
      }
    }
    if (!(cur == PhysKey{0, 0})) factors.push_back(cur);
    for (const auto& f : factors)
      if (!is_tracked(f, order))
        throw std::runtime_error("closure produced untracked factor " +
                                 f.str() + " from " + key.str());
    std::sort(factors.begin(), factors.end());
    bins[factors] += coeff;
  }
  std::vector<Product> out;
  for (auto& [factors, coeff] : bins)
    if (!coeff.is_zero()) out.push_back({factors, coeff});
  return out;
}

}  // namespace

int SymbolicSystem::index_of(PhysKey k) const {
  for (std::size_t i = 0; i < tracked.size(); ++i)
    if (tracked[i] == k) return static_cast<int>(i);
  return -1;
}

SymbolicSystem generate_system(int order, ChannelSet channels) {
  if (order < 1) throw std::invalid_argument("generate_system: order >= 1");
  SymbolicSystem sys;
  sys.order = order;
  sys.channels = channels;
  for (int a = 1; a <= order; ++a) sys.tracked.push_back({a, 0});
  sys.tracked.push_back({0, 1});
  for (const auto& key : sys.tracked) {
    const ChannelPolys raw = raw_equation(key);
    Equation eq;
    eq.lhs = key;
    if (channels.s) eq.rhs.s = close_poly(raw.s, order);
    if (channels.l) eq.rhs.l = close_poly(raw.l, order);
    if (channels.d) eq.rhs.d = close_poly(raw.d, order);
    sys.equations.push_back(std::move(eq));
  }
  return sys;
}

namespace {
std::string products_str(const std::vector<Product>& terms) {
  if (terms.empty()) return "0";
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += " + ";
    out += "(" + t.coeff.str() + ")";
    for (const auto& f : t.factors) out += "*" + f.str();
  }
  return out;
}
}  // namespace

std::string SymbolicSystem::to_text() const {
  std::string out = "# truncated moment system, order " +
                    std::to_string(order) + ", closure " + closure + "\n";
  out += "# tracked:";
  for (const auto& k : tracked) out += " " + k.str();
  out += "\n";
  for (const auto& eq : equations) {
    out += "d" + eq.lhs.str() + "/dt =";
    bool any = false;
    if (channels.s) {
      out += " gS*[ " + products_str(eq.rhs.s) + " ]";
      any = true;
    }
    if (channels.l) {
      out += std::string(any ? " +" : "") + " gL*[ " +
             products_str(eq.rhs.l) + " ]";
      any = true;
    }
    if (channels.d) {
      out += std::string(any ? " +" : "") + " gD*[ " +
             products_str(eq.rhs.d) + " ]";
    }
    out += "\n";
  }
  return out;
}

// -------------------------------------------------------- compiled system --

CompiledSystem::CompiledSystem(const SymbolicSystem& system, int N,
                               const RateSet& rates)
    : system_(&system), N_(N), dim_(static_cast<int>(system.tracked.size())) {
  auto add_terms = [&](int target, const std::vector<Product>& prods,
                       double gamma) {
    if (gamma == 0.0) return;
    for (const auto& prod : prods) {
      Term t;
      t.target = target;
      t.coeff = gamma * prod.coeff.eval(static_cast<double>(N));
      if (t.coeff == 0.0) continue;
      for (const auto& f : prod.factors) {
        const int idx = system.index_of(f);
        if (idx < 0)
          throw std::logic_error("CompiledSystem: untracked factor " +
                                 f.str());
        t.factors.push_back(idx);
      }
      terms_.push_back(std::move(t));
    }
  };
  for (std::size_t i = 0; i < system.equations.size(); ++i) {
    const auto& eq = system.equations[i];
    add_terms(static_cast<int>(i), eq.rhs.s, rates.gamma_s);
    add_terms(static_cast<int>(i), eq.rhs.l, rates.gamma_l);
    add_terms(static_cast<int>(i), eq.rhs.d, rates.gamma_d);
  }
}

void CompiledSystem::rhs(const Eigen::VectorXd& y,
                         Eigen::VectorXd& dydt) const {
  dydt.setZero();
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (const int f : t.factors) v *= y[f];
    dydt[t.target] += v;
  }
}

Eigen::VectorXd CompiledSystem::dicke_initial(HalfInt j, HalfInt m) const {
  Eigen::VectorXd y(dim_);
  for (int i = 0; i < dim_; ++i) {
    const auto& k = system_->tracked[i];
    if (k.b == 0)
      y[i] = std::pow(m.value(), k.a);
    else
      y[i] = j.value() * (j.value() + 1.0);
  }
  return y;
}

EvolveResult integrate_generated(const SymbolicSystem& system,
                                 const MomentState& y0, const RateSet& rates,
                                 std::span<const double> t_grid,
                                 const OdeOptions& ode) {
  rates.require_valid_for_evolution();
  const int N = y0.N;
  const CompiledSystem compiled(system, N, rates);
  const int idx_jz = system.index_of({1, 0});
  const int idx_jz2 = system.index_of({2, 0});
  const int idx_j2 = system.index_of({0, 1});
  if (idx_jz < 0 || idx_j2 < 0)
    throw std::invalid_argument(
        "integrate_generated: system must track <Jz> and <J2>");

  Eigen::VectorXd y(compiled.dimension());
  for (int i = 0; i < compiled.dimension(); ++i) {
    const auto& k = system.tracked[i];
    if (k == PhysKey{1, 0}) y[i] = y0.jz;
    else if (k == PhysKey{2, 0}) y[i] = y0.jz2;
    else if (k.b == 0) y[i] = std::pow(y0.jz, k.a);  // product-state fill-in
    else y[i] = y0.j2;
  }

  const double jz_bound = 0.5 * N;
  const double j2_bound = 0.5 * N * (0.5 * N + 1.0);

  EvolveResult result;
  auto& jz_col = result.series.add_column("Jz");
  auto& j2_col = result.series.add_column("J2");
  auto& jpjm_col = result.series.add_column("JpJm");
  auto& jz2_col = result.series.add_column("Jz2");

  auto rhs = [&](const Eigen::VectorXd& v, double, Eigen::VectorXd& dv) {
    compiled.rhs(v, dv);
  };
  auto observe = [&](double t, const Eigen::VectorXd& v) {
    const double jz = v[idx_jz], j2 = v[idx_j2];
    const double jz2 = idx_jz2 >= 0 ? v[idx_jz2] : jz * jz;
    const double viol = std::max({(std::abs(jz) - jz_bound) / jz_bound,
                                  (j2 - j2_bound) / j2_bound, -j2 / j2_bound});
    result.max_bound_violation = std::max(result.max_bound_violation, viol);
    if (viol > 1e-4)
      throw std::runtime_error(
          "integrate_generated: closure breakdown at t=" + std::to_string(t));
    result.series.t.push_back(t);
    jz_col.push_back(jz);
    j2_col.push_back(j2);
    jpjm_col.push_back(j2 - jz2 + jz);
    jz2_col.push_back(jz2);
  };

  result.stats = integrate_ode(rhs, std::move(y), t_grid, observe, ode);
  result.series.meta["solver"] = "generated-K" + std::to_string(system.order);
  result.series.meta["N"] = N;
  result.series.meta["unit_Jz"] = jz_bound;
  result.series.meta["unit_J2"] = j2_bound;
  return result;
}

}  // namespace dickesim::moments
