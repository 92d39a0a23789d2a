#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dickesim/half_int.hpp"
#include "dickesim/moments.hpp"
#include "dickesim/ode.hpp"
#include "dickesim/rates.hpp"

namespace dickesim::moments {

using Rational = boost::multiprecision::cpp_rational;

/// Polynomial in the system size N with exact rational coefficients.
class NPoly {
 public:
  NPoly() = default;
  static NPoly constant(Rational c);
  static NPoly n_power(int k, Rational c = 1);

  NPoly& operator+=(const NPoly& o);
  NPoly& operator-=(const NPoly& o);
  NPoly& operator*=(const NPoly& o);
  friend NPoly operator+(NPoly a, const NPoly& b) { return a += b; }
  friend NPoly operator-(NPoly a, const NPoly& b) { return a -= b; }
  friend NPoly operator*(NPoly a, const NPoly& b) { return a *= b; }
  NPoly operator-() const;

  bool is_zero() const { return c_.empty(); }
  bool operator==(const NPoly& o) const { return c_ == o.c_; }
  double eval(double n) const;
  std::string str() const;

 private:
  void trim();
  std::map<int, Rational> c_;  // exponent -> coefficient
};

/// The commutative monomial <Jz^a (J2)^b>; within the p = q sector every
/// normal-ordered product of collective operators reduces to a polynomial in
/// Jz and the Casimir J^2.
struct PhysKey {
  int a = 0;
  int b = 0;
  friend auto operator<=>(const PhysKey&, const PhysKey&) = default;
  std::string str() const;
};

/// Linear combination of physical monomials with NPoly coefficients.
class PhysPoly {
 public:
  PhysPoly() = default;
  static PhysPoly monomial(PhysKey k, NPoly c = NPoly::constant(1));

  void add(PhysKey k, const NPoly& c);
  PhysPoly& operator+=(const PhysPoly& o);
  PhysPoly& operator-=(const PhysPoly& o);
  friend PhysPoly operator+(PhysPoly a, const PhysPoly& b) { return a += b; }
  friend PhysPoly operator-(PhysPoly a, const PhysPoly& b) { return a -= b; }
  PhysPoly operator*(const PhysPoly& o) const;
  PhysPoly scaled(const NPoly& c) const;

  /// Substitute Jz -> Jz + delta (binomial expansion of the Jz powers).
  PhysPoly shift_jz(int delta) const;

  bool is_zero() const { return t_.empty(); }
  bool operator==(const PhysPoly& o) const { return t_ == o.t_; }
  const std::map<PhysKey, NPoly>& terms() const { return t_; }
  double eval(double jz, double j2, double n) const;
  std::string str() const;

 private:
  void trim();
  std::map<PhysKey, NPoly> t_;
};

/// Normal-ordered key <J+^p Jz^r J-^p> of the p = q sector (the -i w0 (q-p)
/// frequency prefactor vanishes identically here).
struct NormalKey {
  int p = 0;
  int r = 0;
  friend auto operator<=>(const NormalKey&, const NormalKey&) = default;
};

using NormalPoly = std::map<NormalKey, NPoly>;

/// J+^p Jz^r J-^p as a polynomial in (Jz, J^2).
PhysPoly normal_to_physical(NormalKey k);
PhysPoly normal_to_physical(const NormalPoly& p);

/// Jz^a (J2)^b re-expanded over normal-ordered keys (inverse of the above).
NormalPoly physical_to_normal(PhysKey k);

/// Per-channel right-hand side (unit rate) of the operator-product evolution
/// equation for one normal-ordered key.
struct ChannelPolys {
  PhysPoly s, l, d;
};

/// Raw (unclosed) evolution equation for a physical monomial, expanded over
/// physical monomials channel by channel.
ChannelPolys raw_equation(PhysKey lhs);

/// A closure product: coeff * prod_i <factors[i]>; zero factors is a
/// constant, one factor a linear term.
struct Product {
  std::vector<PhysKey> factors;  // sorted
  NPoly coeff;
  friend bool operator==(const Product&, const Product&) = default;
};

struct ClosedRhs {
  std::vector<Product> s, l, d;  // canonical order
};

struct Equation {
  PhysKey lhs;
  ClosedRhs rhs;
};

struct ChannelSet {
  bool s = true, l = true, d = true;
};

/// Truncated system of order K: tracked monomials {<Jz>, ..., <Jz^K>, <J2>},
/// every untracked monomial on a right-hand side reduced by the closure rule
/// (default "peel-lowest": split single <Jz> factors off, then <J2> factors;
/// at K = 2 these are exactly the printed <Jz^3> ~ <Jz><Jz^2> and
/// <Jz J2> ~ <Jz><J2> splittings, beyond K = 2 the mechanical extension is
/// experimental).
struct SymbolicSystem {
  int order = 0;
  std::vector<PhysKey> tracked;
  std::string closure = "peel-lowest";
  ChannelSet channels;
  std::vector<Equation> equations;  // aligned with tracked

  int index_of(PhysKey k) const;
  std::string to_text() const;  ///< one equation per line, canonical ordering
};

SymbolicSystem generate_system(int order, ChannelSet channels = {});

/// Symbolic system bound to numeric (N, rates) for integration.
class CompiledSystem {
 public:
  CompiledSystem(const SymbolicSystem& system, int N, const RateSet& rates);

  int dimension() const { return dim_; }
  const SymbolicSystem& system() const { return *system_; }
  void rhs(const Eigen::VectorXd& y, Eigen::VectorXd& dydt) const;

  /// Initial tracked-moment values for the Dicke state |j,m>.
  Eigen::VectorXd dicke_initial(HalfInt j, HalfInt m) const;

 private:
  struct Term {
    int target;
    double coeff;
    std::vector<int> factors;  // indices into y
  };
  const SymbolicSystem* system_;
  int N_;
  int dim_;
  std::vector<Term> terms_;
};

/// Integrates a generated system; emits Jz, J2, JpJm, Jz2 like the
/// hand-coded tiers (JpJm = J2 - Jz2 + Jz with Jz2 closed as Jz^2 when the
/// system does not track it).
EvolveResult integrate_generated(const SymbolicSystem& system,
                                 const MomentState& y0, const RateSet& rates,
                                 std::span<const double> t_grid,
                                 const OdeOptions& ode = {});

}  // namespace dickesim::moments
