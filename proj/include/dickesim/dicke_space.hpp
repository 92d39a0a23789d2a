#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <span>
#include <vector>

#include "dickesim/half_int.hpp"

namespace dickesim {

/// Exact arbitrary-precision count; D_j and d_m overflow 64-bit factorials
/// well before N = 50.
using BigCount = boost::multiprecision::cpp_int;

/// Degeneracy D_j of the Dicke ladder (j fixed, any m):
/// D_j = N!(2j+1) / ((N/2+j+1)!(N/2-j)!), computed exactly.
BigCount degeneracy_Dj(int N, HalfInt j);

/// Degeneracy d_m of the energy eigenvalue m: binomial(N, N/2+m), exact.
BigCount degeneracy_dm(int N, HalfInt m);

/// Exact binomial coefficient used by the degeneracies.
BigCount binomial(std::int64_t n, std::int64_t k);

/// The enumerated Dicke triangle for N spins: all valid (j, m) ordered by
/// descending j, then descending m.
class DickeSpace {
 public:
  explicit DickeSpace(int N);

  int n_spins() const { return N_; }
  std::size_t size() const { return states_.size(); }
  const DickeIndex& operator[](std::size_t i) const { return states_[i]; }
  std::span<const DickeIndex> states() const { return states_; }

  HalfInt j_max() const { return HalfInt::from_doubled(N_); }
  HalfInt j_min() const { return HalfInt::from_doubled(N_ % 2); }

  /// Position of (j, m) in enumeration order.
  std::size_t index_of(DickeIndex idx) const;
  bool contains(DickeIndex idx) const { return valid_dicke_index(N_, idx); }

 private:
  int N_;
  std::vector<DickeIndex> states_;
};

/// Convenience: the enumerated list itself.
std::vector<DickeIndex> enumerate_dicke_space(int N);

}  // namespace dickesim
