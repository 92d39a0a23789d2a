#include "dickesim/dicke_space.hpp"

#include <stdexcept>

namespace dickesim {

BigCount binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  BigCount r = 1;
  // multiplicative recurrence, exact at every step
  for (std::int64_t i = 1; i <= k; ++i) {
    r *= (n - k + i);
    r /= i;
  }
  return r;
}

BigCount degeneracy_Dj(int N, HalfInt j) {
  if (!valid_dicke_index(N, {j, j}))
    throw std::invalid_argument("degeneracy_Dj: invalid (N, j) pairing");
  // D_j = C(N, N/2-j) - C(N, N/2-j-1); both arguments integral by validity.
  const std::int64_t r = (N - j.doubled()) / 2;  // N/2 - j
  return binomial(N, r) - binomial(N, r - 1);
}

BigCount degeneracy_dm(int N, HalfInt m) {
  const std::int64_t dm = m.doubled();
  if (N < 1 || dm < -N || dm > N || (N - dm) % 2 != 0)
    throw std::invalid_argument("degeneracy_dm: invalid (N, m) pairing");
  return binomial(N, (N + dm) / 2);
}

DickeSpace::DickeSpace(int N) : N_(N) {
  if (N < 1) throw std::domain_error("DickeSpace: N must be >= 1");
  for (std::int64_t dj = N; dj >= N % 2; dj -= 2)
    for (std::int64_t dm = dj; dm >= -dj; dm -= 2)
      states_.push_back({HalfInt::from_doubled(dj), HalfInt::from_doubled(dm)});
}

std::size_t DickeSpace::index_of(DickeIndex idx) const {
  if (!contains(idx))
    throw std::invalid_argument("DickeSpace: index " + idx.str() +
                                " outside the triangle for N=" +
                                std::to_string(N_));
  // states with j' > j precede the (j, .) block
  const std::int64_t r = (N_ - idx.j.doubled()) / 2;
  const std::int64_t offset = r * (N_ + 2 - r);
  return static_cast<std::size_t>(offset + idx.j_minus_m());
}

std::vector<DickeIndex> enumerate_dicke_space(int N) {
  DickeSpace space(N);
  return {space.states().begin(), space.states().end()};
}

}  // namespace dickesim
