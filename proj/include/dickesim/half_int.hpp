#pragma once

#include <compare>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <string>

namespace dickesim {

/// Half-integer quantum number stored as twice its value, so that ordering,
/// equality and triangle bookkeeping never touch floating point.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  static constexpr HalfInt from_doubled(std::int64_t d) { return HalfInt(d); }
  static constexpr HalfInt whole(std::int64_t k) { return HalfInt(2 * k); }

  constexpr std::int64_t doubled() const { return doubled_; }
  constexpr bool is_integer() const { return doubled_ % 2 == 0; }
  constexpr double value() const { return 0.5 * static_cast<double>(doubled_); }

  friend constexpr auto operator<=>(HalfInt, HalfInt) = default;
  friend constexpr HalfInt operator+(HalfInt a, HalfInt b) {
    return HalfInt(a.doubled_ + b.doubled_);
  }
  friend constexpr HalfInt operator-(HalfInt a, HalfInt b) {
    return HalfInt(a.doubled_ - b.doubled_);
  }
  constexpr HalfInt operator-() const { return HalfInt(-doubled_); }

  std::string str() const {
    if (is_integer()) return std::to_string(doubled_ / 2);
    return std::to_string(doubled_) + "/2";
  }
  friend std::ostream& operator<<(std::ostream& os, HalfInt h) {
    return os << h.str();
  }

 private:
  constexpr explicit HalfInt(std::int64_t d) : doubled_(d) {}
  std::int64_t doubled_ = 0;
};

/// A (j, m) point of the Dicke triangle.
struct DickeIndex {
  HalfInt j;
  HalfInt m;

  friend constexpr auto operator<=>(const DickeIndex&,
                                    const DickeIndex&) = default;

  /// j+m, j-m, 2j and friends are integers for every valid index; these
  /// helpers keep the rate algebra exact.
  constexpr std::int64_t j_plus_m() const { return (j.doubled() + m.doubled()) / 2; }
  constexpr std::int64_t j_minus_m() const { return (j.doubled() - m.doubled()) / 2; }
  constexpr std::int64_t two_j() const { return j.doubled(); }

  std::string str() const { return "(" + j.str() + "," + m.str() + ")"; }
};

/// Validity of (j, m) for an ensemble of N spin-1/2 systems.
constexpr bool valid_dicke_index(int N, DickeIndex idx) {
  const auto dj = idx.j.doubled();
  const auto dm = idx.m.doubled();
  if (N < 1) return false;
  if (dj < 0 || dj > N) return false;
  if ((N - dj) % 2 != 0) return false;      // j descends from N/2 in unit steps
  if (dm < -dj || dm > dj) return false;
  if ((dj - dm) % 2 != 0) return false;     // j - m must be an integer
  return true;
}

}  // namespace dickesim
