#include "dickesim/piqs.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dickesim::piqs {

PopulationVector initial_dicke_state(int N, HalfInt j, HalfInt m) {
  const DickeSpace space(N);
  PopulationVector v;
  v.N = N;
  v.p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
  v.p[static_cast<Eigen::Index>(space.index_of({j, m}))] = 1.0;
  return v;
}

double channel_rate_closed_form(int N, HalfInt j, HalfInt m, Channel ch,
                                int dj_change) {
  if (!valid_dicke_index(N, {j, m}))
    throw std::invalid_argument("channel_rate_closed_form: invalid (j,m)");
  const std::int64_t tj = j.doubled();      // 2j
  const DickeIndex idx{j, m};
  const std::int64_t jpm = idx.j_plus_m();  // j+m
  const std::int64_t jmm = idx.j_minus_m(); // j-m
  const std::int64_t hn_pj1 = (N + tj + 2) / 2;  // N/2 + j + 1
  const std::int64_t hn_mj = (N - tj) / 2;       // N/2 - j

  // destination must stay inside the triangle (the numerators below vanish
  // exactly on every edge case, but guard anyway)
  const std::int64_t dm_step = (ch == Channel::D) ? 0 : -2;
  const DickeIndex dest{HalfInt::from_doubled(tj + 2 * dj_change),
                        HalfInt::from_doubled(m.doubled() + dm_step)};
  const bool dest_is_self = dj_change == 0 && ch == Channel::D;
  if (!dest_is_self && !valid_dicke_index(N, dest)) return 0.0;

  switch (ch) {
    case Channel::S:
      if (dj_change != 0)
        throw std::invalid_argument(
            "channel_rate_closed_form: S conserves j");
      return static_cast<double>(jpm * (jmm + 1));

    case Channel::L:
      switch (dj_change) {
        case 0:  // (N/2+1)(j+m)(j-m+1) / (2j(j+1))
          if (tj == 0) return 0.0;
          return (0.5 * N + 1.0) * static_cast<double>(jpm * (jmm + 1)) *
                 2.0 / static_cast<double>(tj * (tj + 2));
        case -1:  // (N/2+j+1)(j+m)(j+m-1) / (2j(2j+1))
          if (tj == 0) return 0.0;
          return static_cast<double>(hn_pj1 * jpm * (jpm - 1)) /
                 static_cast<double>(tj * (tj + 1));
        case +1:  // (N/2-j)(j-m+1)(j-m+2) / (2(j+1)(2j+1))
          return static_cast<double>(hn_mj * (jmm + 1) * (jmm + 2)) /
                 static_cast<double>((tj + 2) * (tj + 1));
        default:
          throw std::invalid_argument(
              "channel_rate_closed_form: |dj_change| <= 1");
      }

    case Channel::D:
      switch (dj_change) {
        case -1:  // (N/2+j+1)(j^2-m^2) / (2j(2j+1))
          if (tj == 0) return 0.0;
          return static_cast<double>(hn_pj1 * jpm * jmm) /
                 static_cast<double>(tj * (tj + 1));
        case +1:  // (N/2-j)((j+1)^2-m^2) / (2(j+1)(2j+1))
          return static_cast<double>(hn_mj * (jpm + 1) * (jmm + 1)) /
                 static_cast<double>((tj + 2) * (tj + 1));
        case 0: {  // alpha-shuffling self block, no population transfer
          const double m2 = 0.25 * static_cast<double>(m.doubled()) *
                            static_cast<double>(m.doubled());
          double v = static_cast<double>(hn_mj) /
                     static_cast<double>((tj + 2) * (tj + 1));
          if (tj > 0)
            v += static_cast<double>(hn_pj1) /
                 static_cast<double>(tj * (tj + 1));
          return m2 * v;
        }
        default:
          throw std::invalid_argument(
              "channel_rate_closed_form: |dj_change| <= 1");
      }
  }
  throw std::logic_error("channel_rate_closed_form: unreachable");
}

namespace {

void add_channel(const DickeSpace& space, Channel ch, double gamma,
                 std::vector<Eigen::Triplet<double>>& out) {
  if (gamma == 0.0) return;
  const int N = space.n_spins();
  const std::int64_t dm_step = (ch == Channel::D) ? 0 : -2;
  for (std::size_t src = 0; src < space.size(); ++src) {
    const auto [j, m] = space[src];
    for (int dj : {-1, 0, +1}) {
      if (ch == Channel::S && dj != 0) continue;
      if (ch == Channel::D && dj == 0) continue;  // self block is a no-op
      const DickeIndex dest{HalfInt::from_doubled(j.doubled() + 2 * dj),
                            HalfInt::from_doubled(m.doubled() + dm_step)};
      if (!space.contains(dest)) continue;
      const double w = gamma * channel_rate_closed_form(N, j, m, ch, dj);
      if (w == 0.0) continue;
      const auto di = static_cast<int>(space.index_of(dest));
      const auto si = static_cast<int>(src);
      out.emplace_back(di, si, w);
      out.emplace_back(si, si, -w);
    }
  }
}

Eigen::SparseMatrix<double> assemble(std::size_t dim,
                                     const std::vector<Eigen::Triplet<double>>& ts) {
  Eigen::SparseMatrix<double> a(static_cast<int>(dim), static_cast<int>(dim));
  a.setFromTriplets(ts.begin(), ts.end());
  a.makeCompressed();
  return a;
}

}  // namespace

RateMatrix build_rate_matrix(int N, const RateSet& rates) {
  const DickeSpace space(N);
  RateMatrix out;
  out.N = N;
  std::vector<Eigen::Triplet<double>> ts, tl, td;
  add_channel(space, Channel::S, rates.gamma_s, ts);
  add_channel(space, Channel::L, rates.gamma_l, tl);
  add_channel(space, Channel::D, rates.gamma_d, td);
  out.s = assemble(space.size(), ts);
  out.l = assemble(space.size(), tl);
  out.d = assemble(space.size(), td);
  out.total = out.s + out.l;
  out.total = (out.total + out.d).pruned();
  out.total.makeCompressed();
  return out;
}

std::string dump_rate_matrix(const Eigen::SparseMatrix<double>& a) {
  std::string out;
  char buf[80];
  for (int k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%ld %ld %.17g\n",
                    static_cast<long>(it.row()), static_cast<long>(it.col()),
                    it.value());
      out += buf;
    }
  return out;
}

namespace {

/// L-stable fallback for stiff rate matrices: implicit Euler sub-stepping
/// with step doubling and Richardson extrapolation per grid interval.
class ImplicitEuler {
 public:
  explicit ImplicitEuler(const Eigen::SparseMatrix<double>& a) : a_(a) {}

  Eigen::VectorXd advance(Eigen::VectorXd p, double t0, double t1,
                          double rtol) {
    int n = last_n_;
    for (;;) {
      const Eigen::VectorXd p1 = run(p, t1 - t0, n);
      const Eigen::VectorXd p2 = run(p, t1 - t0, 2 * n);
      const double err = (p1 - p2).cwiseAbs().maxCoeff();
      const double scale = rtol * std::max(1.0, p2.cwiseAbs().maxCoeff());
      if (err <= scale || n >= (1 << 20)) {
        last_n_ = std::max(1, n / 2);
        return 2.0 * p2 - p1;  // second order by extrapolation
      }
      n *= 2;
    }
  }

 private:
  Eigen::VectorXd run(const Eigen::VectorXd& p0, double span, int n) {
    const double h = span / n;
    factorize(h);
    Eigen::VectorXd p = p0;
    for (int i = 0; i < n; ++i) p = lu_.solve(p);
    return p;
  }

  void factorize(double h) {
    if (h == cached_h_) return;
    Eigen::SparseMatrix<double> id(a_.rows(), a_.cols());
    id.setIdentity();
    Eigen::SparseMatrix<double> sys = id - h * a_;
    lu_.compute(sys);
    if (lu_.info() != Eigen::Success)
      throw std::runtime_error("piqs implicit fallback: factorization failed");
    cached_h_ = h;
  }

  const Eigen::SparseMatrix<double>& a_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  double cached_h_ = -1.0;
  int last_n_ = 4;
};

}  // namespace

EvolveResult evolve_populations(const PopulationVector& p0,
                                const RateSet& rates,
                                std::span<const double> t_grid,
                                const OdeOptions& ode, bool keep_populations) {
  rates.require_valid_for_evolution();
  const DickeSpace space(p0.N);
  if (p0.p.size() != static_cast<Eigen::Index>(space.size()))
    throw std::invalid_argument("evolve_populations: population size mismatch");
  if (std::abs(p0.p.sum() - 1.0) > 1e-8)
    throw std::invalid_argument("evolve_populations: p0 not normalized");

  const RateMatrix a = build_rate_matrix(p0.N, rates);

  // observable weights per state
  const auto n_states = static_cast<Eigen::Index>(space.size());
  Eigen::VectorXd w_jz(n_states), w_j2(n_states), w_jpjm(n_states),
      w_jz2(n_states);
  for (Eigen::Index k = 0; k < n_states; ++k) {
    const auto idx = space[static_cast<std::size_t>(k)];
    const double jv = idx.j.value(), mv = idx.m.value();
    w_jz[k] = mv;
    w_j2[k] = jv * (jv + 1.0);
    w_jpjm[k] = static_cast<double>(idx.j_plus_m() * (idx.j_minus_m() + 1));
    w_jz2[k] = mv * mv;
  }

  EvolveResult result;
  auto& jz_col = result.series.add_column("Jz");
  auto& j2_col = result.series.add_column("J2");
  auto& jpjm_col = result.series.add_column("JpJm");
  auto& jz2_col = result.series.add_column("Jz2");
  result.min_population = p0.p.minCoeff();

  auto observe = [&](double t, const Eigen::VectorXd& p) {
    const double drift = std::abs(p.sum() - 1.0);
    result.max_norm_drift = std::max(result.max_norm_drift, drift);
    if (drift > 1e-6)
      throw std::runtime_error(
          "evolve_populations: normalization drift beyond 1e-6 at t=" +
          std::to_string(t));
    result.min_population = std::min(result.min_population, p.minCoeff());
    result.series.t.push_back(t);
    jz_col.push_back(w_jz.dot(p));
    j2_col.push_back(w_j2.dot(p));
    jpjm_col.push_back(w_jpjm.dot(p));
    jz2_col.push_back(w_jz2.dot(p));
    if (keep_populations) result.populations.push_back(p);
  };

  auto rhs = [&](const Eigen::VectorXd& p, double, Eigen::VectorXd& dpdt) {
    dpdt = a.total * p;
  };

  try {
    result.stats = integrate_ode(rhs, p0.p, t_grid, observe, ode);
  } catch (const StepSizeCollapse&) {
    // stiff regime: restart with the L-stable scheme
    result.series.t.clear();
    jz_col.clear();
    j2_col.clear();
    jpjm_col.clear();
    jz2_col.clear();
    result.populations.clear();
    result.max_norm_drift = 0.0;
    result.min_population = p0.p.minCoeff();
    result.used_implicit_fallback = true;

    ImplicitEuler stepper(a.total);
    Eigen::VectorXd p = p0.p;
    observe(t_grid.front(), p);
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
      p = stepper.advance(std::move(p), t_grid[i - 1], t_grid[i],
                          std::max(ode.rtol, 1e-12));
      observe(t_grid[i], p);
      ++result.stats.n_steps;
    }
  }

  result.series.meta["solver"] = "piqs";
  result.series.meta["N"] = p0.N;
  result.series.meta["max_norm_drift"] = result.max_norm_drift;
  result.series.meta["min_population"] = result.min_population;
  result.series.meta["implicit_fallback"] = result.used_implicit_fallback;
  return result;
}

}  // namespace dickesim::piqs
