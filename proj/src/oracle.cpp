#include "dickesim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace dickesim::oracle {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat from_triplets(int dim, const Triplets& ts) {
  SpMat m(dim, dim);
  m.setFromTriplets(ts.begin(), ts.end());
  m.makeCompressed();
  return m;
}

}  // namespace

Operators build_operators(int N, int cap) {
  if (N < 1) throw std::domain_error("build_operators: N must be >= 1");
  if (N > cap)
    throw std::length_error("build_operators: N=" + std::to_string(N) +
                            " exceeds the 2^N resource cap " +
                            std::to_string(cap));
  const int dim = 1 << N;
  Operators ops;
  ops.N = N;

  Triplets tz, tp, tm;
  for (int n = 1; n <= N; ++n) {
    const int bit = 1 << (N - n);
    tz.clear();
    tp.clear();
    tm.clear();
    for (int i = 0; i < dim; ++i) {
      const bool down = (i & bit) != 0;
      tz.emplace_back(i, i, down ? -0.5 : 0.5);
      if (!down) tm.emplace_back(i | bit, i, 1.0);  // lowering: up -> down
      else       tp.emplace_back(i & ~bit, i, 1.0);
    }
    ops.jz_local.push_back(from_triplets(dim, tz));
    ops.jminus_local.push_back(from_triplets(dim, tm));
    ops.jplus_local.push_back(from_triplets(dim, tp));
  }

  ops.jz = ops.jz_local[0];
  ops.jplus = ops.jplus_local[0];
  ops.jminus = ops.jminus_local[0];
  for (int n = 1; n < N; ++n) {
    ops.jz += ops.jz_local[n];
    ops.jplus += ops.jplus_local[n];
    ops.jminus += ops.jminus_local[n];
  }
  ops.jpjm = (ops.jplus * ops.jminus).pruned();
  SpMat jz2 = (ops.jz * ops.jz).pruned();
  ops.j2 = (jz2 - ops.jz + ops.jpjm).pruned();
  ops.j2.makeCompressed();
  return ops;
}

namespace {

std::complex<double> trace_product(const SpMat& x, const MatrixXcd& rho) {
  std::complex<double> acc = 0.0;
  for (int k = 0; k < x.outerSize(); ++k)
    for (SpMat::InnerIterator it(x, k); it; ++it)
      acc += it.value() * rho(it.col(), it.row());
  return acc;
}

struct JumpChannel {
  const SpMat* op;
  SpMat opdag_op;
  double gamma;
};

std::vector<JumpChannel> collect_channels(const RateSet& rates,
                                          const Operators& ops) {
  std::vector<JumpChannel> chans;
  auto add = [&](const SpMat& o, double g) {
    if (g == 0.0) return;
    JumpChannel c;
    c.op = &o;
    c.opdag_op = (SpMat(o.transpose()) * o).pruned();
    c.gamma = g;
    chans.push_back(std::move(c));
  };
  add(ops.jminus, rates.gamma_s);
  for (const auto& o : ops.jminus_local) add(o, rates.gamma_l);
  for (const auto& o : ops.jz_local) add(o, rates.gamma_d);
  return chans;
}

MatrixXcd apply_channels(const std::vector<JumpChannel>& chans, double omega0,
                         const SpMat& jz, const MatrixXcd& rho) {
  MatrixXcd out = MatrixXcd::Zero(rho.rows(), rho.cols());
  if (omega0 != 0.0) {
    const std::complex<double> iw(0.0, omega0);
    out += iw * (jz * rho - rho * jz);
  }
  for (const auto& c : chans) {
    // (g/2) L_O[rho] = g (O rho O^dag - (O^dag O rho + rho O^dag O)/2)
    out += c.gamma * ((*c.op) * rho * SpMat(c.op->transpose()) -
                      0.5 * (c.opdag_op * rho + rho * c.opdag_op));
  }
  return out;
}

}  // namespace

MatrixXcd lindblad_rhs(const MatrixXcd& rho, const RateSet& rates,
                       const Operators& ops) {
  const int dim = 1 << ops.N;
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument("lindblad_rhs: dimension mismatch");
  return apply_channels(collect_channels(rates, ops), rates.omega0, ops.jz,
                        rho);
}

EvolveResult evolve(const MatrixXcd& rho0, const RateSet& rates,
                    std::span<const double> t_grid, const OdeOptions& ode,
                    bool keep_snapshots) {
  const int dim = static_cast<int>(rho0.rows());
  int N = 0;
  while ((1 << N) < dim) ++N;
  if ((1 << N) != dim || rho0.cols() != dim)
    throw std::invalid_argument("evolve: rho0 must be 2^N x 2^N");
  const Operators ops = build_operators(N);
  const auto chans = collect_channels(rates, ops);

  EvolveResult result;
  auto& jz_col = result.series.add_column("Jz");
  auto& j2_col = result.series.add_column("J2");
  auto& jpjm_col = result.series.add_column("JpJm");
  auto& jz2_col = result.series.add_column("Jz2");
  SpMat jz2 = (ops.jz * ops.jz).pruned();

  using Vec = Eigen::VectorXcd;
  Vec y0 = Eigen::Map<const Vec>(rho0.data(), rho0.size());

  auto rhs = [&](const Vec& y, double, Vec& dydt) {
    Eigen::Map<const MatrixXcd> rho(y.data(), dim, dim);
    MatrixXcd d = apply_channels(chans, rates.omega0, ops.jz, rho);
    dydt = Eigen::Map<const Vec>(d.data(), d.size());
  };

  auto observe = [&](double t, const Vec& y) {
    Eigen::Map<const MatrixXcd> rho(y.data(), dim, dim);
    const double trace_drift = std::abs(rho.trace() - 1.0);
    const double herm_drift =
        (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    result.max_trace_drift = std::max(result.max_trace_drift, trace_drift);
    result.max_hermiticity_drift =
        std::max(result.max_hermiticity_drift, herm_drift);
    if (trace_drift > 1e-6 || herm_drift > 1e-6)
      throw std::runtime_error(
          "oracle::evolve: invariant drift beyond 1e-6 at t=" +
          std::to_string(t) + " (trace " + std::to_string(trace_drift) +
          ", hermiticity " + std::to_string(herm_drift) + ")");
    result.series.t.push_back(t);
    jz_col.push_back(trace_product(ops.jz, rho).real());
    j2_col.push_back(trace_product(ops.j2, rho).real());
    jpjm_col.push_back(trace_product(ops.jpjm, rho).real());
    jz2_col.push_back(trace_product(jz2, rho).real());
    if (keep_snapshots) result.snapshots.emplace_back(rho);
  };

  result.stats = integrate_ode(rhs, std::move(y0), t_grid, observe, ode);
  result.series.meta["solver"] = "oracle";
  result.series.meta["N"] = N;
  result.series.meta["max_trace_drift"] = result.max_trace_drift;
  result.series.meta["max_hermiticity_drift"] = result.max_hermiticity_drift;
  return result;
}

namespace {

/// One ladder of states with common j built during iterative coupling;
/// columns run over m = j, j-1, ..., -j.
struct Ladder {
  HalfInt j;
  MatrixXd cols;
};

}  // namespace

DickeBasis build_dicke_basis(int N, int cap) {
  if (N < 1) throw std::domain_error("build_dicke_basis: N must be >= 1");
  if (N > cap)
    throw std::length_error("build_dicke_basis: N exceeds the basis cap " +
                            std::to_string(cap));

  std::vector<Ladder> level;
  {
    Ladder first;
    first.j = HalfInt::from_doubled(1);
    first.cols = MatrixXd::Identity(2, 2);  // |up> = e0 (m=+1/2), |down> = e1
    level.push_back(std::move(first));
  }

  for (int n = 2; n <= N; ++n) {
    std::vector<Ladder> next;
    const auto old_dim = level.front().cols.rows();
    for (const auto& parent : level) {
      const auto dj2 = parent.j.doubled();     // 2*jbar
      const double denom = dj2 + 1.0;          // 2*jbar + 1
      auto parent_col = [&](std::int64_t dm) -> Eigen::VectorXd {
        // column of |jbar, m> with doubled m = dm; zero outside the ladder
        if (dm > dj2 || dm < -dj2) return Eigen::VectorXd::Zero(old_dim);
        return parent.cols.col((dj2 - dm) / 2);
      };
      auto embed = [&](const Eigen::VectorXd& v, bool up) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * old_dim);
        for (Eigen::Index i = 0; i < old_dim; ++i)
          out(2 * i + (up ? 0 : 1)) = v(i);
        return out;
      };

      // child j = jbar + 1/2
      {
        Ladder child;
        child.j = HalfInt::from_doubled(dj2 + 1);
        const auto dim_m = dj2 + 2;  // 2j+1
        child.cols.resize(2 * old_dim, dim_m);
        for (std::int64_t dm = dj2 + 1, c = 0; dm >= -(dj2 + 1); dm -= 2, ++c) {
          const double ap = std::sqrt((dj2 + dm + 1) / (2.0 * denom));  // (jbar+m+1/2)/(2jbar+1)
          const double am = std::sqrt((dj2 - dm + 1) / (2.0 * denom));  // (jbar-m+1/2)/(2jbar+1)
          child.cols.col(c) = ap * embed(parent_col(dm - 1), true) +
                              am * embed(parent_col(dm + 1), false);
        }
        next.push_back(std::move(child));
      }
      // child j = jbar - 1/2 (absent for jbar = 0)
      if (dj2 > 0) {
        Ladder child;
        child.j = HalfInt::from_doubled(dj2 - 1);
        const auto dim_m = dj2;  // 2j+1
        child.cols.resize(2 * old_dim, dim_m);
        for (std::int64_t dm = dj2 - 1, c = 0; dm >= -(dj2 - 1); dm -= 2, ++c) {
          const double ap = std::sqrt((dj2 - dm + 1) / (2.0 * denom));
          const double am = std::sqrt((dj2 + dm + 1) / (2.0 * denom));
          child.cols.col(c) = -ap * embed(parent_col(dm - 1), true) +
                              am * embed(parent_col(dm + 1), false);
        }
        next.push_back(std::move(child));
      }
    }
    level = std::move(next);
  }

  // alpha = rank of the ladder within its j group, in coupling-history order
  std::stable_sort(level.begin(), level.end(),
                   [](const Ladder& a, const Ladder& b) { return a.j > b.j; });

  const DickeSpace space(N);
  DickeBasis basis;
  basis.N = N;
  const Eigen::Index dim = Eigen::Index(1) << N;
  basis.vectors.resize(dim, dim);
  basis.labels.resize(dim);
  basis.block_offset.assign(space.size(), 0);
  basis.block_size.assign(space.size(), 0);

  // count ladders per j, then lay columns out block by block
  std::map<std::int64_t, int> seen_alpha;
  std::vector<int> cursor(space.size(), 0);
  for (std::size_t k = 0; k < space.size(); ++k)
    basis.block_size[k] =
        static_cast<int>(degeneracy_Dj(N, space[k].j).convert_to<long long>());
  int off = 0;
  for (std::size_t k = 0; k < space.size(); ++k) {
    basis.block_offset[k] = off;
    off += basis.block_size[k];
  }

  for (const auto& ladder : level) {
    const int alpha = seen_alpha[ladder.j.doubled()]++;
    const auto dj2 = ladder.j.doubled();
    for (std::int64_t dm = dj2, c = 0; dm >= -dj2; dm -= 2, ++c) {
      const DickeIndex idx{HalfInt::from_doubled(dj2), HalfInt::from_doubled(dm)};
      const auto k = space.index_of(idx);
      const int col = basis.block_offset[k] + cursor[k]++;
      basis.vectors.col(col) = ladder.cols.col(c);
      basis.labels[col] = {idx.j, idx.m, alpha};
    }
  }
  return basis;
}

MatrixXcd dicke_diagonal_state(const DickeBasis& basis, const DickeSpace& space,
                               DickeIndex idx) {
  const auto block = basis.block(space, idx);
  MatrixXd p = block * block.transpose() / static_cast<double>(block.cols());
  return p.cast<std::complex<double>>();
}

std::vector<double> populations(const DickeBasis& basis,
                                const DickeSpace& space, const MatrixXcd& rho) {
  std::vector<double> p(space.size(), 0.0);
  const MatrixXcd proj = rho * basis.vectors.cast<std::complex<double>>();
  for (std::size_t k = 0; k < space.size(); ++k) {
    double acc = 0.0;
    for (int c = 0; c < basis.block_size[k]; ++c) {
      const int col = basis.block_offset[k] + c;
      acc += basis.vectors.col(col)
                 .cast<std::complex<double>>()
                 .dot(proj.col(col))
                 .real();
    }
    p[k] = acc;
  }
  return p;
}

TransitionRates measure_channel_rates(const DickeBasis& basis,
                                      const DickeSpace& space, Channel ch) {
  const int N = basis.N;
  const Operators ops = build_operators(N, std::max(N, default_operator_cap));
  std::vector<const SpMat*> jump_ops;
  int dm_step = 0;  // doubled change of m caused by the jump
  switch (ch) {
    case Channel::S:
      jump_ops.push_back(&ops.jminus);
      dm_step = -2;
      break;
    case Channel::L:
      for (const auto& o : ops.jminus_local) jump_ops.push_back(&o);
      dm_step = -2;
      break;
    case Channel::D:
      for (const auto& o : ops.jz_local) jump_ops.push_back(&o);
      dm_step = 0;
      break;
  }

  // group basis columns by m shell for blockwise projection
  std::map<std::int64_t, std::vector<int>> shell;  // doubled m -> columns
  for (int c = 0; c < basis.vectors.cols(); ++c)
    shell[basis.labels[c].m.doubled()].push_back(c);

  TransitionRates rates;
  rates.transfer.assign(space.size(), {});
  rates.outflow.assign(space.size(), 0.0);
  std::map<std::pair<std::size_t, std::size_t>, double> bins;

  for (const auto& [dm, cols] : shell) {
    const auto dest_it = shell.find(dm + dm_step);
    MatrixXd b_src(basis.vectors.rows(), cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i)
      b_src.col(i) = basis.vectors.col(cols[i]);

    MatrixXd b_dst;
    const std::vector<int>* dst_cols = nullptr;
    if (dest_it != shell.end()) {
      dst_cols = &dest_it->second;
      b_dst.resize(basis.vectors.rows(), dst_cols->size());
      for (std::size_t i = 0; i < dst_cols->size(); ++i)
        b_dst.col(i) = basis.vectors.col((*dst_cols)[i]);
    }

    for (const SpMat* op : jump_ops) {
      const MatrixXd w = (*op) * b_src;
      // outflow <O^dag O> per source column
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& lab = basis.labels[cols[c]];
        const auto src = space.index_of({lab.j, lab.m});
        rates.outflow[src] += w.col(c).squaredNorm();
      }
      if (!dst_cols) continue;
      const MatrixXd m = b_dst.transpose() * w;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& sl = basis.labels[cols[c]];
        const auto src = space.index_of({sl.j, sl.m});
        for (std::size_t r = 0; r < dst_cols->size(); ++r) {
          const double v = m(r, c);
          if (v == 0.0) continue;
          const auto& dl = basis.labels[(*dst_cols)[r]];
          const auto dst = space.index_of({dl.j, dl.m});
          bins[{src, dst}] += v * v;
        }
      }
    }
  }

  for (std::size_t k = 0; k < space.size(); ++k) {
    const double dj = static_cast<double>(basis.block_size[k]);
    rates.outflow[k] /= dj;
  }
  for (const auto& [key, val] : bins) {
    const auto [src, dst] = key;
    const double dj = static_cast<double>(basis.block_size[src]);
    const double rate = val / dj;
    if (rate > 1e-14 * std::max(1.0, rates.outflow[src]))
      rates.transfer[src].emplace_back(dst, rate);
  }
  return rates;
}

TransitionRates measure_channel_rates(int N, Channel ch) {
  const DickeSpace space(N);
  const DickeBasis basis = build_dicke_basis(N);
  return measure_channel_rates(basis, space, ch);
}

void write_snapshot(const std::string& path, int N, double t,
                    const MatrixXcd& rho) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  const std::uint32_t n32 = static_cast<std::uint32_t>(N);
  std::fwrite(&n32, sizeof(n32), 1, f);
  std::fwrite(&t, sizeof(t), 1, f);
  for (Eigen::Index r = 0; r < rho.rows(); ++r)
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
      const double re = rho(r, c).real(), im = rho(r, c).imag();
      std::fwrite(&re, sizeof(re), 1, f);
      std::fwrite(&im, sizeof(im), 1, f);
    }
  std::fclose(f);
}

MatrixXcd read_snapshot(const std::string& path, int& N, double& t) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::uint32_t n32 = 0;
  if (std::fread(&n32, sizeof(n32), 1, f) != 1 ||
      std::fread(&t, sizeof(t), 1, f) != 1) {
    std::fclose(f);
    throw std::runtime_error("snapshot header truncated: " + path);
  }
  N = static_cast<int>(n32);
  const Eigen::Index dim = Eigen::Index(1) << N;
  MatrixXcd rho(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) {
      double re = 0.0, im = 0.0;
      if (std::fread(&re, sizeof(re), 1, f) != 1 ||
          std::fread(&im, sizeof(im), 1, f) != 1) {
        std::fclose(f);
        throw std::runtime_error("snapshot payload truncated: " + path);
      }
      rho(r, c) = {re, im};
    }
  std::fclose(f);
  return rho;
}

}  // namespace dickesim::oracle
