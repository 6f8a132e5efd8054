#include "amm/moments.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

namespace amm {

MomentVector moments_of(const AtomicDistribution& dist, int L) {
  if (dist.dim != 1) throw InvalidArgument("moments_of: dim must be 1");
  if (L < 1) throw InvalidArgument("moments_of: L must be >= 1");
  MomentVector m;
  m.values.assign(L, 0.0);
  for (int i = 0; i < dist.k(); ++i) {
    const double w = dist.weights(i);
    const double mu = dist.atoms(i, 0);
    double p = 1.0;
    for (int r = 1; r <= L; ++r) {
      p *= mu;
      m.values[r - 1] += w * p;
    }
  }
  return m;
}

namespace {

// One linear-matrix-inequality block S(m) = B + sum_t m_{t+1} E_t >= 0.
struct LmiBlock {
  MatrixXd B;
  std::vector<MatrixXd> E;  // E[t] multiplies m_{t+1}, t = 0..L-1
  int size = 0;

  MatrixXd eval(const std::vector<double>& m) const {
    MatrixXd s = B;
    for (std::size_t t = 0; t < E.size(); ++t)
      if (E[t].size() > 0) s += m[t] * E[t];
    return s;
  }
};

// Adds coefficient `w` for moment m_idx at cell (i, j) of the block
// (idx = 0 means the fixed m_0 = 1, which lands in the constant part).
void add_entry(LmiBlock& blk, int i, int j, int idx, double w, int L) {
  if (idx == 0) {
    blk.B(i, j) += w;
  } else if (idx <= L) {
    if (blk.E[idx - 1].size() == 0)
      blk.E[idx - 1] = MatrixXd::Zero(blk.size, blk.size);
    blk.E[idx - 1](i, j) += w;
  }
}

LmiBlock make_block(int size, int L) {
  LmiBlock blk;
  blk.size = size;
  blk.B = MatrixXd::Zero(size, size);
  blk.E.resize(L);
  return blk;
}

// The Hankel characterization of the moment space of [a, b] at odd order L.
std::vector<LmiBlock> build_blocks(int L, double a, double b) {
  std::vector<LmiBlock> blocks;
  for (int r = 2; r <= L - 1; r += 2) {  // M_{0,r} >= 0
    const int s = r / 2 + 1;
    LmiBlock blk = make_block(s, L);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) add_entry(blk, i, j, i + j, 1.0, L);
    blocks.push_back(std::move(blk));
  }
  for (int r = 1; r <= L; r += 2) {  // b M_{0,r-1} >= M_{1,r} >= a M_{0,r-1}
    const int s = (r - 1) / 2 + 1;
    LmiBlock upper = make_block(s, L);
    LmiBlock lower = make_block(s, L);
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) {
        add_entry(upper, i, j, i + j, b, L);
        add_entry(upper, i, j, i + j + 1, -1.0, L);
        add_entry(lower, i, j, i + j + 1, 1.0, L);
        add_entry(lower, i, j, i + j, -a, L);
      }
    }
    blocks.push_back(std::move(upper));
    blocks.push_back(std::move(lower));
  }
  return blocks;
}

double min_eigenvalue(const MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double worst_violation(const std::vector<LmiBlock>& blocks,
                       const std::vector<double>& m) {
  double worst = 0.0;
  for (const auto& blk : blocks)
    worst = std::max(worst, -min_eigenvalue(blk.eval(m)));
  return worst;
}

bool strictly_feasible(const std::vector<LmiBlock>& blocks,
                       const std::vector<double>& m) {
  for (const auto& blk : blocks) {
    Eigen::LLT<MatrixXd> llt(blk.eval(m));
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

// Strictly interior start: equal weights on (L+1)/2 equispaced atoms
// strictly inside (a, b).
std::vector<double> interior_start(int L, double a, double b) {
  const int k = (L + 1) / 2;
  AtomicDistribution d;
  d.dim = 1;
  d.atoms.resize(k, 1);
  d.weights = VectorXd::Constant(k, 1.0 / k);
  for (int i = 0; i < k; ++i)
    d.atoms(i, 0) = a + (b - a) * (i + 0.5) / k;
  return moments_of(d, L).values;
}

}  // namespace

bool moments_feasible(const MomentVector& m, std::pair<double, double> interval,
                      double tol) {
  m.validate();
  const int L = m.order();
  if (L % 2 == 0)
    throw InvalidArgument("moments_feasible: order must be odd");
  const auto blocks = build_blocks(L, interval.first, interval.second);
  for (const auto& blk : blocks) {
    const MatrixXd s = blk.eval(m.values);
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if (min_eigenvalue(s) < -tol * scale) return false;
  }
  return true;
}

MomentVector project_to_moment_space(const MomentVector& m,
                                     std::pair<double, double> interval) {
  m.validate();
  const double a = interval.first, b = interval.second;
  if (!(a < b)) throw InvalidArgument("project_to_moment_space: need a < b");
  const int L = m.order();
  if (L % 2 == 0)
    throw InvalidArgument("project_to_moment_space: order must be odd");

  // Feasible inputs are fixed points, exactly.
  if (moments_feasible(m, interval)) return m;

  const auto blocks = build_blocks(L, a, b);
  const std::vector<double>& y = m.values;
  std::vector<double> cur = interior_start(L, a, b);
  if (!strictly_feasible(blocks, cur))
    throw ConvergenceFailure("project_to_moment_space: interior start failed",
                             cur, worst_violation(blocks, cur));

  // Log-barrier path following on 1/2 ||m - y||^2 with damped Newton inner
  // iterations. The duality gap at barrier weight mu is mu * sum of block
  // sizes, so the final mu leaves the objective within ~1e-6 of optimal.
  auto barrier_value = [&](const std::vector<double>& mm, double mu,
                           bool* feasible) -> double {
    double f = 0.0;
    for (int t = 0; t < L; ++t) {
      const double d = mm[t] - y[t];
      f += 0.5 * d * d;
    }
    for (const auto& blk : blocks) {
      Eigen::LLT<MatrixXd> llt(blk.eval(mm));
      if (llt.info() != Eigen::Success) {
        *feasible = false;
        return 0.0;
      }
      double logdet = 0.0;
      for (int i = 0; i < blk.size; ++i)
        logdet += std::log(llt.matrixL()(i, i));
      f -= mu * 2.0 * logdet;
    }
    *feasible = true;
    return f;
  };

  double start_dist2 = 0.0;
  for (int t = 0; t < L; ++t)
    start_dist2 += (cur[t] - y[t]) * (cur[t] - y[t]);
  double mu = std::max(1e-2, 0.5 * start_dist2);
  const double mu_final = 1e-13;
  const int max_total_iters = 20000;
  int iters = 0;

  while (true) {
    for (int inner = 0; inner < 200; ++inner) {
      if (++iters > max_total_iters)
        throw ConvergenceFailure("project_to_moment_space: iteration cap",
                                 cur, worst_violation(blocks, cur));

      // Gradient and Hessian of the barrier objective.
      VectorXd g(L);
      for (int t = 0; t < L; ++t) g(t) = cur[t] - y[t];
      MatrixXd H = MatrixXd::Identity(L, L);
      for (const auto& blk : blocks) {
        const MatrixXd s = blk.eval(cur);
        const MatrixXd w = s.llt().solve(MatrixXd::Identity(blk.size, blk.size));
        std::vector<MatrixXd> we(L);
        for (int t = 0; t < L; ++t) {
          if (blk.E[t].size() == 0) continue;
          we[t] = w * blk.E[t];
          g(t) -= mu * we[t].trace();
        }
        for (int s1 = 0; s1 < L; ++s1) {
          if (blk.E[s1].size() == 0) continue;
          for (int s2 = s1; s2 < L; ++s2) {
            if (blk.E[s2].size() == 0) continue;
            const double hval = mu * (we[s1] * we[s2]).trace();
            H(s1, s2) += hval;
            if (s2 != s1) H(s2, s1) += hval;
          }
        }
      }

      const VectorXd step = H.ldlt().solve(-g);
      const double gnorm = g.norm();
      const double decrement = -g.dot(step);
      if (gnorm < std::max(1e-12, 1e-4 * mu) || decrement < 1e-24) break;

      bool ok = false;
      double f0 = barrier_value(cur, mu, &ok);
      double t = 1.0;
      std::vector<double> trial(L);
      bool moved = false;
      while (t > 1e-14) {
        for (int i = 0; i < L; ++i) trial[i] = cur[i] + t * step(i);
        bool feas = false;
        const double f1 = barrier_value(trial, mu, &feas);
        if (feas && f1 <= f0 - 1e-4 * t * decrement) {
          cur = trial;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
    }
    if (mu <= mu_final) break;
    mu = std::max(mu * 0.15, mu_final);
  }

  MomentVector out;
  out.values = cur;
  return out;
}

AtomicDistribution gauss_quadrature(
    const MomentVector& m, int k,
    std::optional<std::pair<double, double>> interval) {
  m.validate();
  if (k < 1) throw InvalidArgument("gauss_quadrature: k must be >= 1");
  if (m.order() < 2 * k - 1)
    throw InvalidArgument("gauss_quadrature: need moments up to order 2k-1");

  // Moments with the fixed m_0 = 1 in front: mom[r] = m_r.
  std::vector<double> mom(static_cast<std::size_t>(2 * k), 0.0);
  mom[0] = 1.0;
  for (int r = 1; r <= 2 * k - 1; ++r) mom[r] = m.values[r - 1];

  // Numerical rank of the moment matrix determines the true support size.
  int rank = 1;
  for (int j = k; j >= 1; --j) {
    MatrixXd h(j, j);
    for (int i = 0; i < j; ++i)
      for (int l = 0; l < j; ++l) h(i, l) = mom[i + l];
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h, Eigen::EigenvaluesOnly);
    const double lmax = std::max(1.0, es.eigenvalues().maxCoeff());
    if (es.eigenvalues().minCoeff() > 1e-10 * lmax) {
      rank = j;
      break;
    }
  }

  std::vector<double> roots;
  if (rank == 1) {
    roots.push_back(mom[1]);
  } else {
    // Monic orthogonal polynomial: x^rank - sum_j c_j x^j with Hankel solve.
    MatrixXd h(rank, rank);
    VectorXd rhs(rank);
    for (int i = 0; i < rank; ++i) {
      for (int j = 0; j < rank; ++j) h(i, j) = mom[i + j];
      rhs(i) = mom[i + rank];
    }
    const VectorXd c = h.ldlt().solve(rhs);

    MatrixXd companion = MatrixXd::Zero(rank, rank);
    for (int i = 1; i < rank; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < rank; ++i) companion(i, rank - 1) = c(i);
    Eigen::EigenSolver<MatrixXd> es(companion);
    for (int i = 0; i < rank; ++i) {
      const std::complex<double> z = es.eigenvalues()(i);
      if (std::abs(z.imag()) >= 1e-7)
        throw NumericalDegeneracy(
            "gauss_quadrature: complex root residual above tolerance");
      roots.push_back(z.real());
    }
  }

  if (interval) {
    for (double& r : roots)
      r = std::clamp(r, interval->first, interval->second);
  }
  std::sort(roots.begin(), roots.end());

  // Merge near-coincident roots.
  std::vector<double> atoms;
  for (double r : roots) {
    if (!atoms.empty() && r - atoms.back() < 1e-7) {
      atoms.back() = 0.5 * (atoms.back() + r);
    } else {
      atoms.push_back(r);
    }
  }
  const int ka = static_cast<int>(atoms.size());

  // Vandermonde system sum_j w_j x_j^i = m_i, i = 0..rank-1; least squares
  // when merging reduced the support.
  MatrixXd v(rank, ka);
  VectorXd rhs(rank);
  for (int i = 0; i < rank; ++i) {
    for (int j = 0; j < ka; ++j) v(i, j) = std::pow(atoms[j], i);
    rhs(i) = mom[i];
  }
  // Rank-revealing QR covers both the square solve and the least-squares
  // case after root merging reduced the support.
  VectorXd w = v.colPivHouseholderQr().solve(rhs);

  // Clip tiny negatives from ill-conditioning and renormalize.
  double sum = 0.0;
  for (int j = 0; j < ka; ++j) {
    w(j) = std::max(w(j), 0.0);
    sum += w(j);
  }
  AtomicDistribution out;
  out.dim = 1;
  if (sum <= 0.0) {
    out.atoms.resize(ka, 1);
    for (int j = 0; j < ka; ++j) out.atoms(j, 0) = atoms[j];
    out.weights = VectorXd::Constant(ka, 1.0 / ka);
    return out;
  }
  // Drop zero-weight atoms.
  std::vector<double> fa, fw;
  for (int j = 0; j < ka; ++j) {
    if (w(j) > 0.0) {
      fa.push_back(atoms[j]);
      fw.push_back(w(j) / sum);
    }
  }
  if (fa.empty()) {
    fa.push_back(atoms[0]);
    fw.push_back(1.0);
  }
  out.atoms.resize(static_cast<int>(fa.size()), 1);
  out.weights.resize(static_cast<int>(fw.size()));
  for (std::size_t j = 0; j < fa.size(); ++j) {
    out.atoms(static_cast<int>(j), 0) = fa[j];
    out.weights(static_cast<int>(j)) = fw[j];
  }
  return out;
}

}  // namespace amm
