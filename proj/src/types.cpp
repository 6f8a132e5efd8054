#include "amm/types.hpp"

#include <cmath>

namespace amm {

namespace {
bool all_finite(const Eigen::Ref<const RowMat>& m) {
  return m.allFinite();
}
}  // namespace

void AtomicDistribution::validate() const {
  if (atoms.rows() < 1) throw InvalidArgument("distribution needs k >= 1 atoms");
  if (dim < 1) throw InvalidArgument("dim must be positive");
  if (atoms.cols() != dim)
    throw InvalidArgument("atom dimension does not match dim");
  if (weights.size() != atoms.rows())
    throw InvalidArgument("weights/atoms size mismatch");
  if (!all_finite(atoms)) throw InvalidArgument("non-finite atom coordinate");
  double sum = 0.0;
  for (int i = 0; i < weights.size(); ++i) {
    if (!(weights(i) >= 0.0)) throw InvalidArgument("negative weight");
    sum += weights(i);
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw InvalidArgument("weights must sum to 1 within 1e-12");
}

AtomicDistribution AtomicDistribution::point_mass(const VectorXd& mu) {
  AtomicDistribution d;
  d.dim = static_cast<int>(mu.size());
  d.atoms = mu.transpose();
  d.weights = VectorXd::Ones(1);
  return d;
}

AtomicDistribution AtomicDistribution::from_1d(
    const std::vector<double>& atoms, const std::vector<double>& weights) {
  if (atoms.size() != weights.size() || atoms.empty())
    throw InvalidArgument("from_1d: bad sizes");
  AtomicDistribution d;
  d.dim = 1;
  d.atoms.resize(static_cast<int>(atoms.size()), 1);
  d.weights.resize(static_cast<int>(weights.size()));
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    d.atoms(static_cast<int>(i), 0) = atoms[i];
    d.weights(static_cast<int>(i)) = weights[i];
  }
  return d;
}

void HeteroDataset::validate() const {
  if (points.rows() < 1) throw InvalidArgument("dataset must be nonempty");
  if (sigmas.size() != points.rows())
    throw InvalidArgument("sigma/point count mismatch");
  if (!all_finite(points)) throw InvalidArgument("non-finite sample value");
  for (int i = 0; i < sigmas.size(); ++i)
    if (!(sigmas(i) >= 0.0)) throw InvalidArgument("negative sigma");
}

void SphereNet::validate() const {
  const int d = dim();
  if (size() < d) throw InvalidArgument("net smaller than canonical basis");
  for (int i = 0; i < size(); ++i) {
    if (std::abs(directions.row(i).norm() - 1.0) > 1e-12)
      throw InvalidArgument("net direction not unit norm");
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (std::abs(directions(i, j) - (i == j ? 1.0 : 0.0)) > 0)
        throw InvalidArgument("canonical basis must lead the net");
}

void MomentVector::validate() const {
  if (values.empty()) throw InvalidArgument("moment vector must have L >= 1");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidArgument("non-finite moment");
}

void Subspace::validate() const {
  const MatrixXd gram = basis.transpose() * basis;
  for (int i = 0; i < gram.rows(); ++i) {
    for (int j = 0; j < gram.cols(); ++j) {
      const double target = i == j ? 1.0 : 0.0;
      if (std::abs(gram(i, j) - target) > 1e-10)
        throw InvalidArgument("subspace basis not orthonormal");
    }
  }
}

void EstimatorConfig::validate() const {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (!(delta > 0.0 && delta < 0.5))
    throw InvalidArgument("delta must lie in (0, 1/2)");
  if (net_extra_directions < 0)
    throw InvalidArgument("net_extra_directions must be >= 0");
}

void NoiseSchedule::validate() const {
  if (grid.size() < 2) throw InvalidArgument("schedule grid needs >= 2 points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] < grid[i - 1]))
      throw InvalidArgument("schedule grid must be strictly descending");
  if (grid.front() > T + 1e-12)
    throw InvalidArgument("grid exceeds horizon T");
}

NoiseSchedule NoiseSchedule::make_default(double radius, int steps,
                                          double sigma_min) {
  NoiseSchedule s;
  s.T = std::max(8.0 * radius, 1.0);
  s.grid.reserve(static_cast<std::size_t>(steps) + 1);
  const double ratio = std::pow(sigma_min / s.T, 1.0 / (steps - 1));
  double v = s.T;
  for (int i = 0; i < steps; ++i) {
    s.grid.push_back(v);
    v *= ratio;
  }
  s.grid.push_back(0.0);
  return s;
}

}  // namespace amm
