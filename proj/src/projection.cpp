#include "fastmix/projection.hpp"

#include <cmath>
#include <sstream>

namespace fastmix {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

Eigen::MatrixXd clip_spectrum(const Eigen::MatrixXd& symmetric, double c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric);
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(-c).cwiseMin(c);
  return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

// Nearest nonnegative symmetric matrix supported on the edge set.
Eigen::MatrixXd restrict_to_edges(const IsingModel& model, const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (const Edge& e : model.graph.edges()) {
    const double w = std::max(0.0, 0.5 * (m(e.i, e.j) + m(e.j, e.i)));
    out(e.i, e.j) = w;
    out(e.j, e.i) = w;
  }
  return out;
}

}  // namespace

void validate(const ConstraintSet& set) {
  std::visit(Overloaded{
                 [](const BoxSet& b) {
                   if (!(b.beta > 0.0)) throw InvalidInput("box radius beta must be positive");
                 },
                 [](const SpectralSet& s) {
                   if (!(s.c > 0.0 && s.c < 1.0))
                     throw InvalidInput("spectral bound c must lie in (0,1)");
                   if (!(s.tolerance > 0.0)) throw InvalidInput("tolerance must be positive");
                   if (s.max_iterations < 1) throw InvalidInput("max_iterations must be positive");
                 },
             },
             set);
}

std::string describe(const ConstraintSet& set) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const BoxSet& b) { os << "box(beta=" << b.beta << ")"; },
                 [&](const SpectralSet& s) {
                   os << "spectral(c=" << s.c << ", tolerance=" << s.tolerance << ")";
                 },
             },
             set);
  return os.str();
}

Eigen::MatrixXd coupling_matrix(const IsingModel& model, const Parameters& theta) {
  detail::check_parameters(model, theta);
  const int n = model.num_nodes();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  const auto& edges = model.graph.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double w = std::abs(theta[Eigen::Index(k)]);
    r(edges[k].i, edges[k].j) = w;
    r(edges[k].j, edges[k].i) = w;
  }
  return r;
}

double spectral_norm(const Eigen::MatrixXd& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Parameters project_box(const IsingModel& model, const Parameters& theta, double beta) {
  detail::check_parameters(model, theta);
  if (!(beta > 0.0)) throw InvalidInput("box radius beta must be positive");
  Parameters out = theta;
  out.head(model.num_edges()) = theta.head(model.num_edges()).cwiseMax(-beta).cwiseMin(beta);
  return out;
}

Parameters project_spectral(const IsingModel& model, const Parameters& theta,
                            const SpectralSet& set) {
  validate(ConstraintSet{set});
  const Eigen::MatrixXd start = coupling_matrix(model, theta);
  if (spectral_norm(start) <= set.c) return theta;

  Eigen::MatrixXd x = start;
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  Eigen::MatrixXd q = p;
  double residual = 0.0;
  bool converged = false;
  for (int it = 0; it < set.max_iterations; ++it) {
    const Eigen::MatrixXd y = clip_spectrum(x + p, set.c);
    p = x + p - y;
    const Eigen::MatrixXd next = restrict_to_edges(model, y + q);
    q = y + q - next;
    residual = (next - x).norm();
    x = next;
    if (residual < set.tolerance && spectral_norm(x) <= set.c + set.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("spectral projection did not converge in " +
                               std::to_string(set.max_iterations) + " iterations",
                           residual);

  // The last iterate can overshoot the ball by up to the tolerance; a uniform
  // rescale stays on the edge cone and lands exactly inside.
  const double norm = spectral_norm(x);
  if (norm > set.c) x *= set.c / norm;

  Parameters out = theta;
  const auto& edges = model.graph.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Eigen::Index idx(k);
    const double sign = theta[idx] > 0.0 ? 1.0 : (theta[idx] < 0.0 ? -1.0 : 0.0);
    out[idx] = sign * x(edges[k].i, edges[k].j);
  }
  return out;
}

Parameters project(const IsingModel& model, const Parameters& theta, const ConstraintSet& set) {
  validate(set);
  return std::visit(
      Overloaded{
          [&](const BoxSet& b) { return project_box(model, theta, b.beta); },
          [&](const SpectralSet& s) { return project_spectral(model, theta, s); },
      },
      set);
}

bool is_feasible(const IsingModel& model, const Parameters& theta, const ConstraintSet& set,
                 double slack) {
  detail::check_parameters(model, theta);
  return std::visit(
      Overloaded{
          [&](const BoxSet& b) {
            return model.num_edges() == 0 ||
                   theta.head(model.num_edges()).cwiseAbs().maxCoeff() <= b.beta + slack;
          },
          [&](const SpectralSet& s) {
            return spectral_norm(coupling_matrix(model, theta)) <= s.c + slack;
          },
      },
      set);
}

}  // namespace fastmix
