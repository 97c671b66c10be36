#pragma once

#include "fastmix/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <variant>

namespace fastmix {

/// Couplings confined to |θ_ij| <= β. Fields stay free.
struct BoxSet {
  double beta = 0.0;
};

/// Spectral-norm ball ‖R(θ)‖₂ <= c on the coupling-magnitude matrix.
struct SpectralSet {
  double c = 0.0;
  double tolerance = 1e-8;
  int max_iterations = 10000;
};

using ConstraintSet = std::variant<BoxSet, SpectralSet>;

void validate(const ConstraintSet& set);
std::string describe(const ConstraintSet& set);

/// Symmetric N x N matrix with R_ij = |θ_ij| on edges and zeros elsewhere.
Eigen::MatrixXd coupling_matrix(const IsingModel& model, const Parameters& theta);

/// Largest absolute eigenvalue of a symmetric matrix.
double spectral_norm(const Eigen::MatrixXd& symmetric);

Parameters project_box(const IsingModel& model, const Parameters& theta, double beta);

/// Euclidean projection onto {θ : ‖R(θ)‖₂ <= c}. Works on the magnitude
/// matrix with Dykstra's alternating projections between the spectral ball
/// and the cone of nonnegative, edge-supported symmetric matrices, then puts
/// the original signs back.
Parameters project_spectral(const IsingModel& model, const Parameters& theta,
                            const SpectralSet& set);

Parameters project(const IsingModel& model, const Parameters& theta, const ConstraintSet& set);

bool is_feasible(const IsingModel& model, const Parameters& theta, const ConstraintSet& set,
                 double slack = 0.0);

}  // namespace fastmix
