#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "fsde/potential.hpp"
#include "fsde/rng.hpp"
#include "fsde/solver.hpp"

namespace fsde {

/// Density of the Bernstein representation t^(-alpha)/Gamma(1-alpha) = int e^(-lambda t) rho(lambda) dlambda.
double rho(double lambda, double alpha);

/// gamma(t) = t^(-alpha) / Gamma(1-alpha).
double power_kernel(double t, double alpha);

struct Mode {
  double lambda;
  double c;
};

/// Finite sum-of-exponentials surrogate sum_i c_i exp(-lambda_i t) of the power kernel.
struct ModeSet {
  std::vector<Mode> modes;
  double alpha = 0.5;
  double t_min = 0.0, t_max = 0.0;
  double fit_error = 0.0;  // sup relative deviation on the 200-point check grid

  double kernel(double t) const;
  double total_mass() const;  // kernel(0)
  std::string to_json() const;
  static ModeSet from_json(const std::string& text);
};

/// Log-equispaced quadrature of the Bernstein integral over rates
/// [1/t_max, 1/t_min] widened by two decades each side. M - 1 nodes carry the
/// panel weights; the last mode lumps the omitted slow rates.
ModeSet fit_modes(double alpha, double t_min, double t_max, int M);

/// Sup relative error of the fitted kernel on 200 log-spaced points of [t_min, t_max].
double kernel_fit_error(const ModeSet& modes, double t_min, double t_max);

/// Overdamped embedded dynamics. The shifted variables u_i = z_i + c_i x take an
/// exact Gaussian step for the part linear in x; the constraint V'(x) = sum_i z_i
/// is then solved for the new position. Exact in law for linear V'.
class EmbeddedIntegrator {
 public:
  EmbeddedIntegrator(const Potential& potential, const ModeSet& modes, double dt);
  SolutionPath simulate(const TimeGrid& grid, RngSpec rng, double x0) const;

 private:
  double position(double s, double guess, std::size_t n) const;

  Potential potential_;
  ModeSet modes_;
  double dt_;
  double C_ = 0.0, k_ref_ = 1.0;
  Eigen::MatrixXd P_, noise_;
  Eigen::VectorXd forcing_, c_;
};

SolutionPath simulate_embedded_overdamped(const Potential& potential, const ModeSet& modes, const TimeGrid& grid,
                                          RngSpec rng, double x0);

/// The bath noise R = sum z_i with the x-coupling removed; one path.
std::vector<double> simulate_free_noise(const ModeSet& modes, const TimeGrid& grid, RngSpec rng);

/// Free auxiliary variables after n_steps steps, for the per-mode FDT check.
std::vector<double> simulate_free_modes(const ModeSet& modes, const TimeGrid& grid, RngSpec rng);

struct GlePath {
  std::vector<double> q;
  std::vector<double> v;
};

/// Inertial GLE with the mode kernel. Potential kicks and drifts wrap an exact
/// Gaussian step of the velocity and the auxiliary variables.
/// Throws NumericalError if dt is too large for the potential's stiffness.
GlePath simulate_gle_mass(double m, const Potential& potential, const ModeSet& modes, const TimeGrid& grid,
                          RngSpec rng, double q0, double v0);

/// Largest dt accepted by simulate_gle_mass: 1/sqrt(Lip(V')/m), unbounded for V' = 0.
double gle_max_dt(double m, const Potential& potential);

}  // namespace fsde
