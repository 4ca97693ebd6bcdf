#pragma once

#include <optional>
#include <string>
#include <vector>

#include "locgap/rational.hpp"

namespace locgap {

/// Inputs of the dilute-gas bounds. Temperature is stored in units of
/// rho*a (the natural scale of the free-energy theorem); lengths are in
/// the same units as the scattering length a.
struct GasParameters {
  double rho_a3 = 1e-6;  // dimensionless density rho * a^3
  double a = 1.0;        // scattering length
  double T = 0.0;        // temperature in units of rho*a
  double eta = 0.03125;  // exponent eta of the theorem
  double C_thm = 1.0;    // non-explicit constant of the theorem (input)
  double N = 1e6;        // particle number
  std::optional<double> box_side;  // L or R, same units as a

  double rho() const { return rho_a3 / (a * a * a); }
  double T_absolute() const { return T * rho() * a; }
  /// a * (rho a^3)^{-1/2-eta}: the box side of the free-energy theorem.
  double gp_eta_scale() const;

  void validate() const;  // throws std::invalid_argument on hard violations
  std::vector<std::string> regime_flags() const;
};

struct FreeEnergyBound {
  double total = 0.0;
  double mean_field_term = 0.0;
  double lhy_term = 0.0;
  double error_term = 0.0;
  double thermal_term = 0.0;
};

/// I(x) = 4 pi int_0^inf p^2 log(1 - e^{-sqrt(p^4 + x p^2)}) dp.
/// Adaptive Gauss-Kronrod (primary scheme).
double bogoliubov_integral(double x);
/// Independent tanh-sinh scheme for cross-validation.
double bogoliubov_integral_alt(double x);
/// I'(x) = 2 pi int_0^inf p^3 / sqrt(p^2+x) / (e^{p sqrt(p^2+x)} - 1) dp.
double bogoliubov_integral_deriv(double x);
/// -pi^{3/2} zeta(5/2) by direct series summation with tail correction:
/// the closed form of I(0).
double bogoliubov_series_zero();

/// The four terms of the free-energy lower bound at box volume `volume`
/// (= L^3 in units of a^3 when a = 1).
FreeEnergyBound free_energy_lower_bound(const GasParameters& p, double volume);

struct CondensationReport {
  double scale_R = 0.0;  // in units of a
  double bound_on_n_plus = 0.0;
  double depletion_fraction = 0.0;
  bool condensed = false;
  double epsilon = 0.5;
  /// Strong bound only: the intermediate form C L^2 N rho a (rho a^3)^{1/2+eta}.
  std::optional<double> intermediate_bound;
  /// Propagated bound only: largest R/a with depletion <= epsilon.
  std::optional<double> r_max_over_a;
};

/// Tr(n_+ Gamma_0) <= C N (rho a^3)^{1/2 - eta} at L = a (rho a^3)^{-1/2-eta}.
CondensationReport strong_condensation_bound(const GasParameters& p, double epsilon = 0.5);

/// Corollary bound C N rho R^2 a (rho a^3)^{1/2+eta} for R at or above the
/// GP+eta scale; errors below it.
CondensationReport propagate_condensation(const GasParameters& p, double R_over_a,
                                          double epsilon = 0.5);

/// kappa threshold (2 + 2 eta) / (5 + 3 eta) of the scaling remark.
double kappa_condensation_threshold(double eta);
Rational kappa_condensation_threshold(const Rational& eta);

enum class SplittingModel { leading_order, full };

struct SplittingSolution {
  double box_side = 0.0;
  double mu = 0.0;
  double m_star = 0.0;       // minimizer of F(m) - mu m over m >= 0
  double f_at_m_star = 0.0;  // F(m_star)
  double admissibility_cap = 0.0;  // 3 mu L^3 / (4 pi a)
  bool within_cap = false;
  bool convex_ok = false;  // sampled second differences nonnegative
};

/// Per-box free-energy model F(m) = 4 pi a m^2/L^3 (1 + LHY - error) +
/// thermal term with rho -> m/L^3; minimizes F(m) - mu m.
SplittingSolution optimal_splitting(const GasParameters& p, double L_n, double mu,
                                    SplittingModel model = SplittingModel::full);

/// mu with per-box minimizer exactly rho L_n^3 (8 pi a rho at leading order).
double find_balancing_mu(const GasParameters& p, double L_n,
                         SplittingModel model = SplittingModel::full);

std::string free_energy_to_json(const GasParameters& p, const FreeEnergyBound& b, double volume);
std::string condensation_to_json(const GasParameters& p, const CondensationReport& r,
                                 const std::string& kind);
std::string splitting_to_json(const GasParameters& p, const SplittingSolution& s);

}  // namespace locgap
