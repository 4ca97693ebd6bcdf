#pragma once

#include <optional>
#include <string>
#include <vector>

#include "locgap/spectral.hpp"

namespace locgap {

struct NamedCheck {
  std::string name;
  SpectralReport report;
  bool pass = false;
};

struct TheoremReport {
  std::string theorem;  // "theorem1" or "theorem2"
  int ell_inv = 0;
  int dimension = 0;
  double claimed_constant = 0.0;
  double measured_min_eigenvalue = 0.0;
  bool pass = false;
  std::vector<NamedCheck> sub_checks;
  double runtime_seconds = 0.0;
  std::optional<double> c_emp;  // theorem2 only: measured / ell^2
};

/// c(ell) = (1 - cos pi*ell) / (4 + 1 - cos pi*ell).
double theorem1_constant(int ell_inv);

/// Common refinement used by all Theorem-1 workflows: standard + shifted
/// partitions plus the uniform half grid (the half-cell breakpoints that
/// the shifted family is offset by), giving uniform cells of side ell/2.
GridPtr theorem1_refinement_grid(int ell_inv, int dim);

/// Common refinement of the whole scale family ell_n = 1/(ell_inv - n).
GridPtr theorem2_refinement_grid(int ell_inv, int dim);

/// ell * sum_n Q_{ell_n} on the given grid (structural operator).
CellOperator theorem2_operator(int ell_inv, int dim, const GridPtr& grid);

/// The end-to-end Theorem-1 certificate: smallest eigenvalue of
/// (Q_ell + Q_ell^shift) - c(ell) Q on the refinement grid.
SpectralReport theorem1_main_inequality(int ell_inv, int dim, const EigOptions& opts = {});

/// Full Theorem-1 report: (a) projection property of Q_ell and
/// Q_ell^shift, (b) the Cauchy-Schwarz bound P Q^sh P <= 2(Q+Q^sh),
/// (c) exact interior weights of the lattice form, (d) domination of the
/// reference Laplacian, (e) the main inequality.
TheoremReport verify_theorem1(int ell_inv, int dim, const EigOptions& opts = {});

struct InteriorWeightReport {
  int ell_inv = 0;
  int dim = 0;
  // Indexed by |k-s|_1 - 1: nearest neighbour, face diagonal, body
  // diagonal as dimensionally appropriate.
  std::vector<long long> class_edge_counts;
  std::vector<Rational> expected;
  long long mismatches = 0;
  bool all_exact = false;  // every interior-pattern edge matches exactly
};

/// Classifies edges of theorem1_L whose per-axis overlap pattern is fully
/// interior and compares them with the closed-form weights (1/16, 1/32,
/// 1/64 in d=3). Edges touching the boundary pattern are excluded.
InteriorWeightReport check_interior_weights(int ell_inv, int dim);

struct OptimalityRow {
  int ell_inv = 0;
  double ell = 0.0;
  double ratio = 0.0;         // r(ell) = <u, (Q+Q^sh) u> / |Q u|^2
  double pi2l2_over_8 = 0.0;  // leading term of the Remark
  double c_of_ell = 0.0;
};

struct OptimalityScan {
  int dimension = 1;
  std::vector<OptimalityRow> rows;
  double k_lsq = 0.0;   // least-squares fit of |r - pi^2 l^2/8| = K l^3
  double k_max = 0.0;   // max_i |r_i - pi^2 l_i^2/8| / l_i^3
  double slope = 0.0;   // log-log slope of r vs ell
  bool ratio_above_c = false;
};

/// Rayleigh-quotient scan of the Remark's test function
/// u = sum_s cos(pi ell/2 (s+1/2)) on half cells along x_1.
OptimalityScan verify_optimality_scan(const std::vector<int>& ell_inv_list, int dim = 1);

/// C_emp(ell) = min eig of ell * sum_n Q_{ell_n} on the complement of
/// constants, divided by ell^2; passes against the configured floor.
TheoremReport verify_theorem2(int ell_inv, int dim, double c_min = 0.01,
                              bool matrix_free = false, const EigOptions& opts = {});

struct LmGapReport {
  int ell_inv = 0;
  int m = 0;
  int dim = 0;
  double gap = 0.0;            // min eig of theorem2_L on complement of constants
  double gap_over_ell = 0.0;   // candidate normalization C/ell reading of Eq. 16
  double gap_times_ell = 0.0;  // candidate normalization C*ell reading
  SpectralReport spectral;
};

LmGapReport measure_Lm_gap(int ell_inv, int m, int dim, const EigOptions& opts = {});

struct DistanceSumProfile {
  int ell_inv = 0;
  Rational normalized_min;  // ell * min_{k,m} sum_n d((k+1)(m-n)/(ell_inv - m), Z)
  int argmin_k = 0;
  int argmin_m = 0;
};

/// Exhaustive exact scan of the distance-to-integer sums behind Eq. 18.
DistanceSumProfile distance_sum_profile(int ell_inv);

/// Unnormalized sum over the scale family at fixed (k, m).
Rational distance_sum_value(int ell_inv, int k, int m);

/// Max abs entry deviation between theorem2_L(ell_inv, m, d) and the
/// cell-space conjugation G (sum_n Q_{ell_n}) G*.
double cross_check_lattice_vs_cellspace(int ell_inv, int m, int dim);

std::string theorem_report_to_json(const TheoremReport& r);
std::string optimality_scan_to_json(const OptimalityScan& s);
std::string optimality_scan_to_csv(const OptimalityScan& s);
std::string lm_gap_to_json(const LmGapReport& r);
std::string distance_profile_to_json(const DistanceSumProfile& p);
std::string interior_weights_to_json(const InteriorWeightReport& r);

}  // namespace locgap
