#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>

#include "locgap/lattice.hpp"
#include "locgap/subspace.hpp"

namespace locgap {

struct EigOptions {
  double tol = 1e-10;            // relative to the operator norm scale
  Eigen::Index dense_limit = 5000;
  long max_iterations = 40000;   // operator applications (iterative path)
  std::uint64_t seed = 20240915;
  bool force_iterative = false;
  int krylov_cycle = 250;
};

struct SpectralReport {
  double min_eigenvalue = 0.0;
  std::string method;            // "dense" or "iterative"
  double residual_norm = 0.0;
  long iterations = 0;
  bool deflated_constant = false;
  double tolerance = 0.0;        // effective absolute residual tolerance
  Eigen::VectorXd eigenvector;   // witness; not serialized

  bool converged() const { return residual_norm <= tolerance; }
};

/// Type-erased symmetric operator: matrix-free apply plus an optional
/// dense materializer for the direct path.
struct LinearMap {
  Eigen::Index n = 0;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> apply;
  std::function<Eigen::MatrixXd()> dense;
};

LinearMap as_map(const CellOperator& op);
LinearMap as_map(const LatticeOperator& op);

/// Smallest eigenvalue over the whole space.
SpectralReport min_eigenvalue(const LinearMap& a, const EigOptions& opts = {});

/// Smallest eigenvalue restricted to the orthogonal complement of the
/// given unit vector (the constant direction). Dense solve up to
/// dense_limit, otherwise deflated Lanczos with full reorthogonalization.
SpectralReport min_eig_orth_const(const LinearMap& a, const Eigen::VectorXd& unit_constant,
                                  const EigOptions& opts = {});
SpectralReport min_eig_orth_const(const CellOperator& a, const EigOptions& opts = {});
SpectralReport min_eig_orth_const(const LatticeOperator& a, const EigOptions& opts = {});

struct PsdCertificate {
  SpectralReport spectral;
  double shift = 0.0;      // c in A - cB
  double threshold = 0.0;  // pass iff min eig >= -threshold
  bool pass = false;
};

/// Certifies A - cB >= -tol over the whole space.
PsdCertificate certify_psd(const CellOperator& a, const CellOperator& b, double c,
                           const EigOptions& opts = {});
PsdCertificate certify_psd(const LinearMap& d, double c, const EigOptions& opts = {});

/// <v, Av> / <v, v> in the volume-weighted inner product.
double rayleigh_quotient(const CellOperator& a, const CellVector& v);
/// Counting-measure Rayleigh quotient on the box lattice.
double rayleigh_quotient(const LatticeOperator& a, const Eigen::VectorXd& v);

std::string spectral_report_to_json(const SpectralReport& r);
std::string psd_certificate_to_json(const PsdCertificate& c);

}  // namespace locgap
