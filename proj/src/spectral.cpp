#include "locgap/spectral.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <lapacke.h>
#include <nlohmann/json.hpp>

namespace locgap {

namespace {

// Smallest eigenpair of a dense symmetric matrix via LAPACK dsyevr.
std::pair<double, Eigen::VectorXd> dense_smallest(Eigen::MatrixXd m) {
  const lapack_int n = static_cast<lapack_int>(m.rows());
  if (n == 0) throw std::invalid_argument("dense_smallest: empty matrix");
  std::vector<double> w(n);
  Eigen::MatrixXd z(n, 1);
  std::vector<lapack_int> isuppz(2);
  lapack_int found = 0;
  lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, m.data(), n, 0.0, 0.0, 1, 1,
                                   0.0, &found, w.data(), z.data(), n, isuppz.data());
  if (info != 0 || found < 1) throw std::runtime_error("dense_smallest: dsyevr failed");
  return {w[0], z.col(0)};
}

struct DeflatedMap {
  const LinearMap& a;
  const Eigen::VectorXd* c;  // unit vector; nullptr = no deflation

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
    Eigen::VectorXd in = x;
    if (c) in -= (c->dot(in)) * (*c);
    Eigen::VectorXd out(a.n);
    a.apply(in, out);
    if (c) out -= (c->dot(out)) * (*c);
    return out;
  }
};

SpectralReport solve_dense(const LinearMap& a, const Eigen::VectorXd* c, double tol) {
  SpectralReport rep;
  rep.method = "dense";
  rep.deflated_constant = c != nullptr;

  Eigen::MatrixXd m = a.dense();
  const Eigen::Index n = m.rows();
  const double norm_est = m.cwiseAbs().rowwise().sum().maxCoeff();
  Eigen::VectorXd v;
  if (!c) {
    auto [lambda, z] = dense_smallest(m);
    rep.min_eigenvalue = lambda;
    v = z;
  } else {
    if (n < 2) throw std::invalid_argument("min_eig_orth_const: space has no complement of constants");
    // Householder reflector H mapping the constant direction to e_{n-1};
    // the restricted operator is the leading (n-1) block of H M H.
    Eigen::VectorXd u = *c;
    u[n - 1] -= 1.0;
    double un = u.norm();
    if (un > 1e-14) {
      u /= un;
      Eigen::MatrixXd hm = m - 2.0 * u * (u.transpose() * m);
      m = hm - 2.0 * (hm * u) * u.transpose();
    }
    auto [lambda, z] = dense_smallest(m.topLeftCorner(n - 1, n - 1));
    rep.min_eigenvalue = lambda;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    full.head(n - 1) = z;
    if (un > 1e-14) full -= 2.0 * u * (u.dot(full));
    v = full;
  }
  v.normalize();

  DeflatedMap op{a, c};
  Eigen::VectorXd r = op(v);
  rep.residual_norm = (r - rep.min_eigenvalue * v).norm();
  rep.iterations = 1;
  rep.tolerance = tol * std::max(1.0, norm_est);
  rep.eigenvector = v;
  return rep;
}

SpectralReport solve_lanczos(const LinearMap& a, const Eigen::VectorXd* c, const EigOptions& opts) {
  SpectralReport rep;
  rep.method = "iterative";
  rep.deflated_constant = c != nullptr;

  const Eigen::Index n = a.n;
  const Eigen::Index n_eff = c ? n - 1 : n;
  if (n_eff < 1) throw std::invalid_argument("min_eig: empty effective space");
  const int cycle = static_cast<int>(std::min<Eigen::Index>(opts.krylov_cycle, n_eff));

  DeflatedMap op{a, c};
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = gauss(rng);
  if (c) x -= (c->dot(x)) * (*c);
  x.normalize();

  long applications = 0;
  double theta = 0.0, norm_est = 1.0;
  Eigen::MatrixXd v(n, cycle);
  Eigen::VectorXd alphas(cycle), betas(cycle);

  while (true) {
    v.col(0) = x;
    int m = cycle;
    double beta = 0.0;
    for (int k = 0; k < cycle; ++k) {
      Eigen::VectorXd w = op(v.col(k));
      ++applications;
      alphas[k] = v.col(k).dot(w);
      w -= alphas[k] * v.col(k);
      if (k > 0) w -= betas[k - 1] * v.col(k - 1);
      for (int pass = 0; pass < 2; ++pass)
        w -= v.leftCols(k + 1) * (v.leftCols(k + 1).transpose() * w);
      if (c) w -= (c->dot(w)) * (*c);
      beta = w.norm();
      if (k + 1 == cycle || beta < 1e-13) {
        m = k + 1;
        break;
      }
      betas[k] = beta;
      v.col(k + 1) = w / beta;
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      t(k, k) = alphas[k];
      if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = betas[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    theta = es.eigenvalues()(0);
    norm_est = std::max({norm_est, std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(m - 1))});
    x = v.leftCols(m) * es.eigenvectors().col(0);
    if (c) x -= (c->dot(x)) * (*c);
    x.normalize();

    Eigen::VectorXd r = op(x);
    ++applications;
    rep.residual_norm = (r - theta * x).norm();
    rep.tolerance = opts.tol * std::max(1.0, norm_est);
    if (rep.residual_norm <= rep.tolerance || beta < 1e-13 || applications >= opts.max_iterations)
      break;
  }

  rep.min_eigenvalue = theta;
  rep.iterations = applications;
  rep.eigenvector = x;
  return rep;
}

SpectralReport solve(const LinearMap& a0, const Eigen::VectorXd* c, const EigOptions& opts) {
  if (!a0.apply && !a0.dense) throw std::invalid_argument("min_eig: operator has no action");
  LinearMap a = a0;
  if (!a.apply) {
    auto md = std::make_shared<Eigen::MatrixXd>(a.dense());
    a.apply = [md](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = (*md) * x; };
  }
  if (!opts.force_iterative && a.dense && a.n <= opts.dense_limit) return solve_dense(a, c, opts.tol);
  return solve_lanczos(a, c, opts);
}

}  // namespace

LinearMap as_map(const CellOperator& op) {
  LinearMap m;
  m.n = op.dim();
  m.apply = [op](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = op.apply(x); };
  m.dense = [op]() { return op.to_dense(); };
  return m;
}

LinearMap as_map(const LatticeOperator& op) {
  auto shared = std::make_shared<LatticeOperator>(op);
  LinearMap m;
  m.n = shared->vertex_count();
  m.apply = [shared](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = shared->apply(x); };
  m.dense = [shared]() { return shared->to_dense(); };
  return m;
}

SpectralReport min_eigenvalue(const LinearMap& a, const EigOptions& opts) {
  return solve(a, nullptr, opts);
}

SpectralReport min_eig_orth_const(const LinearMap& a, const Eigen::VectorXd& unit_constant,
                                  const EigOptions& opts) {
  if (unit_constant.size() != a.n)
    throw std::invalid_argument("min_eig_orth_const: constant vector size mismatch");
  return solve(a, &unit_constant, opts);
}

SpectralReport min_eig_orth_const(const CellOperator& a, const EigOptions& opts) {
  return min_eig_orth_const(as_map(a), a.grid()->unit_constant(), opts);
}

SpectralReport min_eig_orth_const(const LatticeOperator& a, const EigOptions& opts) {
  Eigen::VectorXd ones = Eigen::VectorXd::Constant(a.vertex_count(), 1.0);
  ones.normalize();
  return min_eig_orth_const(as_map(a), ones, opts);
}

PsdCertificate certify_psd(const CellOperator& a, const CellOperator& b, double c,
                           const EigOptions& opts) {
  return certify_psd(as_map(a - b * c), c, opts);
}

PsdCertificate certify_psd(const LinearMap& d, double c, const EigOptions& opts) {
  PsdCertificate cert;
  cert.shift = c;
  cert.spectral = min_eigenvalue(d, opts);
  cert.threshold = cert.spectral.tolerance;
  cert.pass = cert.spectral.converged() && cert.spectral.min_eigenvalue >= -cert.threshold;
  return cert;
}

double rayleigh_quotient(const CellOperator& a, const CellVector& v) {
  Eigen::VectorXd x = v.to_ortho();
  double nn = x.squaredNorm();
  if (nn == 0.0) throw std::invalid_argument("rayleigh_quotient: zero vector");
  return x.dot(a.apply(x)) / nn;
}

double rayleigh_quotient(const LatticeOperator& a, const Eigen::VectorXd& v) {
  double nn = v.squaredNorm();
  if (nn == 0.0) throw std::invalid_argument("rayleigh_quotient: zero vector");
  return v.dot(a.apply(v)) / nn;
}

std::string spectral_report_to_json(const SpectralReport& r) {
  nlohmann::json j{{"min_eigenvalue", r.min_eigenvalue}, {"method", r.method},
                   {"residual_norm", r.residual_norm},   {"iterations", r.iterations},
                   {"deflated_constant", r.deflated_constant}, {"tolerance", r.tolerance}};
  return j.dump(2);
}

std::string psd_certificate_to_json(const PsdCertificate& c) {
  nlohmann::json j{{"spectral", nlohmann::json::parse(spectral_report_to_json(c.spectral))},
                   {"shift", c.shift},
                   {"threshold", c.threshold},
                   {"pass", c.pass}};
  return j.dump(2);
}

}  // namespace locgap
