#include "locgap/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace locgap {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("lattice: dim must be 1, 2, or 3");
}

Rational pow_rational(const Rational& b, int e) {
  Rational r(1);
  for (int i = 0; i < e; ++i) r = r * b;
  return r;
}

// Iterate offsets delta in {-band..band}^dim that are lexicographically
// positive (first nonzero component > 0), visiting each unordered pair once.
template <typename F>
void for_positive_offsets(int band, int dim, F&& f) {
  MultiIndex d{0, 0, 0};
  const int span = 2 * band + 1;
  int total = 1;
  for (int i = 0; i < dim; ++i) total *= span;
  for (int code = 0; code < total; ++code) {
    int c = code;
    for (int i = dim - 1; i >= 0; --i) {
      d[i] = c % span - band;
      c /= span;
    }
    int lead = 0;
    while (lead < dim && d[lead] == 0) ++lead;
    if (lead == dim || d[lead] < 0) continue;
    f(d);
  }
}

int kernel_band(const std::vector<std::vector<Rational>>& m) {
  int band = 0;
  const int n = static_cast<int>(m.size());
  for (int k = 0; k < n; ++k)
    for (int s = k + 1; s < n; ++s)
      if (!m[k][s].is_zero()) band = std::max(band, s - k);
  return band;
}

}  // namespace

LatticeOperator::LatticeOperator(int boxes_per_axis, int dim, std::string label)
    : n_(boxes_per_axis), dim_(dim), label_(std::move(label)) {
  check_dim(dim);
  if (boxes_per_axis < 1) throw std::invalid_argument("LatticeOperator: boxes_per_axis must be >= 1");
  vertex_count_ = 1;
  for (int i = 0; i < dim_; ++i) vertex_count_ *= n_;
  degree_.assign(vertex_count_, Rational(0));
}

Eigen::Index LatticeOperator::flatten(const MultiIndex& k) const {
  Eigen::Index f = 0;
  for (int i = 0; i < dim_; ++i) {
    if (k[i] < 0 || k[i] >= n_) throw std::out_of_range("LatticeOperator::flatten: vertex out of range");
    f = f * n_ + k[i];
  }
  return f;
}

MultiIndex LatticeOperator::unflatten(Eigen::Index flat) const {
  MultiIndex k{0, 0, 0};
  for (int i = dim_ - 1; i >= 0; --i) {
    k[i] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return k;
}

void LatticeOperator::add_edge(const MultiIndex& k, const MultiIndex& s, const Rational& w) {
  for (int i = 0; i < dim_; ++i)
    if (std::abs(k[i] - s[i]) > kMaxOffset)
      throw std::invalid_argument("LatticeOperator::add_edge: |k-s|_inf exceeds supported range");
  Eigen::Index a = flatten(k), b = flatten(s);
  if (a == b) throw std::invalid_argument("LatticeOperator::add_edge: self edges are diagonal terms");
  if (a > b) std::swap(a, b);
  auto [it, inserted] = w_.try_emplace({a, b}, w);
  if (!inserted) it->second = it->second + w;
  if (it->second.is_zero()) w_.erase(it);
  degree_[a] = degree_[a] + w;
  degree_[b] = degree_[b] + w;
}

void LatticeOperator::add_diagonal(const MultiIndex& k, const Rational& v) {
  Eigen::Index a = flatten(k);
  auto [it, inserted] = diag_.try_emplace(a, v);
  if (!inserted) it->second = it->second + v;
  if (it->second.is_zero()) diag_.erase(it);
}

Rational LatticeOperator::edge_weight(const MultiIndex& k, const MultiIndex& s) const {
  Eigen::Index a = flatten(k), b = flatten(s);
  if (a > b) std::swap(a, b);
  auto it = w_.find({a, b});
  return it == w_.end() ? Rational(0) : it->second;
}

Rational LatticeOperator::diagonal_term(const MultiIndex& k) const {
  auto it = diag_.find(flatten(k));
  return it == diag_.end() ? Rational(0) : it->second;
}

Rational LatticeOperator::matrix_entry(const MultiIndex& k, const MultiIndex& s) const {
  if (flatten(k) == flatten(s)) return weighted_degree(k) + diagonal_term(k);
  return -edge_weight(k, s);
}

Rational LatticeOperator::weighted_degree(const MultiIndex& k) const { return degree_[flatten(k)]; }

Rational LatticeOperator::constant_action(const MultiIndex& k) const { return diagonal_term(k); }

std::vector<LatticeEdge> LatticeOperator::edges() const {
  std::vector<LatticeEdge> out;
  out.reserve(w_.size());
  for (const auto& [key, w] : w_) out.push_back({unflatten(key.first), unflatten(key.second), w});
  return out;
}

Eigen::MatrixXd LatticeOperator::to_dense() const {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(vertex_count_, vertex_count_);
  for (Eigen::Index v = 0; v < vertex_count_; ++v) M(v, v) = degree_[v].to_double();
  for (const auto& [key, w] : w_) {
    double wd = w.to_double();
    M(key.first, key.second) -= wd;
    M(key.second, key.first) -= wd;
  }
  for (const auto& [v, d] : diag_) M(v, v) += d.to_double();
  return M;
}

Eigen::VectorXd LatticeOperator::apply(const Eigen::VectorXd& f) const {
  if (f.size() != vertex_count_) throw std::invalid_argument("LatticeOperator::apply: size mismatch");
  Eigen::VectorXd y(vertex_count_);
  for (Eigen::Index v = 0; v < vertex_count_; ++v) y[v] = degree_[v].to_double() * f[v];
  for (const auto& [key, w] : w_) {
    double wd = w.to_double();
    y[key.first] -= wd * f[key.second];
    y[key.second] -= wd * f[key.first];
  }
  for (const auto& [v, d] : diag_) y[v] += d.to_double() * f[v];
  return y;
}

LatticeOperator LatticeOperator::operator-(const LatticeOperator& o) const {
  if (n_ != o.n_ || dim_ != o.dim_)
    throw std::invalid_argument("LatticeOperator::operator-: shape mismatch");
  LatticeOperator r = *this;
  r.label_ = label_ + "-" + o.label_;
  for (const auto& [key, w] : o.w_)
    r.add_edge(r.unflatten(key.first), r.unflatten(key.second), -w);
  for (const auto& [v, d] : o.diag_) r.add_diagonal(r.unflatten(v), -d);
  return r;
}

std::vector<std::vector<Rational>> axis_overlap_kernel(const std::vector<Rational>& base_breaks,
                                                       const std::vector<Rational>& probe_breaks) {
  const int nk = static_cast<int>(base_breaks.size()) - 1;
  const int ns = static_cast<int>(probe_breaks.size()) - 1;
  if (nk < 1 || ns < 1) throw std::invalid_argument("axis_overlap_kernel: empty partition");
  const Rational w_base = base_breaks[1] - base_breaks[0];
  for (int k = 0; k < nk; ++k)
    if (base_breaks[k + 1] - base_breaks[k] != w_base)
      throw std::invalid_argument("axis_overlap_kernel: base intervals must be uniform");

  auto overlap = [](const Rational& lo1, const Rational& hi1, const Rational& lo2,
                    const Rational& hi2) {
    Rational lo = max(lo1, lo2), hi = min(hi1, hi2);
    return hi > lo ? hi - lo : Rational(0);
  };

  std::vector<std::vector<Rational>> m(nk, std::vector<Rational>(nk, Rational(0)));
  for (int sp = 0; sp < ns; ++sp) {
    const Rational &jlo = probe_breaks[sp], &jhi = probe_breaks[sp + 1];
    const Rational denom = w_base * (jhi - jlo);
    std::vector<std::pair<int, Rational>> hits;
    for (int k = 0; k < nk; ++k) {
      Rational o = overlap(base_breaks[k], base_breaks[k + 1], jlo, jhi);
      if (!o.is_zero()) hits.emplace_back(k, o);
    }
    for (const auto& [k, ok] : hits)
      for (const auto& [s, os] : hits) m[k][s] = m[k][s] + ok * os / denom;
  }
  return m;
}

namespace {

LatticeOperator assemble_tensor_sum(int boxes_per_axis, int dim,
                                    const std::vector<std::vector<std::vector<Rational>>>& kernels,
                                    std::string label) {
  LatticeOperator op(boxes_per_axis, dim, std::move(label));
  int band = 0;
  for (const auto& m : kernels) band = std::max(band, kernel_band(m));
  const int n = boxes_per_axis;
  for (Eigen::Index v = 0; v < op.vertex_count(); ++v) {
    MultiIndex k = op.unflatten(v);
    for_positive_offsets(band, dim, [&](const MultiIndex& d) {
      MultiIndex s{0, 0, 0};
      for (int i = 0; i < dim; ++i) {
        s[i] = k[i] + d[i];
        if (s[i] < 0 || s[i] >= n) return;
      }
      Rational w(0);
      for (const auto& m : kernels) {
        Rational term(1);
        for (int i = 0; i < dim; ++i) term = term * m[k[i]][s[i]];
        w = w + term;
      }
      if (!w.is_zero()) op.add_edge(k, s, w);
    });
  }
  return op;
}

}  // namespace

LatticeOperator theorem1_L(int ell_inv, int dim) {
  check_dim(dim);
  if (ell_inv < 2) throw std::invalid_argument("theorem1_L: ell_inv must be >= 2");
  Partition base = standard_partition(ell_inv, 1);
  Partition probe = shifted_partition(ell_inv, 1);
  auto m = axis_overlap_kernel(base.axis_breaks, probe.axis_breaks);
  return assemble_tensor_sum(ell_inv, dim, {m}, "theorem1_L");
}

LatticeOperator theorem2_L(int ell_inv, int m, int dim) {
  check_dim(dim);
  if (ell_inv < 2) throw std::invalid_argument("theorem2_L: ell_inv must be >= 2");
  const int n_max = ell_inv / 2;
  if (m < 0 || m > n_max) throw std::invalid_argument("theorem2_L: scale index out of range");
  Partition base = standard_partition(ell_inv - m, 1);
  std::vector<std::vector<std::vector<Rational>>> kernels;
  kernels.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    Partition probe = standard_partition(ell_inv - n, 1);
    kernels.push_back(axis_overlap_kernel(base.axis_breaks, probe.axis_breaks));
  }
  return assemble_tensor_sum(ell_inv - m, dim, kernels, "theorem2_L");
}

LatticeOperator reference_graph_laplacian(int ell_inv, int dim) {
  check_dim(dim);
  if (ell_inv < 1) throw std::invalid_argument("reference_graph_laplacian: ell_inv must be >= 1");
  LatticeOperator op(ell_inv, dim, "reference_graph_laplacian");
  const Rational eighth(1, 8), half(1, 2), three_halves(3, 2);
  for (Eigen::Index v = 0; v < op.vertex_count(); ++v) {
    MultiIndex k = op.unflatten(v);
    for_positive_offsets(1, dim, [&](const MultiIndex& d) {
      MultiIndex s{0, 0, 0};
      int diff = 0, boundary_same = 0;
      for (int i = 0; i < dim; ++i) {
        s[i] = k[i] + d[i];
        if (s[i] < 0 || s[i] >= ell_inv) return;
        if (d[i] != 0)
          ++diff;
        else if (k[i] == 0 || k[i] == ell_inv - 1)
          ++boundary_same;
      }
      // Reflecting boundary: each non-differing boundary axis carries the
      // self-loop factor 1 + 1/2.
      op.add_edge(k, s, eighth * pow_rational(half, diff) * pow_rational(three_halves, boundary_same));
    });
  }
  return op;
}

Eigen::VectorXd neumann_mode(const MultiIndex& m, int ell_inv, int dim) {
  check_dim(dim);
  for (int i = 0; i < dim; ++i)
    if (m[i] < 0 || m[i] >= ell_inv) throw std::out_of_range("neumann_mode: mode index out of range");
  const double ell = 1.0 / ell_inv;
  Eigen::Index count = 1;
  for (int i = 0; i < dim; ++i) count *= ell_inv;
  LatticeOperator shape(ell_inv, dim);  // for index flattening only
  Eigen::VectorXd phi(count);
  for (Eigen::Index v = 0; v < count; ++v) {
    MultiIndex k = shape.unflatten(v);
    double val = 1.0;
    for (int i = 0; i < dim; ++i)
      val *= std::cos(m[i] * std::numbers::pi * ell * (k[i] + 0.5));
    phi[v] = val;
  }
  return phi;
}

double mode_eigenvalue(const MultiIndex& m, int ell_inv, int dim) {
  check_dim(dim);
  const double ell = 1.0 / ell_inv;
  std::array<double, 3> c{1.0, 1.0, 1.0};
  for (int i = 0; i < dim; ++i) c[i] = std::cos(std::numbers::pi * m[i] * ell);
  double lambda = 0.0;
  for (int mask = 1; mask < (1 << dim); ++mask) {
    double prod = 1.0;
    for (int i = 0; i < dim; ++i)
      if (mask & (1 << i)) prod *= c[i];
    lambda += (1.0 - prod) / 8.0;
  }
  return lambda;
}

DiagonalizationReport verify_diagonalization(int ell_inv, double tol, int dim) {
  check_dim(dim);
  DiagonalizationReport r;
  r.ell_inv = ell_inv;
  r.dim = dim;
  r.tolerance = tol;

  LatticeOperator lap = reference_graph_laplacian(ell_inv, dim);
  MultiIndex first{0, 0, 0};
  first[0] = 1;
  r.gap = mode_eigenvalue(first, ell_inv, dim);

  const Eigen::Index count = lap.vertex_count();
  LatticeOperator shape(ell_inv, dim);
  std::vector<double> lambdas(count);
  double min_nonzero = std::numeric_limits<double>::infinity();
  for (Eigen::Index v = 0; v < count; ++v) {
    MultiIndex m = shape.unflatten(v);
    Eigen::VectorXd phi = neumann_mode(m, ell_inv, dim);
    lambdas[v] = mode_eigenvalue(m, ell_inv, dim);
    double res = (lap.apply(phi) - lambdas[v] * phi).lpNorm<Eigen::Infinity>();
    r.max_residual = std::max(r.max_residual, res);
    if (v > 0) min_nonzero = std::min(min_nonzero, lambdas[v]);
  }
  // All minimizers (up to ties) must be coordinate permutations of
  // (1,0,..,0), and the minimum must equal the closed-form gap.
  bool minimizers_ok = std::abs(min_nonzero - r.gap) <= 1e-12;
  for (Eigen::Index v = 1; v < count && minimizers_ok; ++v) {
    if (lambdas[v] > min_nonzero + 1e-12) continue;
    MultiIndex sorted = shape.unflatten(v);
    std::sort(sorted.begin(), sorted.begin() + dim);
    bool is_unit = sorted[dim - 1] == 1;
    for (int i = 0; i + 1 < dim; ++i) is_unit = is_unit && sorted[i] == 0;
    minimizers_ok = is_unit;
  }
  r.minimizer_is_first_mode = minimizers_ok;
  r.pass = r.minimizer_is_first_mode && r.max_residual <= tol;
  return r;
}

void write_edges_csv(const LatticeOperator& op, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_edges_csv: cannot open " + path);
  out << "k,s,weight\n";
  auto fmt = [&](const MultiIndex& k) {
    std::ostringstream ss;
    for (int i = 0; i < op.dim(); ++i) {
      if (i) ss << ':';
      ss << k[i];
    }
    return ss.str();
  };
  for (const auto& e : op.edges()) out << fmt(e.k) << ',' << fmt(e.s) << ',' << e.w.str() << '\n';
}

std::string diagonalization_report_to_json(const DiagonalizationReport& r) {
  nlohmann::json j{{"ell_inv", r.ell_inv},
                   {"dim", r.dim},
                   {"max_residual", r.max_residual},
                   {"minimizer_is_first_mode", r.minimizer_is_first_mode},
                   {"gap", r.gap},
                   {"tolerance", r.tolerance},
                   {"pass", r.pass}};
  return j.dump(2);
}

}  // namespace locgap
