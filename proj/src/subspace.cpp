#include "locgap/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace locgap {

namespace {

void check_same_grid(const GridPtr& a, const GridPtr& b, const char* what) {
  if (a.get() == b.get()) return;
  if (a && b && a->same_breakpoints_as(*b)) return;
  throw std::invalid_argument(std::string(what) + ": operands live on different grids");
}

}  // namespace

RefinementGrid::RefinementGrid(int dim, std::array<std::vector<Rational>, 3> axis_breaks)
    : dim_(dim), axis_breaks_(std::move(axis_breaks)) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("RefinementGrid: dim must be 1, 2, or 3");
  cell_count_ = 1;
  for (int ax = 0; ax < dim_; ++ax) {
    auto& breaks = axis_breaks_[ax];
    if (breaks.size() < 2) throw std::invalid_argument("RefinementGrid: axis needs >= 2 breakpoints");
    if (!(breaks.front() == Rational(0)) || !(breaks.back() == Rational(1)))
      throw std::invalid_argument("RefinementGrid: axis breakpoints must span [0, 1]");
    auto& widths = axis_widths_[ax];
    widths.reserve(breaks.size() - 1);
    for (size_t i = 0; i + 1 < breaks.size(); ++i) {
      Rational w = breaks[i + 1] - breaks[i];
      if (w.sign() <= 0) throw std::invalid_argument("RefinementGrid: breakpoints not strictly increasing");
      widths.push_back(w);
    }
    cell_count_ *= static_cast<Eigen::Index>(widths.size());
  }
  for (int ax = dim_; ax < 3; ++ax) {
    axis_breaks_[ax] = {Rational(0), Rational(1)};
    axis_widths_[ax] = {Rational(1)};
  }

  volumes_.resize(cell_count_);
  sqrt_volumes_.resize(cell_count_);
  for (Eigen::Index f = 0; f < cell_count_; ++f) {
    volumes_[f] = cell_volume(unflatten(f)).to_double();
    sqrt_volumes_[f] = std::sqrt(volumes_[f]);
  }
  // Total volume is exactly 1, so sqrt_volumes_ already has unit norm;
  // normalize anyway to absorb rounding.
  unit_constant_ = sqrt_volumes_ / sqrt_volumes_.norm();
}

Rational RefinementGrid::cell_volume(const MultiIndex& c) const {
  Rational v(1);
  for (int ax = 0; ax < dim_; ++ax) v = v * axis_widths_[ax][c[ax]];
  return v;
}

Eigen::Index RefinementGrid::flatten(const MultiIndex& c) const {
  Eigen::Index f = 0;
  for (int ax = 0; ax < dim_; ++ax) {
    int n = cells_on_axis(ax);
    if (c[ax] < 0 || c[ax] >= n) throw std::out_of_range("RefinementGrid::flatten: index out of range");
    f = f * n + c[ax];
  }
  return f;
}

MultiIndex RefinementGrid::unflatten(Eigen::Index flat) const {
  MultiIndex c{0, 0, 0};
  for (int ax = dim_ - 1; ax >= 0; --ax) {
    int n = cells_on_axis(ax);
    c[ax] = static_cast<int>(flat % n);
    flat /= n;
  }
  return c;
}

bool RefinementGrid::same_breakpoints_as(const RefinementGrid& other) const {
  if (dim_ != other.dim_) return false;
  for (int ax = 0; ax < dim_; ++ax)
    if (axis_breaks_[ax] != other.axis_breaks_[ax]) return false;
  return true;
}

bool RefinementGrid::refines(const Partition& p) const {
  if (p.dim != dim_) return false;
  for (int ax = 0; ax < p.dim; ++ax) {
    const auto& mine = axis_breaks_[ax];
    for (const auto& b : p.axis_breaks)
      if (!std::binary_search(mine.begin(), mine.end(), b)) return false;
  }
  return true;
}

GridPtr refinement_grid(std::span<const Partition> partitions) {
  if (partitions.empty()) throw std::invalid_argument("refinement_grid: no partitions given");
  int dim = partitions[0].dim;
  for (const auto& p : partitions)
    if (p.dim != dim) throw std::invalid_argument("refinement_grid: dimension mismatch");
  std::array<std::vector<Rational>, 3> axes;
  for (int ax = 0; ax < dim; ++ax) {
    std::vector<Rational> breaks;
    for (const auto& p : partitions)
      breaks.insert(breaks.end(), p.axis_breaks.begin(), p.axis_breaks.end());
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    axes[ax] = std::move(breaks);
  }
  return std::make_shared<RefinementGrid>(dim, std::move(axes));
}

GridPtr refinement_grid(std::initializer_list<Partition> partitions) {
  return refinement_grid(std::span<const Partition>(partitions.begin(), partitions.size()));
}

CellVector CellVector::from_ortho(GridPtr g, const Eigen::VectorXd& x) {
  CellVector v;
  v.grid = std::move(g);
  v.raw = x.cwiseQuotient(v.grid->sqrt_volumes());
  return v;
}

double CellVector::inner_vol(const CellVector& other) const {
  check_same_grid(grid, other.grid, "CellVector::inner_vol");
  return raw.cwiseProduct(other.raw).dot(grid->volumes());
}

BoxAverage::BoxAverage(const Partition& p, const RefinementGrid& g) {
  if (p.dim != g.dim()) throw std::invalid_argument("BoxAverage: dimension mismatch");
  if (!g.refines(p)) throw std::invalid_argument("BoxAverage: grid does not refine partition");
  boxes_per_axis_ = p.boxes_per_axis();
  box_count_ = p.box_count();

  // Map grid interval -> partition interval per axis by midpoint lookup.
  std::array<std::vector<int>, 3> axis_box;
  for (int ax = 0; ax < p.dim; ++ax) {
    const auto& breaks = g.axis_breaks(ax);
    axis_box[ax].resize(breaks.size() - 1);
    for (size_t i = 0; i + 1 < breaks.size(); ++i) {
      Rational mid = (breaks[i] + breaks[i + 1]) / Rational(2);
      int hit = -1;
      for (int b = 0; b < boxes_per_axis_; ++b)
        if (p.axis_breaks[b] < mid && mid < p.axis_breaks[b + 1]) { hit = b; break; }
      if (hit < 0) throw std::logic_error("BoxAverage: cell not contained in any box");
      axis_box[ax][i] = hit;
    }
  }

  const Eigen::Index n = g.cell_count();
  box_of_cell_.resize(n);
  std::vector<Rational> box_vol(box_count_, Rational(0));
  for (Eigen::Index f = 0; f < n; ++f) {
    MultiIndex c = g.unflatten(f);
    Eigen::Index b = 0;
    for (int ax = 0; ax < p.dim; ++ax) b = b * boxes_per_axis_ + axis_box[ax][c[ax]];
    box_of_cell_[f] = static_cast<int>(b);
    box_vol[b] = box_vol[b] + g.cell_volume(c);
  }

  sqrt_box_volumes_.resize(box_count_);
  for (Eigen::Index b = 0; b < box_count_; ++b)
    sqrt_box_volumes_[b] = std::sqrt(box_vol[b].to_double());

  u_.resize(n);
  for (Eigen::Index f = 0; f < n; ++f)
    u_[f] = g.sqrt_volumes()[f] / sqrt_box_volumes_[box_of_cell_[f]];
}

void BoxAverage::apply_add(const Eigen::VectorXd& x, Eigen::VectorXd& y, double coeff) const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(box_count_);
  for (Eigen::Index f = 0; f < x.size(); ++f) acc[box_of_cell_[f]] += u_[f] * x[f];
  for (Eigen::Index f = 0; f < x.size(); ++f) y[f] += coeff * u_[f] * acc[box_of_cell_[f]];
}

Eigen::VectorXd BoxAverage::project_to_boxes(const Eigen::VectorXd& x) const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(box_count_);
  for (Eigen::Index f = 0; f < x.size(); ++f) acc[box_of_cell_[f]] += u_[f] * x[f];
  return acc;
}

Eigen::VectorXd BoxAverage::embed_from_boxes(const Eigen::VectorXd& y) const {
  Eigen::VectorXd x(u_.size());
  for (Eigen::Index f = 0; f < x.size(); ++f) x[f] = u_[f] * y[box_of_cell_[f]];
  return x;
}

void BoxAverage::add_dense(Eigen::MatrixXd& M, double coeff) const {
  const Eigen::Index n = u_.size();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (box_of_cell_[i] == box_of_cell_[j]) M(i, j) += coeff * u_[i] * u_[j];
}

CellOperator CellOperator::identity(GridPtr grid, double coeff) {
  CellOperator op(std::move(grid));
  op.alpha_ = coeff;
  return op;
}

CellOperator CellOperator::from_dense(GridPtr grid, Eigen::MatrixXd m) {
  CellOperator op(std::move(grid));
  if (m.rows() != op.dim() || m.cols() != op.dim())
    throw std::invalid_argument("CellOperator::from_dense: shape mismatch with grid");
  op.dense_ = std::move(m);
  return op;
}

Eigen::VectorXd CellOperator::apply(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("CellOperator::apply: size mismatch");
  Eigen::VectorXd y = alpha_ * x;
  if (const_coeff_ != 0.0) {
    const Eigen::VectorXd& c = grid_->unit_constant();
    y += (const_coeff_ * c.dot(x)) * c;
  }
  for (const auto& [p, coeff] : projectors_) p->apply_add(x, y, coeff);
  if (dense_) y += (*dense_) * x;
  return y;
}

CellVector CellOperator::apply_raw(const CellVector& v) const {
  check_same_grid(grid_, v.grid, "CellOperator::apply_raw");
  return CellVector::from_ortho(grid_, apply(v.to_ortho()));
}

Eigen::MatrixXd CellOperator::to_dense() const {
  const Eigen::Index n = dim();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  M.diagonal().array() += alpha_;
  if (const_coeff_ != 0.0) {
    const Eigen::VectorXd& c = grid_->unit_constant();
    M += const_coeff_ * (c * c.transpose());
  }
  for (const auto& [p, coeff] : projectors_) p->add_dense(M, coeff);
  if (dense_) M += *dense_;
  return M;
}

CellOperator& CellOperator::add_identity(double coeff) {
  alpha_ += coeff;
  return *this;
}

CellOperator& CellOperator::add_projector(BoxAveragePtr p, double coeff) {
  projectors_.emplace_back(std::move(p), coeff);
  return *this;
}

CellOperator& CellOperator::add_constant_projector(double coeff) {
  const_coeff_ += coeff;
  return *this;
}

CellOperator& CellOperator::add_dense(const Eigen::MatrixXd& m) {
  if (m.rows() != dim() || m.cols() != dim())
    throw std::invalid_argument("CellOperator::add_dense: shape mismatch");
  if (dense_)
    *dense_ += m;
  else
    dense_ = m;
  return *this;
}

CellOperator CellOperator::operator+(const CellOperator& o) const {
  check_same_grid(grid_, o.grid_, "CellOperator::operator+");
  CellOperator r = *this;
  r.alpha_ += o.alpha_;
  r.const_coeff_ += o.const_coeff_;
  r.projectors_.insert(r.projectors_.end(), o.projectors_.begin(), o.projectors_.end());
  if (o.dense_) r.add_dense(*o.dense_);
  return r;
}

CellOperator CellOperator::operator-(const CellOperator& o) const { return *this + o * -1.0; }

CellOperator CellOperator::operator*(double s) const {
  CellOperator r = *this;
  r.alpha_ *= s;
  r.const_coeff_ *= s;
  for (auto& [p, coeff] : r.projectors_) coeff *= s;
  if (r.dense_) *r.dense_ *= s;
  return r;
}

CellOperator dense_product(const CellOperator& a, const CellOperator& b) {
  check_same_grid(a.grid(), b.grid(), "dense_product");
  return CellOperator::from_dense(a.grid(), a.to_dense() * b.to_dense());
}

CellOperator average_projection(const Partition& p, GridPtr g) {
  CellOperator op(g);
  op.add_projector(std::make_shared<BoxAverage>(p, *g), 1.0);
  return op;
}

CellOperator fluctuation(const Partition& p, GridPtr g) {
  CellOperator op = CellOperator::identity(g);
  op.add_projector(std::make_shared<BoxAverage>(p, *g), -1.0);
  return op;
}

CellOperator global_fluctuation(GridPtr g) {
  CellOperator op = CellOperator::identity(std::move(g));
  op.add_constant_projector(-1.0);
  return op;
}

LatticeEmbedding::LatticeEmbedding(const Partition& p, GridPtr g)
    : grid_(std::move(g)), proj_(std::make_shared<BoxAverage>(p, *grid_)) {
  const auto& s = proj_->sqrt_box_volumes();
  box_volumes_ = s.cwiseProduct(s);
}

Eigen::VectorXd LatticeEmbedding::averages(const CellVector& psi) const {
  check_same_grid(grid_, psi.grid, "LatticeEmbedding::averages");
  // Box-orthonormal coords y = U^T x relate to raw averages by
  // avg_b = y_b / sqrt(vol_b).
  Eigen::VectorXd y = proj_->project_to_boxes(psi.to_ortho());
  return y.cwiseQuotient(proj_->sqrt_box_volumes());
}

CellVector LatticeEmbedding::extend(const Eigen::VectorXd& box_values) const {
  if (box_values.size() != proj_->box_count())
    throw std::invalid_argument("LatticeEmbedding::extend: size mismatch");
  Eigen::VectorXd y = box_values.cwiseProduct(proj_->sqrt_box_volumes());
  return CellVector::from_ortho(grid_, proj_->embed_from_boxes(y));
}

double LatticeEmbedding::box_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
  if (f.size() != box_volumes_.size() || g.size() != box_volumes_.size())
    throw std::invalid_argument("LatticeEmbedding::box_inner: size mismatch");
  return f.cwiseProduct(g).dot(box_volumes_);
}

Eigen::MatrixXd LatticeEmbedding::conjugate(const CellOperator& m) const {
  check_same_grid(grid_, m.grid(), "LatticeEmbedding::conjugate");
  const Eigen::Index nb = proj_->box_count();
  Eigen::MatrixXd out(nb, nb);
  for (Eigen::Index b = 0; b < nb; ++b) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(nb);
    e[b] = 1.0;
    out.col(b) = proj_->project_to_boxes(m.apply(proj_->embed_from_boxes(e)));
  }
  return 0.5 * (out + out.transpose());
}

LatticeEmbedding lattice_embedding(const Partition& p, GridPtr g) {
  return LatticeEmbedding(p, std::move(g));
}

void write_dense_csv(const CellOperator& op, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dense_csv: cannot open " + path);
  Eigen::MatrixXd M = op.to_dense();
  out.precision(17);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << M(i, j);
    }
    out << '\n';
  }
}

}  // namespace locgap
