#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "locgap/geometry.hpp"

namespace locgap {

/// Common refinement of a family of partitions: per-axis sorted rational
/// breakpoints plus derived cell data. Every box of every input partition
/// is an exact union of cells. Cells are flattened row-major
/// (axis 0 slowest).
class RefinementGrid {
public:
  RefinementGrid(int dim, std::array<std::vector<Rational>, 3> axis_breaks);

  int dim() const { return dim_; }
  int cells_on_axis(int axis) const { return static_cast<int>(axis_breaks_[axis].size()) - 1; }
  Eigen::Index cell_count() const { return cell_count_; }
  const std::vector<Rational>& axis_breaks(int axis) const { return axis_breaks_[axis]; }

  Rational cell_volume(const MultiIndex& c) const;
  Eigen::Index flatten(const MultiIndex& c) const;
  MultiIndex unflatten(Eigen::Index flat) const;

  /// Cell volumes as doubles in flat order.
  const Eigen::VectorXd& volumes() const { return volumes_; }
  /// sqrt of cell volumes: the map between raw cell values and
  /// volume-orthonormalized coordinates.
  const Eigen::VectorXd& sqrt_volumes() const { return sqrt_volumes_; }
  /// Unit vector along the constant function in orthonormalized
  /// coordinates (equals sqrt_volumes normalized).
  const Eigen::VectorXd& unit_constant() const { return unit_constant_; }

  bool same_breakpoints_as(const RefinementGrid& other) const;
  /// True when every breakpoint of p (per axis) appears in this grid.
  bool refines(const Partition& p) const;

private:
  int dim_;
  std::array<std::vector<Rational>, 3> axis_breaks_;
  std::array<std::vector<Rational>, 3> axis_widths_;
  Eigen::Index cell_count_;
  Eigen::VectorXd volumes_, sqrt_volumes_, unit_constant_;
};

using GridPtr = std::shared_ptr<const RefinementGrid>;

/// Union of all partition breakpoints per axis, deduplicated by exact
/// rational comparison.
GridPtr refinement_grid(std::span<const Partition> partitions);
GridPtr refinement_grid(std::initializer_list<Partition> partitions);

/// Piecewise-constant function on a grid, stored as raw cell values.
struct CellVector {
  GridPtr grid;
  Eigen::VectorXd raw;

  Eigen::VectorXd to_ortho() const { return raw.cwiseProduct(grid->sqrt_volumes()); }
  static CellVector from_ortho(GridPtr g, const Eigen::VectorXd& x);
  double inner_vol(const CellVector& other) const;  // volume-weighted inner product
};

/// Gather/average/scatter structure of one partition's box-average
/// projector on a grid, in orthonormalized coordinates: A = U U^T with
/// u_b(c) = sqrt(vol_c / vol_b) for cells c inside box b.
class BoxAverage {
public:
  BoxAverage(const Partition& p, const RefinementGrid& g);

  Eigen::Index box_count() const { return box_count_; }
  int boxes_on_axis() const { return boxes_per_axis_; }
  int box_of_cell(Eigen::Index cell) const { return box_of_cell_[cell]; }

  /// y += coeff * U U^T x
  void apply_add(const Eigen::VectorXd& x, Eigen::VectorXd& y, double coeff) const;
  /// U^T x : cell space -> box space (box-orthonormalized coordinates).
  Eigen::VectorXd project_to_boxes(const Eigen::VectorXd& x) const;
  /// U y : box space -> cell space.
  Eigen::VectorXd embed_from_boxes(const Eigen::VectorXd& y) const;

  void add_dense(Eigen::MatrixXd& M, double coeff) const;
  const Eigen::VectorXd& sqrt_box_volumes() const { return sqrt_box_volumes_; }

private:
  Eigen::Index box_count_;
  int boxes_per_axis_;
  std::vector<int> box_of_cell_;
  Eigen::VectorXd u_;                // u_b(c) entries in cell flat order
  Eigen::VectorXd sqrt_box_volumes_;
};

using BoxAveragePtr = std::shared_ptr<const BoxAverage>;

/// Symmetric operator on the cell space in volume-orthonormalized
/// coordinates. Stored structurally as
///   alpha*I + sum_j beta_j * A_j + const_coeff * cc^T + dense
/// with A_j box-average projectors and c the unit constant vector, so the
/// common operators (P, Q, P_ell, Q_ell and their sums) apply matrix-free
/// in O(cells); an explicit dense block carries anything else.
class CellOperator {
public:
  explicit CellOperator(GridPtr grid) : grid_(std::move(grid)) {}

  static CellOperator identity(GridPtr grid, double coeff = 1.0);
  static CellOperator from_dense(GridPtr grid, Eigen::MatrixXd m);

  const GridPtr& grid() const { return grid_; }
  Eigen::Index dim() const { return grid_->cell_count(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// Apply to raw cell values and return raw cell values.
  CellVector apply_raw(const CellVector& v) const;

  Eigen::MatrixXd to_dense() const;
  bool is_structural() const { return !dense_.has_value(); }

  CellOperator& add_identity(double coeff);
  CellOperator& add_projector(BoxAveragePtr p, double coeff);
  CellOperator& add_constant_projector(double coeff);
  CellOperator& add_dense(const Eigen::MatrixXd& m);

  CellOperator operator+(const CellOperator& o) const;
  CellOperator operator-(const CellOperator& o) const;
  CellOperator operator*(double s) const;

private:
  GridPtr grid_;
  double alpha_ = 0.0;
  double const_coeff_ = 0.0;
  std::vector<std::pair<BoxAveragePtr, double>> projectors_;
  std::optional<Eigen::MatrixXd> dense_;
};

/// Dense product A*B (materializes both operands).
CellOperator dense_product(const CellOperator& a, const CellOperator& b);

/// P_ell: averages over the boxes of p. Idempotent, symmetric in the
/// volume-weighted inner product, rank = box count, fixes constants.
CellOperator average_projection(const Partition& p, GridPtr g);

/// Q_ell = I - P_ell.
CellOperator fluctuation(const Partition& p, GridPtr g);

/// Q = I - projection onto the constant function.
CellOperator global_fluctuation(GridPtr g);

/// The isometry G between range(P_ell) and the box lattice: (G psi)(k) is
/// the average of psi over box k. Box space carries the box-volume-weighted
/// inner product; G G* = identity on box space.
class LatticeEmbedding {
public:
  LatticeEmbedding(const Partition& p, GridPtr g);

  Eigen::Index box_count() const { return proj_->box_count(); }
  const BoxAveragePtr& projector() const { return proj_; }

  /// Raw box averages (G psi) from raw cell values.
  Eigen::VectorXd averages(const CellVector& psi) const;
  /// G*: piecewise-constant extension of raw box values, as raw cells.
  CellVector extend(const Eigen::VectorXd& box_values) const;
  /// Box-volume-weighted inner product of raw box vectors.
  double box_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;

  /// G M G* as a dense box matrix in box-orthonormalized coordinates
  /// (for uniform partitions this equals the raw kernel of G M G*).
  Eigen::MatrixXd conjugate(const CellOperator& m) const;

private:
  GridPtr grid_;
  BoxAveragePtr proj_;
  Eigen::VectorXd box_volumes_;
};

LatticeEmbedding lattice_embedding(const Partition& p, GridPtr g);

/// Dense export for cross-checking with external tools.
void write_dense_csv(const CellOperator& op, const std::string& path);

}  // namespace locgap
