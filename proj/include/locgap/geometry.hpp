#pragma once

#include <array>
#include <string>
#include <vector>

#include "locgap/rational.hpp"

namespace locgap {

/// Multi-index into a partition's box array; unused trailing axes are 0.
using MultiIndex = std::array<int, 3>;

/// Axis-aligned closed box inside [0,1]^d, d <= 3, with exact rational
/// endpoints.
struct BoxRegion {
  int dim = 1;
  std::array<Rational, 3> lo{};
  std::array<Rational, 3> hi{};

  Rational volume() const;
  bool contains_point(const std::array<Rational, 3>& x) const;
};

enum class PartitionKind { standard, shifted, scale_member };

/// Covering family of boxes of the unit cube. All partitions here are
/// tensor products of one axis subdivision, so only the per-axis
/// breakpoints are stored; box (k_0,..,k_{d-1}) is the product of
/// [breaks[k_i], breaks[k_i+1]].
struct Partition {
  int dim = 1;
  PartitionKind kind = PartitionKind::standard;
  Rational cell_size;            // ell, or ell_n for scale members
  int scale_index = 0;           // n for scale_member
  bool degenerate = false;       // shifted with ell_inv == 1
  std::vector<Rational> axis_breaks;

  int boxes_per_axis() const { return static_cast<int>(axis_breaks.size()) - 1; }
  long long box_count() const;
  BoxRegion box(const MultiIndex& k) const;
  Rational total_volume() const;
};

/// B_{ell,k} = prod_i [k_i*ell, (k_i+1)*ell], ell = 1/ell_inv.
Partition standard_partition(int ell_inv, int dim);

/// Half-cell-offset family: per axis the interval for index k is
/// [(k + 1/2*1{k>0})ell, (k + 1 + 1/2*1{k<ell_inv-1})ell], so the first
/// interval has length 3ell/2 and the last ell/2. ell_inv == 1 degenerates
/// to the standard partition and is flagged.
Partition shifted_partition(int ell_inv, int dim);

/// The scale member with side 1/(ell_inv - n) on [0,1]^d.
Partition scale_partition(int ell_inv, int n, int dim);

/// ell_n = ell/(1 - n*ell) for n = 0..floor(ell_inv/2): all inverse
/// integers between 1/ell_inv and 2/ell_inv.
std::vector<Rational> scale_family(int ell_inv);

/// Exact overlap volume: product over axes of max(0, min(hi) - max(lo)).
Rational overlap_volume(const BoxRegion& a, const BoxRegion& b);

/// JSON description with axis breakpoints as "num/den" strings.
std::string partition_to_json(const Partition& p);

}  // namespace locgap
