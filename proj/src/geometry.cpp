#include "locgap/geometry.hpp"

#include <sstream>
#include <stdexcept>

namespace locgap {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
}

}  // namespace

Rational BoxRegion::volume() const {
  Rational v(1);
  for (int i = 0; i < dim; ++i) v *= hi[i] - lo[i];
  return v;
}

bool BoxRegion::contains_point(const std::array<Rational, 3>& x) const {
  for (int i = 0; i < dim; ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

long long Partition::box_count() const {
  long long c = 1;
  for (int i = 0; i < dim; ++i) c *= boxes_per_axis();
  return c;
}

BoxRegion Partition::box(const MultiIndex& k) const {
  BoxRegion b;
  b.dim = dim;
  for (int i = 0; i < dim; ++i) {
    if (k[i] < 0 || k[i] >= boxes_per_axis()) throw std::out_of_range("box index out of range");
    b.lo[i] = axis_breaks[k[i]];
    b.hi[i] = axis_breaks[k[i] + 1];
  }
  return b;
}

Rational Partition::total_volume() const {
  Rational axis_len = axis_breaks.back() - axis_breaks.front();
  Rational v(1);
  for (int i = 0; i < dim; ++i) v *= axis_len;
  return v;  // breakpoints partition [0,1], so this is the exact volume sum
}

Partition standard_partition(int ell_inv, int dim) {
  check_dim(dim);
  if (ell_inv < 1) throw std::invalid_argument("ell_inv must be >= 1");
  Partition p;
  p.dim = dim;
  p.kind = PartitionKind::standard;
  p.cell_size = Rational(1, ell_inv);
  p.axis_breaks.reserve(ell_inv + 1);
  for (int k = 0; k <= ell_inv; ++k) p.axis_breaks.push_back(Rational(k, ell_inv));
  return p;
}

Partition shifted_partition(int ell_inv, int dim) {
  check_dim(dim);
  if (ell_inv < 1) throw std::invalid_argument("ell_inv must be >= 1");
  Partition p;
  p.dim = dim;
  p.kind = PartitionKind::shifted;
  p.cell_size = Rational(1, ell_inv);
  p.degenerate = (ell_inv == 1);
  const Rational ell(1, ell_inv);
  const Rational half(1, 2);
  p.axis_breaks.push_back(Rational(0));
  for (int k = 0; k < ell_inv; ++k) {
    Rational hi = (Rational(k + 1) + (k < ell_inv - 1 ? half : Rational(0))) * ell;
    p.axis_breaks.push_back(hi);
  }
  return p;
}

Partition scale_partition(int ell_inv, int n, int dim) {
  check_dim(dim);
  if (ell_inv < 2) throw std::invalid_argument("ell_inv must be >= 2");
  if (n < 0 || n > ell_inv / 2) throw std::invalid_argument("scale index out of range");
  const int j = ell_inv - n;  // ell_n = 1/(ell_inv - n)
  Partition p = standard_partition(j, dim);
  p.kind = PartitionKind::scale_member;
  p.scale_index = n;
  return p;
}

std::vector<Rational> scale_family(int ell_inv) {
  if (ell_inv < 2) throw std::invalid_argument("ell_inv must be >= 2");
  std::vector<Rational> out;
  for (int n = 0; n <= ell_inv / 2; ++n) out.push_back(Rational(1, ell_inv - n));
  return out;
}

Rational overlap_volume(const BoxRegion& a, const BoxRegion& b) {
  if (a.dim != b.dim) throw std::invalid_argument("overlap_volume: dimension mismatch");
  Rational v(1);
  for (int i = 0; i < a.dim; ++i) {
    Rational lo = max(a.lo[i], b.lo[i]);
    Rational hi = min(a.hi[i], b.hi[i]);
    if (hi <= lo) return Rational(0);
    v *= hi - lo;
  }
  return v;
}

std::string partition_to_json(const Partition& p) {
  std::ostringstream os;
  os << "{\"dim\":" << p.dim << ",\"kind\":\"";
  switch (p.kind) {
    case PartitionKind::standard: os << "standard"; break;
    case PartitionKind::shifted: os << "shifted"; break;
    case PartitionKind::scale_member: os << "scale_member"; break;
  }
  os << "\",\"cell_size\":\"" << p.cell_size.str() << "\"";
  if (p.kind == PartitionKind::scale_member) os << ",\"scale_index\":" << p.scale_index;
  if (p.degenerate) os << ",\"degenerate\":true";
  os << ",\"axis_breaks\":[";
  for (std::size_t i = 0; i < p.axis_breaks.size(); ++i) {
    if (i) os << ",";
    os << "\"" << p.axis_breaks[i].str() << "\"";
  }
  os << "]}";
  return os.str();
}

}  // namespace locgap
