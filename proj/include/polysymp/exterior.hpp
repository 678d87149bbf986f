#pragma once

// Sparse exterior algebra over a finite-dimensional real vector space.
//
// A grade-k multivector (contravariant) or k-form (covariant) is stored as a
// map from index blades to coefficients, where a blade is a bitmask over
// basis indices read in strictly increasing order. Only nonzero coefficients
// are stored. Wedge products of 1-forms follow the determinant convention,
// (a^1 ^ ... ^ a^k)(u_1, ..., u_k) = det[a^i(u_j)], with no 1/k! factor, and
// the interior product fills the FIRST k argument slots of a form with the
// factors of the contracting multivector in factor order:
//
//   (Z_1 ^ ... ^ Z_k) _| w  =  w(Z_1, ..., Z_k, ., ..., .)
//
// "Decomposable" below is what some texts call "simple": equal to a wedge of
// grade-1 factors. The decomposability test uses the annihilator criterion
// (X is decomposable iff dim{v : v ^ X = 0} equals the grade), which holds
// for every grade below the top; top-grade elements are decomposable
// outright and are special-cased.

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace polysymp {

inline constexpr int kMaxDim = 62;

// Coordinate roles on a phase space: horizontal (x^mu), field (v^A),
// polymomentum (p^mu_A) and the energy direction.
enum class CoordBlock { Horizontal, Field, Momentum, Energy };

struct PhaseBlocks {
  int n = 0;       // horizontal directions
  int fibre = 0;   // field components
  bool extended = false;  // has the energy coordinate
};

// An ordered, labelled basis. Either a plain D-dimensional basis (e1..eD) or
// a phase-space basis with block structure x^1..x^n, v^1..v^N,
// p^1_1..p^n_N (mu-major), then e when extended.
class GradedBasis {
 public:
  static GradedBasis plain(int dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("GradedBasis: dimension out of range");
    GradedBasis b;
    b.dim_ = dim;
    for (int i = 0; i < dim; ++i) b.labels_.push_back("e" + std::to_string(i + 1));
    return b;
  }

  static GradedBasis phase(int n, int fibre, bool extended) {
    if (n < 1 || fibre < 1) throw std::invalid_argument("GradedBasis: need n >= 1 and fibre >= 1");
    const int dim = n + fibre + n * fibre + (extended ? 1 : 0);
    if (dim > kMaxDim) throw std::invalid_argument("GradedBasis: dimension out of range");
    GradedBasis b;
    b.dim_ = dim;
    b.blocks_ = PhaseBlocks{n, fibre, extended};
    for (int mu = 1; mu <= n; ++mu) b.labels_.push_back("x" + std::to_string(mu));
    for (int a = 1; a <= fibre; ++a) b.labels_.push_back("v" + std::to_string(a));
    for (int mu = 1; mu <= n; ++mu)
      for (int a = 1; a <= fibre; ++a)
        b.labels_.push_back("p" + std::to_string(mu) + "_" + std::to_string(a));
    if (extended) b.labels_.push_back("e");
    return b;
  }

  int dim() const { return dim_; }
  const std::vector<std::string>& labels() const { return labels_; }
  bool has_blocks() const { return blocks_.has_value(); }
  const PhaseBlocks& blocks() const {
    if (!blocks_) throw std::logic_error("GradedBasis: plain basis has no block structure");
    return *blocks_;
  }

  // 0-based accessors into the flat index range.
  int x_index(int mu) const { check_range(mu, blocks().n, "x"); return mu; }
  int v_index(int a) const { check_range(a, blocks().fibre, "v"); return blocks().n + a; }
  int p_index(int mu, int a) const {
    check_range(mu, blocks().n, "p/mu");
    check_range(a, blocks().fibre, "p/A");
    return blocks().n + blocks().fibre + mu * blocks().fibre + a;
  }
  int e_index() const {
    if (!blocks().extended) throw std::logic_error("GradedBasis: basis has no energy direction");
    return dim_ - 1;
  }

  CoordBlock block_of(int index) const {
    const PhaseBlocks& b = blocks();
    if (index < 0 || index >= dim_) throw std::out_of_range("GradedBasis: index out of range");
    if (index < b.n) return CoordBlock::Horizontal;
    if (index < b.n + b.fibre) return CoordBlock::Field;
    if (index < b.n + b.fibre + b.n * b.fibre) return CoordBlock::Momentum;
    return CoordBlock::Energy;
  }

  bool operator==(const GradedBasis& o) const { return dim_ == o.dim_ && labels_ == o.labels_; }
  bool operator!=(const GradedBasis& o) const { return !(*this == o); }

 private:
  static void check_range(int i, int count, const char* what) {
    if (i < 0 || i >= count)
      throw std::out_of_range(std::string("GradedBasis: ") + what + " index out of range");
  }

  int dim_ = 0;
  std::vector<std::string> labels_;
  std::optional<PhaseBlocks> blocks_;
};

// Sign of reordering the concatenation (blade a, blade b) into increasing
// order; 0 when the blades share an index. Counts pairs i in a, j in b with
// i > j.
inline int blade_merge_sign(uint64_t a, uint64_t b) {
  if (a & b) return 0;
  int swaps = 0;
  for (uint64_t t = a >> 1; t != 0; t >>= 1) swaps += std::popcount(t & b);
  return (swaps & 1) ? -1 : 1;
}

namespace detail {

// Sort an index list, counting transpositions. Returns 0 on a repeated
// index, otherwise +-1, and leaves the sorted list in `idx`.
inline int sort_sign(std::vector<int>& idx) {
  int sign = 1;
  for (size_t i = 1; i < idx.size(); ++i) {
    int v = idx[i];
    size_t j = i;
    while (j > 0 && idx[j - 1] > v) {
      idx[j] = idx[j - 1];
      --j;
      sign = -sign;
    }
    idx[j] = v;
  }
  for (size_t i = 1; i < idx.size(); ++i)
    if (idx[i] == idx[i - 1]) return 0;
  return sign;
}

}  // namespace detail

// Shared sparse storage for multivectors and forms; the flag only serves to
// keep the two species apart in signatures.
template <bool IsForm>
class BladeTensor {
 public:
  BladeTensor(GradedBasis basis, int grade) : basis_(std::move(basis)), grade_(grade) {
    if (grade < 0 || grade > basis_.dim())
      throw std::invalid_argument("BladeTensor: grade out of range");
  }

  static BladeTensor scalar_value(GradedBasis basis, double value) {
    BladeTensor t(std::move(basis), 0);
    t.add_blade(0, value);
    return t;
  }

  // Element c * e_{i1} ^ ... ^ e_{ik} from a possibly unsorted index list.
  static BladeTensor from_indices(GradedBasis basis, std::span<const int> indices, double coeff = 1.0) {
    BladeTensor t(std::move(basis), static_cast<int>(indices.size()));
    t.set_component(indices, coeff);
    return t;
  }

  const GradedBasis& basis() const { return basis_; }
  int grade() const { return grade_; }
  const std::map<uint64_t, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  // Accumulate onto a canonical (strictly increasing) blade mask.
  void add_blade(uint64_t blade, double value) {
    if (std::popcount(blade) != grade_) throw std::invalid_argument("BladeTensor: blade grade mismatch");
    if (blade >> basis_.dim()) throw std::invalid_argument("BladeTensor: blade index out of range");
    auto it = terms_.find(blade);
    if (it == terms_.end()) {
      if (value != 0.0) terms_.emplace(blade, value);
    } else {
      it->second += value;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  // Set the component for an index list, canonicalizing the order (and the
  // sign). Repeated indices are a caller bug.
  void set_component(std::span<const int> indices, double value) {
    if (static_cast<int>(indices.size()) != grade_)
      throw std::invalid_argument("BladeTensor: index count differs from grade");
    std::vector<int> idx(indices.begin(), indices.end());
    const int sign = detail::sort_sign(idx);
    if (sign == 0) throw std::invalid_argument("BladeTensor: repeated index in blade");
    uint64_t blade = 0;
    for (int i : idx) {
      if (i < 0 || i >= basis_.dim()) throw std::out_of_range("BladeTensor: index out of range");
      blade |= uint64_t{1} << i;
    }
    terms_.erase(blade);
    add_blade(blade, sign * value);
  }

  void set_component(std::initializer_list<int> indices, double value) {
    set_component(std::span<const int>(indices.begin(), indices.size()), value);
  }

  // Signed coefficient for an index list (0 when absent).
  double component(std::span<const int> indices) const {
    std::vector<int> idx(indices.begin(), indices.end());
    const int sign = detail::sort_sign(idx);
    if (sign == 0) return 0.0;
    uint64_t blade = 0;
    for (int i : idx) {
      if (i < 0 || i >= basis_.dim()) throw std::out_of_range("BladeTensor: index out of range");
      blade |= uint64_t{1} << i;
    }
    auto it = terms_.find(blade);
    return it == terms_.end() ? 0.0 : sign * it->second;
  }

  double component(std::initializer_list<int> indices) const {
    return component(std::span<const int>(indices.begin(), indices.size()));
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& [blade, c] : terms_) m = std::max(m, std::fabs(c));
    return m;
  }

  double norm2() const {
    double s = 0.0;
    for (const auto& [blade, c] : terms_) s += c * c;
    return std::sqrt(s);
  }

  BladeTensor& operator+=(const BladeTensor& o) {
    require_compatible(o);
    for (const auto& [blade, c] : o.terms_) add_blade(blade, c);
    return *this;
  }
  BladeTensor& operator-=(const BladeTensor& o) {
    require_compatible(o);
    for (const auto& [blade, c] : o.terms_) add_blade(blade, -c);
    return *this;
  }
  BladeTensor& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
    } else {
      for (auto& [blade, c] : terms_) c *= s;
    }
    return *this;
  }

  friend BladeTensor operator+(BladeTensor a, const BladeTensor& b) { a += b; return a; }
  friend BladeTensor operator-(BladeTensor a, const BladeTensor& b) { a -= b; return a; }
  friend BladeTensor operator*(BladeTensor a, double s) { a *= s; return a; }
  friend BladeTensor operator*(double s, BladeTensor a) { a *= s; return a; }

  void require_compatible(const BladeTensor& o) const {
    if (basis_ != o.basis_) throw std::invalid_argument("BladeTensor: basis mismatch");
    if (grade_ != o.grade_) throw std::invalid_argument("BladeTensor: grade mismatch");
  }

 private:
  GradedBasis basis_;
  int grade_ = 0;
  std::map<uint64_t, double> terms_;
};

using Multivector = BladeTensor<false>;
using Form = BladeTensor<true>;

template <bool IsForm>
BladeTensor<IsForm> wedge(const BladeTensor<IsForm>& a, const BladeTensor<IsForm>& b) {
  if (a.basis() != b.basis()) throw std::invalid_argument("wedge: basis mismatch");
  const int k = a.grade() + b.grade();
  if (k > a.basis().dim()) throw std::invalid_argument("wedge: grade exceeds dimension");
  BladeTensor<IsForm> out(a.basis(), k);
  for (const auto& [ba, ca] : a.terms()) {
    for (const auto& [bb, cb] : b.terms()) {
      const int sign = blade_merge_sign(ba, bb);
      if (sign != 0) out.add_blade(ba | bb, sign * ca * cb);
    }
  }
  return out;
}

// Interior product: the factors of x fill the first grade(x) slots of w in
// factor order. Requires grade(x) <= grade(w); the result has grade
// grade(w) - grade(x).
inline Form contract(const Multivector& x, const Form& w) {
  if (x.basis() != w.basis()) throw std::invalid_argument("contract: basis mismatch");
  if (x.grade() > w.grade()) throw std::invalid_argument("contract: multivector grade exceeds form grade");
  Form out(w.basis(), w.grade() - x.grade());
  for (const auto& [bx, cx] : x.terms()) {
    for (const auto& [bw, cw] : w.terms()) {
      if ((bx & bw) != bx) continue;  // factors must all appear in the form blade
      int sign = 1;
      uint64_t rest = bw;
      for (uint64_t s = bx; s != 0;) {
        const uint64_t low = s & (~s + 1);  // least significant factor
        if (std::popcount(rest & (low - 1)) & 1) sign = -sign;
        rest &= ~low;
        s &= ~low;
      }
      out.add_blade(rest, sign * cx * cw);
    }
  }
  return out;
}

inline Multivector unit_vector(const GradedBasis& basis, int index) {
  const int idx[1] = {index};
  return Multivector::from_indices(basis, idx);
}

inline Form unit_form(const GradedBasis& basis, int index) {
  const int idx[1] = {index};
  return Form::from_indices(basis, idx);
}

inline Multivector vector_from_components(const GradedBasis& basis, std::span<const double> comp) {
  if (static_cast<int>(comp.size()) != basis.dim())
    throw std::invalid_argument("vector_from_components: size mismatch");
  Multivector v(basis, 1);
  for (int i = 0; i < basis.dim(); ++i)
    if (comp[i] != 0.0) v.add_blade(uint64_t{1} << i, comp[i]);
  return v;
}

template <bool IsForm>
std::vector<double> vector_components(const BladeTensor<IsForm>& v) {
  if (v.grade() != 1) throw std::invalid_argument("vector_components: grade-1 input required");
  std::vector<double> comp(v.basis().dim(), 0.0);
  for (const auto& [blade, c] : v.terms()) comp[std::countr_zero(blade)] = c;
  return comp;
}

// Diagonal metric. Entries must be nonzero; the Hodge star below is stated
// for signature entries +-1 (orientation convention eps_{1...D} = +1).
struct Metric {
  std::vector<double> diag;

  static Metric euclidean(int dim) { return Metric{std::vector<double>(dim, 1.0)}; }
  // diag(+1, -1, ..., -1) with the first direction timelike.
  static Metric minkowski(int dim) {
    Metric g{std::vector<double>(dim, -1.0)};
    g.diag[0] = 1.0;
    return g;
  }

  int dim() const { return static_cast<int>(diag.size()); }
  void validate() const {
    for (double d : diag)
      if (d == 0.0) throw std::invalid_argument("Metric: singular diagonal entry");
  }
  double det_sign() const {
    validate();
    int neg = 0;
    for (double d : diag)
      if (d < 0.0) ++neg;
    return (neg & 1) ? -1.0 : 1.0;
  }
};

// Hodge star with eps_{1...D} = +1: for a blade S with ordered complement
// S', *e_S = (prod_{i in S} g_ii) * sign(S, S') * e_{S'}. Satisfies
// **X = (-1)^{k(D-k)} sign(det g) X for unit diagonal entries.
inline Multivector hodge_star(const Multivector& x, const Metric& g) {
  if (g.dim() != x.basis().dim()) throw std::invalid_argument("hodge_star: metric dimension mismatch");
  g.validate();
  const int d = x.basis().dim();
  const uint64_t full = (d == 64) ? ~uint64_t{0} : ((uint64_t{1} << d) - 1);
  Multivector out(x.basis(), d - x.grade());
  for (const auto& [blade, c] : x.terms()) {
    double factor = c;
    for (uint64_t s = blade; s != 0; s &= s - 1) factor *= g.diag[std::countr_zero(s)];
    const uint64_t comp = full & ~blade;
    out.add_blade(comp, blade_merge_sign(blade, comp) * factor);
  }
  return out;
}

// Basis of the annihilator { v : v ^ X = 0 } of a nonzero multivector, via
// the null space of the matrix of v -> v ^ X (rank-revealing elimination,
// pivot tolerance pivot_tol x largest column norm).
inline std::vector<std::vector<double>> annihilator(const Multivector& x, double pivot_tol = 1e-10) {
  if (x.is_zero()) throw std::invalid_argument("annihilator: zero multivector");
  const int d = x.basis().dim();
  if (x.grade() == d) {
    // Top grade: every vector wedges to zero (grade overflow).
    std::vector<std::vector<double>> all;
    for (int i = 0; i < d; ++i) {
      std::vector<double> v(d, 0.0);
      v[i] = 1.0;
      all.push_back(std::move(v));
    }
    return all;
  }

  std::vector<Multivector> images;
  std::map<uint64_t, int> row_of;
  for (int j = 0; j < d; ++j) {
    images.push_back(wedge(unit_vector(x.basis(), j), x));
    for (const auto& [blade, c] : images.back().terms())
      row_of.emplace(blade, static_cast<int>(row_of.size()));
  }
  Matrix m(std::max<int>(1, static_cast<int>(row_of.size())), d);
  for (int j = 0; j < d; ++j)
    for (const auto& [blade, c] : images[j].terms()) m(row_of.at(blade), j) = c;
  return null_space(m, pivot_tol);
}

struct DecomposabilityReport {
  bool decomposable = false;
  int annihilator_dim = 0;
  std::vector<Multivector> factors;  // present iff decomposable
  double scale = 0.0;                // X = scale * factors[0] ^ ... ^ factors[k-1]
};

// Annihilator-criterion decomposability test: X of grade 1 <= k < D is a
// wedge of k vectors iff its annihilator has dimension exactly k; the
// annihilator basis then supplies the factors. Top grade is decomposable
// outright.
inline DecomposabilityReport is_decomposable(const Multivector& x, double pivot_tol = 1e-10) {
  if (x.is_zero()) throw std::invalid_argument("is_decomposable: zero multivector");
  const int k = x.grade();
  const int d = x.basis().dim();
  if (k < 1) throw std::invalid_argument("is_decomposable: grade-0 input");

  DecomposabilityReport report;
  if (k == d) {
    report.decomposable = true;
    report.annihilator_dim = d;
    for (int i = 0; i < d; ++i) report.factors.push_back(unit_vector(x.basis(), i));
    report.scale = x.terms().begin()->second;
    return report;
  }

  const auto ann = annihilator(x, pivot_tol);
  report.annihilator_dim = static_cast<int>(ann.size());
  report.decomposable = (report.annihilator_dim == k);
  if (!report.decomposable) return report;

  for (const auto& v : ann) report.factors.push_back(vector_from_components(x.basis(), v));
  Multivector w = report.factors[0];
  for (int i = 1; i < k; ++i) w = wedge(w, report.factors[i]);
  // Match scales on the largest coefficient of the reconstructed wedge.
  uint64_t best_blade = 0;
  double best = 0.0;
  for (const auto& [blade, c] : w.terms()) {
    if (std::fabs(c) > std::fabs(best)) { best = c; best_blade = blade; }
  }
  if (best == 0.0) throw std::runtime_error("is_decomposable: annihilator factors wedge to zero");
  auto it = x.terms().find(best_blade);
  report.scale = (it == x.terms().end() ? 0.0 : it->second) / best;
  return report;
}

}  // namespace polysymp
