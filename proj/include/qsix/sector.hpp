// Charge-sector bases: monomials of fixed total degree over M sites, with an
// optional per-site cap for the finite-dimensional (integer spin) case, and
// the dense operator-matrix carrier built on top of them.

#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <vector>

#include "qsix/qkernel.hpp"

namespace qsix {

/// Site occupation numbers (i_1, ..., i_M).
using Monomial = std::vector<int>;

template <class S>
using ComplexMatrix =
    Eigen::Matrix<Complex<S>, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using ComplexVector = Eigen::Matrix<Complex<S>, Eigen::Dynamic, 1>;

/// Ordered basis of the sector W_l: all monomials of total degree `degree`
/// over `sites` variables, each exponent <= cap when a cap is present.
/// Members are in descending lexicographic order (leftmost site most
/// significant), which is the graded-lex order within one degree.
class SectorBasis {
 public:
  SectorBasis() = default;
  SectorBasis(int sites, int degree, std::optional<int> cap = std::nullopt)
      : sites_(sites), degree_(degree), cap_(cap) {
    if (sites <= 0) throw DomainError("SectorBasis: sites must be positive");
    if (degree < 0) throw DomainError("SectorBasis: negative degree");
    if (cap && *cap < 0) throw DomainError("SectorBasis: negative cap");
    if (cap && degree > sites * *cap)
      throw DomainError("SectorBasis: empty sector, degree > sites * cap");
    Monomial m(sites, 0);
    emit(m, 0, degree);
    for (int k = 0; k < static_cast<int>(members_.size()); ++k)
      index_[members_[k]] = k;
  }

  int sites() const { return sites_; }
  int degree() const { return degree_; }
  std::optional<int> cap() const { return cap_; }
  int size() const { return static_cast<int>(members_.size()); }
  const std::vector<Monomial>& members() const { return members_; }
  const Monomial& member(int k) const { return members_[k]; }

  /// Position of m in members(); throws NotFoundError outside the sector.
  int index_of(const Monomial& m) const {
    auto it = index_.find(m);
    if (it == index_.end())
      throw NotFoundError("SectorBasis: monomial outside the sector");
    return it->second;
  }

  bool contains(const Monomial& m) const { return index_.count(m) != 0; }

  bool operator==(const SectorBasis& o) const {
    return sites_ == o.sites_ && degree_ == o.degree_ && cap_ == o.cap_;
  }

 private:
  void emit(Monomial& m, int site, int remaining) {
    const int per_site = cap_ ? *cap_ : remaining;
    if (site == sites_ - 1) {
      if (remaining <= per_site) {
        m[site] = remaining;
        members_.push_back(m);
      }
      return;
    }
    const int tail_cap = cap_ ? *cap_ * (sites_ - site - 1) : remaining;
    const int lo = std::max(0, remaining - tail_cap);
    const int hi = std::min(per_site, remaining);
    for (int e = hi; e >= lo; --e) {
      m[site] = e;
      emit(m, site + 1, remaining - e);
    }
    m[site] = 0;
  }

  int sites_ = 0;
  int degree_ = 0;
  std::optional<int> cap_;
  std::vector<Monomial> members_;
  std::map<Monomial, int> index_;
};

inline SectorBasis enumerate_basis(int sites, int degree,
                                   std::optional<int> cap = std::nullopt) {
  return SectorBasis(sites, degree, cap);
}

/// Dense complex matrix over a sector basis;
/// entries(r, c) = coefficient of member r in the image of member c.
template <class S>
struct OperatorMatrix {
  SectorBasis basis;
  ComplexMatrix<S> entries;

  OperatorMatrix() = default;
  explicit OperatorMatrix(const SectorBasis& b)
      : basis(b), entries(ComplexMatrix<S>::Zero(b.size(), b.size())) {}
  OperatorMatrix(const SectorBasis& b, ComplexMatrix<S> m)
      : basis(b), entries(std::move(m)) {}

  int dim() const { return basis.size(); }
};

/// Max-absolute-entry norm; the residual norm used throughout.
template <class Derived>
auto max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return decltype(std::abs(typename Derived::Scalar{})){0};
  return m.cwiseAbs().maxCoeff();
}

/// Scale-free commutator residual |[A,B]| / (|A| |B|).
template <class S>
S commutator_residual(const ComplexMatrix<S>& a, const ComplexMatrix<S>& b) {
  const S na = max_abs(a), nb = max_abs(b);
  if (na == S(0) || nb == S(0)) return S(0);
  return max_abs((a * b - b * a).eval()) / (na * nb);
}

}  // namespace qsix
