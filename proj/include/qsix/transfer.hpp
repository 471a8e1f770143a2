// The six-vertex transfer matrix at arbitrary complex spin: model parameters,
// the local L-operator acting on one Verma-module site, the sector block
// T^{(l)}(lambda; phi) assembled as an auxiliary-space trace, and an
// independently coded q-difference oracle for it.

#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>

#include "qsix/qkernel.hpp"
#include "qsix/sector.hpp"

namespace qsix {

/// Parameter bundle (q, zeta, phi, lambda) with optional integer spin I.
/// zeta = q^{I/2}; every I-dependent exponent is routed through zeta so that
/// non-integer spin never needs a branch choice beyond the one made when
/// zeta itself was fixed.
template <class S>
struct ModelParams {
  Complex<S> q{0, 0};
  Complex<S> zeta{0, 0};
  Complex<S> phi{0, 0};
  Complex<S> lambda{0, 0};
  std::optional<int> spin_I;

  void validate() const {
    const S qa = std::abs(q);
    if (!(qa > S(0)) || !(qa < S(1)))
      throw DomainError("ModelParams: requires 0 < |q| < 1");
    if (zeta == Complex<S>(0)) throw DomainError("ModelParams: zeta = 0");
    if (phi == Complex<S>(0)) throw DomainError("ModelParams: phi = 0");
    if (lambda == Complex<S>(0)) throw DomainError("ModelParams: lambda = 0");
    if (spin_I) {
      if (*spin_I < 0) throw DomainError("ModelParams: negative integer spin");
      if (std::abs(zeta * zeta - ipow(q, *spin_I)) > S(1e-12))
        throw DomainError("ModelParams: zeta inconsistent with integer I");
    }
  }

  ModelParams with_lambda(Complex<S> lam) const {
    ModelParams p = *this;
    p.lambda = lam;
    return p;
  }
  ModelParams with_phi(Complex<S> f) const {
    ModelParams p = *this;
    p.phi = f;
    return p;
  }

  /// Generic complex spin, identified by zeta directly.
  static ModelParams generic(Complex<S> q, Complex<S> zeta, Complex<S> phi,
                             Complex<S> lambda) {
    ModelParams p{q, zeta, phi, lambda, std::nullopt};
    p.validate();
    return p;
  }

  /// Integer spin I; zeta = q^{I/2} on the principal branch.
  static ModelParams integer_spin(Complex<S> q, int I, Complex<S> phi,
                                  Complex<S> lambda) {
    ModelParams p{q, std::pow(q, Complex<S>(S(I) / S(2))), phi, lambda, I};
    p.validate();
    return p;
  }

  /// Smallest N <= 64 with |q^N - 1| < 1e-8, if any. The series and traces
  /// here assume q is not (close to) a root of unity.
  std::optional<int> root_of_unity_warning() const {
    Complex<S> qn(1);
    for (int n = 1; n <= 64; ++n) {
      qn *= q;
      if (std::abs(qn - Complex<S>(1)) < S(1e-8)) return n;
    }
    return std::nullopt;
  }
};

/// One matrix element of the local L-operator: v_i -> coeff * v_{i+shift}.
template <class S>
struct LocalLEntry {
  Complex<S> coeff;
  int shift;
};

/// The four elements of L(lambda; phi) acting on v_i, indexed [row][col] in
/// the 2x2 auxiliary space. L11 and L22 are diagonal in i, L12 raises,
/// L21 lowers and annihilates v_0.
template <class S>
using LocalLRow = std::array<std::array<LocalLEntry<S>, 2>, 2>;

template <class S>
LocalLRow<S> local_L(const ModelParams<S>& p, int i) {
  if (p.spin_I && (i < 0 || i > *p.spin_I))
    throw DomainError("local_L: occupation outside the capped module");
  const Complex<S> qi = ipow(p.q, i);
  const Complex<S> qmi = Complex<S>(1) / qi;
  const Complex<S> lam = p.lambda, z = p.zeta, phi = p.phi;
  LocalLRow<S> L;
  L[0][0] = {(lam * z * qmi - qi / (lam * z)) / phi, 0};
  L[0][1] = {(z * z * qmi - qi / (z * z)) / phi, +1};
  L[1][0] = {i == 0 ? Complex<S>(0) : phi * (qi - qmi), -1};
  L[1][1] = {phi * (lam / z * qi - z / lam * qmi), 0};
  return L;
}

namespace detail {

// Concatenation of the sector bases of degrees l-1, l, l+1 (those reachable
// given the cap). Partial products of local L's move through adjacent
// sectors, so this is exactly the space the accumulation lives in.
struct FatBasis {
  std::vector<Monomial> members;
  std::map<Monomial, int> index;

  FatBasis(const SectorBasis& sector) {
    const int M = sector.sites();
    const auto cap = sector.cap();
    for (int d = sector.degree() - 1; d <= sector.degree() + 1; ++d) {
      if (d < 0) continue;
      if (cap && d > M * *cap) continue;
      SectorBasis b(M, d, cap);
      for (const auto& m : b.members()) {
        index[m] = static_cast<int>(members.size());
        members.push_back(m);
      }
    }
  }
};

template <class S>
ComplexMatrix<S> lift_local(const FatBasis& fat, int site,
                            const std::vector<LocalLEntry<S>>& entry_by_i) {
  const int n = static_cast<int>(fat.members.size());
  ComplexMatrix<S> m = ComplexMatrix<S>::Zero(n, n);
  for (int c = 0; c < n; ++c) {
    const Monomial& mono = fat.members[c];
    const auto& e = entry_by_i[mono[site]];
    if (e.coeff == Complex<S>(0)) continue;
    Monomial img = mono;
    img[site] += e.shift;
    if (img[site] < 0) continue;
    auto it = fat.index.find(img);
    // a capped image may fall outside the fat basis only through the
    // analytically vanishing L12 coefficient at i = I
    if (it == fat.index.end()) continue;
    m(it->second, c) += e.coeff;
  }
  return m;
}

}  // namespace detail

/// T^{(l)}(lambda; phi) on the sector: trace over the 2-dimensional auxiliary
/// space of the ordered product L_1 ... L_M, accumulated left to right as a
/// 2x2 matrix of sector operators. Off-sector components of the result are
/// structurally zero; this is checked exactly.
template <class S>
OperatorMatrix<S> build_transfer(const ModelParams<S>& p,
                                 const SectorBasis& basis) {
  p.validate();
  if (p.spin_I && (!basis.cap() || *basis.cap() != *p.spin_I))
    throw DomainError("build_transfer: basis cap inconsistent with spin_I");
  const int M = basis.sites();
  detail::FatBasis fat(basis);
  const int cap_i = basis.cap() ? *basis.cap() : basis.degree() + 1;

  std::array<std::array<ComplexMatrix<S>, 2>, 2> acc;
  for (int site = 0; site < M; ++site) {
    std::array<std::array<std::vector<LocalLEntry<S>>, 2>, 2> rows;
    for (int i = 0; i <= cap_i; ++i) {
      const LocalLRow<S> L = local_L(p, i);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) rows[a][b].push_back(L[a][b]);
    }
    std::array<std::array<ComplexMatrix<S>, 2>, 2> s;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        s[a][b] = detail::lift_local<S>(fat, site, rows[a][b]);
    if (site == 0) {
      acc = s;
    } else {
      std::array<std::array<ComplexMatrix<S>, 2>, 2> next;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          next[a][b] = acc[a][0] * s[0][b] + acc[a][1] * s[1][b];
      acc = next;
    }
  }
  ComplexMatrix<S> fat_T = acc[0][0] + acc[1][1];

  OperatorMatrix<S> out(basis);
  const int fat_n = static_cast<int>(fat.members.size());
  std::vector<int> row_of(fat_n, -1);
  std::vector<int> sel(basis.size());
  for (int k = 0; k < basis.size(); ++k) {
    sel[k] = fat.index.at(basis.member(k));
    row_of[sel[k]] = k;
  }
  for (int c = 0; c < basis.size(); ++c) {
    for (int r = 0; r < fat_n; ++r) {
      const Complex<S> v = fat_T(r, sel[c]);
      if (row_of[r] < 0) {
        if (v != Complex<S>(0))
          throw Error("build_transfer: sector block invariance violated");
      } else {
        out.entries(row_of[r], c) = v;
      }
    }
  }
  return out;
}

/// Image of one monomial under the transfer matrix, computed through the
/// polynomial representation: the L-operator entries act as q-difference
/// operators built from X (multiply by x_i) and D (x_i -> q x_i), applied
/// right to left over the auxiliary 2x2 product. Serves as an independent
/// oracle for build_transfer.
template <class S>
std::map<Monomial, Complex<S>> apply_transfer_qdiff(const ModelParams<S>& p,
                                                    const Monomial& mono) {
  p.validate();
  using Poly = std::map<Monomial, Complex<S>>;
  const int M = static_cast<int>(mono.size());
  const Complex<S> lam = p.lambda, z = p.zeta, phi = p.phi, q = p.q;

  // entry (a,b) of the local operator applied to a polynomial, site by site
  auto apply_entry = [&](int a, int b, const Poly& poly, int site) {
    Poly out;
    for (const auto& [m, c] : poly) {
      const int i = m[site];
      const Complex<S> qi = ipow(q, i);
      const Complex<S> qmi = Complex<S>(1) / qi;
      if (a == 0 && b == 0) {
        out[m] += c * (lam * z * qmi - qi / (lam * z)) / phi;
      } else if (a == 0 && b == 1) {
        Monomial mm = m;
        mm[site] += 1;
        out[mm] += c * (z * z * qmi - qi / (z * z)) / phi;
      } else if (a == 1 && b == 0) {
        if (i == 0) continue;
        Monomial mm = m;
        mm[site] -= 1;
        out[mm] += c * phi * (qi - qmi);
      } else {
        out[m] += c * phi * (lam / z * qi - z / lam * qmi);
      }
    }
    return out;
  };

  // P[a][b] = (L_{site} ... L_M)_{ab} applied to x^mono
  std::array<std::array<Poly, 2>, 2> P;
  P[0][0][mono] = Complex<S>(1);
  P[1][1][mono] = Complex<S>(1);
  for (int site = M - 1; site >= 0; --site) {
    std::array<std::array<Poly, 2>, 2> next;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        for (int c2 = 0; c2 < 2; ++c2) {
          for (const auto& [m, v] : apply_entry(a, c2, P[c2][b], site))
            next[a][b][m] += v;
        }
      }
    }
    P = next;
  }
  Poly out;
  for (int a = 0; a < 2; ++a)
    for (const auto& [m, v] : P[a][a]) out[m] += v;
  return out;
}

/// Matrix of the q-difference oracle over a sector basis.
template <class S>
OperatorMatrix<S> build_transfer_qdiff(const ModelParams<S>& p,
                                       const SectorBasis& basis) {
  OperatorMatrix<S> out(basis);
  for (int c = 0; c < basis.size(); ++c) {
    const auto img = apply_transfer_qdiff(p, basis.member(c));
    S scale(0);
    for (const auto& [m, v] : img) scale = std::max(scale, std::abs(v));
    for (const auto& [m, v] : img) {
      if (!basis.contains(m)) {
        // only the rounding-level cap leakage of integer mode may land here
        if (std::abs(v) > S(1e-12) * scale)
          throw Error("build_transfer_qdiff: image left the sector");
        continue;
      }
      out.entries(basis.index_of(m), c) += v;
    }
  }
  return out;
}

}  // namespace qsix
