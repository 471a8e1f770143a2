// The polynomial Q-operator Q_f(lambda): its one-site monomial action, sector
// matrices assembled by composing per-site actions with the cyclic x_0 = x_M
// convention, the direct matrix-element formula used as an oracle, the
// composition coefficients c(lambda,mu)_{m,n,k}, the lambda -> infinity limit
// Q_infinity, and the generating-function identity check.

#pragma once

#include <map>
#include <vector>

#include "qsix/qkernel.hpp"
#include "qsix/sector.hpp"
#include "qsix/transfer.hpp"

namespace qsix {

/// One-site action of Q_f: y_i^m -> sum_{k=0}^m coeff[k] x_{i-1}^k x_i^{m-k}.
template <class S>
struct QfActionRow {
  int power = 0;
  std::vector<Complex<S>> coeff;
};

namespace detail {

/// Throws SingularityError when (zeta^{-4};q^2)_m has a (near-)zero factor,
/// which happens exactly at integer spin I with m > I.
template <class S>
Complex<S> zeta4_poch(const ModelParams<S>& p, int m) {
  const Complex<S> q2 = p.q * p.q;
  const Complex<S> zm4 = Complex<S>(1) / ipow(p.zeta, 4);
  Complex<S> prod(1);
  Complex<S> f = zm4;
  for (int k = 0; k < m; ++k) {
    const Complex<S> factor = Complex<S>(1) - f;
    if (std::abs(factor) < S(1e-10))
      throw SingularityError(
          "(zeta^{-4};q^2)_" + std::to_string(m) +
          " vanishes: Q_f is singular for m > I at integer spin");
    prod *= factor;
    f *= q2;
  }
  return prod;
}

}  // namespace detail

/// Coefficients of Q_f on one site,
///   c_k = (lam/zeta)^m (q^2;q^2)_m/(zeta^{-4};q^2)_m (phi^2/lam^2)^k
///         (lam^2 zeta^{-2};q^2)_k (lam^{-2} zeta^{-2};q^2)_{m-k}
///         / ((q^2;q^2)_k (q^2;q^2)_{m-k}).
template <class S>
QfActionRow<S> qf_monomial_action(const ModelParams<S>& p, int m) {
  p.validate();
  if (m < 0) throw DomainError("qf_monomial_action: negative power");
  const Complex<S> q2 = p.q * p.q;
  const Complex<S> lam = p.lambda, z = p.zeta, phi = p.phi;
  const Complex<S> pref =
      ipow(lam / z, m) * qpoch(q2, q2, m) / detail::zeta4_poch(p, m);
  const Complex<S> lz2 = lam * lam / (z * z);
  const Complex<S> ilz2 = Complex<S>(1) / (lam * lam * z * z);
  const Complex<S> ratio = phi * phi / (lam * lam);
  QfActionRow<S> row{m, {}};
  row.coeff.reserve(m + 1);
  for (int k = 0; k <= m; ++k) {
    row.coeff.push_back(pref * ipow(ratio, k) * qpoch(lz2, q2, k) *
                        qpoch(ilz2, q2, m - k) /
                        (qpoch(q2, q2, k) * qpoch(q2, q2, m - k)));
  }
  return row;
}

/// Q_f applied to a polynomial (map monomial -> coefficient) by composing the
/// per-site actions; site 0 spreads onto site M-1 (cyclic convention).
template <class S>
std::map<Monomial, Complex<S>> apply_qf(const ModelParams<S>& p,
                                        const std::map<Monomial, Complex<S>>& poly) {
  std::map<Monomial, Complex<S>> out;
  if (poly.empty()) return out;
  const int M = static_cast<int>(poly.begin()->first.size());
  for (const auto& [mono, coeff] : poly) {
    std::map<Monomial, Complex<S>> cur;
    cur[Monomial(M, 0)] = coeff;
    for (int s = 0; s < M; ++s) {
      const QfActionRow<S> row = qf_monomial_action(p, mono[s]);
      std::map<Monomial, Complex<S>> next;
      const int left = (s + M - 1) % M;
      for (const auto& [pm, pc] : cur) {
        for (int k = 0; k <= row.power; ++k) {
          Monomial nm = pm;
          nm[left] += k;
          nm[s] += row.power - k;
          next[nm] += pc * row.coeff[k];
        }
      }
      cur = std::move(next);
    }
    for (const auto& [m2, c2] : cur) out[m2] += c2;
  }
  return out;
}

/// Sector matrix of Q_f (uncapped basis; integer spin must go through the
/// factorized A_+ instead, where the singular factors cancel).
template <class S>
OperatorMatrix<S> build_qf(const ModelParams<S>& p, const SectorBasis& basis) {
  p.validate();
  OperatorMatrix<S> out(basis);
  for (int c = 0; c < basis.size(); ++c) {
    std::map<Monomial, Complex<S>> unit;
    unit[basis.member(c)] = Complex<S>(1);
    for (const auto& [m, v] : apply_qf(p, unit))
      out.entries(basis.index_of(m), c) += v;
  }
  return out;
}

/// Direct matrix element [Q_f]_{(i)}^{(j)} (rows = output monomial (i),
/// columns = input (j)); the single-sum form with delta_k = sum_{s<k}
/// (i_s - j_s). Columns may be restricted to a capped basis at integer spin;
/// rows range over any degree-l monomials.
template <class S>
Complex<S> qf_element(const ModelParams<S>& p, const Monomial& iout,
                      const Monomial& jin) {
  const int M = static_cast<int>(jin.size());
  const Complex<S> q2 = p.q * p.q;
  const Complex<S> lam = p.lambda, z = p.zeta, phi = p.phi;
  Complex<S> pref(1);
  for (int k = 0; k < M; ++k)
    pref *= ipow(lam / z, jin[k]) * qpoch(q2, q2, jin[k]) /
            detail::zeta4_poch(p, jin[k]);
  std::vector<int> delta(M, 0);
  for (int k = 1; k < M; ++k) delta[k] = delta[k - 1] + iout[k - 1] - jin[k - 1];
  const Complex<S> lz2 = lam * lam / (z * z);
  const Complex<S> ilz2 = Complex<S>(1) / (lam * lam * z * z);
  const Complex<S> ratio = phi * phi / (lam * lam);
  detail::KahanSum<S> acc;
  for (int l1 = 0; l1 <= jin[0]; ++l1) {
    Complex<S> term(1);
    bool valid = true;
    for (int k = 0; k < M; ++k) {
      const int pk = l1 + delta[k];
      if (pk < 0 || pk > jin[k]) {
        valid = false;
        break;
      }
      term *= ipow(ratio, pk) * qpoch(lz2, q2, pk) *
              qpoch(ilz2, q2, jin[k] - pk) /
              (qpoch(q2, q2, pk) * qpoch(q2, q2, jin[k] - pk));
    }
    if (valid) acc.add(term);
  }
  return pref * acc.value();
}

/// Composition coefficient c(lambda,mu)_{m,n,k} of
/// Q_f(lambda) Q_f(mu) x_{i+1}^m over x_{i-1}^n x_i^{m-n-k} x_{i+1}^k,
/// evaluated through the balanced 4phi3. Symmetric under lambda <-> mu.
template <class S>
Complex<S> compose_coeff(const ModelParams<S>& p, Complex<S> mu, int m, int n,
                         int k) {
  p.validate();
  if (n < 0 || k < 0 || n + k > m)
    throw DomainError("compose_coeff: needs 0 <= n+k <= m");
  const Complex<S> q2 = p.q * p.q;
  const Complex<S> lam = p.lambda, z = p.zeta, phi = p.phi;
  const Complex<S> zm4 = Complex<S>(1) / ipow(z, 4);
  const Complex<S> pref = ipow(phi, 2 * (m + n - k)) * ipow(lam, 2 * k - m) *
                          ipow(mu, m - 2 * n) / ipow(z, 2 * m);
  const Complex<S> num = qpoch(Complex<S>(1) / (lam * lam * z * z), q2, k) *
                         qpoch(Complex<S>(1) / (mu * mu * z * z), q2, m - n) *
                         qpoch(lam * lam / (z * z), q2, m - n - k);
  const Complex<S> den = detail::zeta4_poch(p, m) * detail::zeta4_poch(p, m - n) *
                         qpoch(q2, q2, n) * detail::zeta4_poch(p, n);
  const Complex<S> num2 = qpoch(q2, q2, m) * qpoch(lam * lam / (z * z), q2, n) *
                          qpoch(mu * mu / (z * z), q2, n);
  const Complex<S> den2 = qpoch(q2, q2, k) * qpoch(q2, q2, m - n - k);
  SeriesSpec<S> spec;
  spec.a = {ipow(q2, 1 + n - m) * ipow(z, 4),
            Complex<S>(1) / (lam * lam * z * z),
            ipow(p.q, 2 * n) * mu * mu / (z * z)};
  spec.b = {ipow(p.q, 2 * n) * zm4,
            ipow(q2, 1 - (m - k - n)) * z * z / (lam * lam),
            ipow(q2, 1 + n - m) * mu * mu * z * z};
  spec.n = m - k - n;
  spec.q = q2;
  spec.z = q2;
  return pref * num * num2 / (den * den2) * phi_standard(spec);
}

/// The lambda -> infinity limit of lambda^{-l} Q_f(lambda) on the sector.
template <class S>
OperatorMatrix<S> build_qinf(const ModelParams<S>& p, const SectorBasis& basis) {
  p.validate();
  const Complex<S> q2 = p.q * p.q;
  const Complex<S> z = p.zeta, phi = p.phi;
  const int M = basis.sites();
  const int l = basis.degree();
  OperatorMatrix<S> out(basis);
  for (int r = 0; r < basis.size(); ++r) {
    const Monomial& iout = basis.member(r);
    for (int c = 0; c < basis.size(); ++c) {
      const Monomial& jin = basis.member(c);
      std::vector<int> delta(M, 0);
      for (int k = 1; k < M; ++k)
        delta[k] = delta[k - 1] + iout[k - 1] - jin[k - 1];
      Complex<S> pref = ipow(z, -l);
      for (int k = 0; k < M; ++k) pref /= detail::zeta4_poch(p, jin[k]);
      detail::KahanSum<S> acc;
      for (int l1 = 0; l1 <= std::max(iout[0], jin[0]); ++l1) {
        Complex<S> term(1);
        bool valid = true;
        for (int k = 0; k < M; ++k) {
          const int pk = l1 + delta[k];
          if (pk < 0 || pk > jin[k]) {
            valid = false;
            break;
          }
          term *= qpoch(ipow(p.q, -2 * jin[k]), q2, pk) / qpoch(q2, q2, pk) *
                  ipow(ipow(p.q, jin[k]) * phi / z, 2 * pk);
        }
        if (valid) acc.add(term);
      }
      out.entries(r, c) = pref * acc.value();
    }
  }
  return out;
}

/// Coefficientwise residual of the generating-function identity through total
/// order `order` in the formal expansion variables mu_i. The optional
/// mu_scale values only weight the compared coefficients.
template <class S>
S genfun_residual(const ModelParams<S>& p, const std::vector<Complex<S>>& mu_scale,
                  int order, int sites) {
  p.validate();
  if (p.spin_I) throw DomainError("genfun_residual: uncapped mode only");
  if (order < 0) throw DomainError("genfun_residual: negative order");
  const int M = sites;
  const Complex<S> q2 = p.q * p.q;
  const Complex<S> lam = p.lambda, z = p.zeta, phi = p.phi;
  std::vector<Complex<S>> muv = mu_scale;
  muv.resize(M, Complex<S>(1));

  S worst(0);
  std::vector<int> alpha(M, 0);
  // iterate over all multi-indices with 1 <= |alpha| <= order
  while (true) {
    int pos = 0;
    while (pos < M && alpha[pos] == order) alpha[pos++] = 0;
    if (pos == M) break;
    ++alpha[pos];
    int total = 0;
    for (int a : alpha) total += a;
    if (total == 0 || total > order) continue;

    SectorBasis basis(M, total);
    Complex<S> muw(1);
    for (int i = 0; i < M; ++i) muw *= ipow(muv[i], alpha[i]);

    // left side: prod_i weight(alpha_i) times Q_f x^alpha
    Complex<S> w(1);
    for (int i = 0; i < M; ++i)
      w *= ipow(z, 2 * alpha[i]) * ipow(phi, -alpha[i]) *
           detail::zeta4_poch(p, alpha[i]) / qpoch(q2, q2, alpha[i]);
    std::map<Monomial, Complex<S>> unit;
    unit[alpha] = Complex<S>(1);
    ComplexVector<S> lhs = ComplexVector<S>::Zero(basis.size());
    for (const auto& [m, v] : apply_qf(p, unit))
      lhs(basis.index_of(m)) += w * v * muw;

    // right side: per site, coefficient of mu_i^{alpha_i} in the product of
    // the two q-binomial expansions, convolved
    ComplexVector<S> rhs = ComplexVector<S>::Zero(basis.size());
    std::map<Monomial, Complex<S>> cur;
    cur[Monomial(M, 0)] = Complex<S>(1);
    for (int i = 0; i < M; ++i) {
      const int ai = alpha[i];
      const int left = (i + M - 1) % M;
      std::map<Monomial, Complex<S>> next;
      for (int n = 0; n <= ai; ++n) {
        const Complex<S> an = qpoch(lam * lam / (z * z), q2, n) /
                              qpoch(q2, q2, n) * ipow(z / lam * phi, n);
        const Complex<S> bj =
            qpoch(Complex<S>(1) / (lam * lam * z * z), q2, ai - n) /
            qpoch(q2, q2, ai - n) * ipow(lam * z / phi, ai - n);
        for (const auto& [pm, pc] : cur) {
          Monomial nm = pm;
          nm[left] += n;
          nm[i] += ai - n;
          next[nm] += pc * an * bj;
        }
      }
      cur = std::move(next);
    }
    for (const auto& [m, v] : cur) rhs(basis.index_of(m)) += v * muw;

    const S scale = std::max(max_abs(lhs), max_abs(rhs));
    if (scale > S(0)) worst = std::max(worst, max_abs((lhs - rhs).eval()) / scale);
  }
  return worst;
}

}  // namespace qsix
