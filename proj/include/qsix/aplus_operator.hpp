// The Q-operators A_+ (any complex spin) and A_- (integer spin): local
// L-operator elements built on the regularized 3phi2, the truncated trace
// over the auxiliary Fock space, the closed form at lambda = zeta, the
// factorization A_+(lambda) = A_+(zeta) Q_f(lambda), and the trace-level
// mirror construction of A_-.
//
// Convergence of the Fock trace: the per-step ratio of the n-sum is
// t^{-1} with t = phi^{2M} q^{2l - IM} for A_+ and t for A_-, so the two
// traces converge in complementary phi regions. The factorized paths have no
// such restriction and agree with the traces wherever those converge.

#pragma once

#include <string>
#include <vector>

#include "qsix/qf_operator.hpp"
#include "qsix/qkernel.hpp"
#include "qsix/sector.hpp"
#include "qsix/transfer.hpp"

namespace qsix {

/// Adaptive cutoff for infinite sums (Fock trace).
template <class S>
struct TruncationPolicy {
  long n_min = 8;
  long n_max = 512;
  S tol = S(1e-14);

  void validate() const {
    if (n_min <= 0 || n_max < n_min)
      throw DomainError("TruncationPolicy: requires 0 < n_min <= n_max");
    if (!(tol > S(0))) throw DomainError("TruncationPolicy: tol must be > 0");
  }
};

template <class S>
struct FockTraceResult {
  OperatorMatrix<S> matrix;
  S tail_bound = S(0);  // relative to the max entry of the matrix
  long terms_used = 0;
};

namespace detail {

template <class S>
Complex<S> sector_norm_prefactor(const ModelParams<S>& p, int M, int l) {
  // 1 - phi^{2M} q^{2l - IM}, with q^{IM} routed through zeta^{2M}
  return Complex<S>(1) -
         ipow(p.phi, 2 * M) * ipow(p.q, 2 * l) / ipow(p.zeta, 2 * M);
}

}  // namespace detail

/// Element [A_+(lambda)]_{n,i}^{n',i'} of the local L-operator on
/// F_q (x) V_I; zero unless i + n' = i' + n. Polynomial in zeta^2, hence
/// defined for all complex spin. The regularized series absorbs the
/// parameter q^{2(1+n-i)}, which may degenerate to q^{-2m}.
template <class S>
Complex<S> aplus_L_element(const ModelParams<S>& p, long n, int i, long nprime,
                           int iprime) {
  if (n < 0 || nprime < 0 || i < 0 || iprime < 0)
    throw DomainError("aplus_L_element: negative index");
  if (i + nprime != iprime + n) return Complex<S>(0);
  const Complex<S> q = p.q, z = p.zeta, phi = p.phi, lam = p.lambda;
  const Complex<S> q2 = q * q;
  const long half = (static_cast<long>(i) * (i + 1) -
                     static_cast<long>(iprime) * (iprime + 1)) / 2;
  Complex<S> pref = ipow(phi, -2 * n) * (((i + iprime) % 2) ? S(-1) : S(1)) *
                    ipow(lam, -i) *
                    ipow(q, half + static_cast<long>(i) * iprime -
                                n * static_cast<long>(i + iprime)) *
                    ipow(z, 2 * (static_cast<long>(i) + n)) *
                    qpoch(q2, q2, nprime) /
                    (qpoch(q2, q2, n) * qpoch(q2, q2, i));
  SeriesSpec<S> spec;
  spec.a = {ipow(q, -2 * iprime), lam * lam / (z * z)};
  spec.b = {Complex<S>(1) / ipow(z, 4), ipow(q, 2 * (1 + n - i))};
  spec.n = i;
  spec.q = q2;
  spec.z = q2;
  return pref * phi_regularized(spec);
}

/// Element of A_-(lambda) through the integer-spin symmetry
/// [A_-]_{n,i}^{n',i'} = [A_+]_{n,I-i}^{n',I-i'} at phi -> 1/phi.
template <class S>
Complex<S> aminus_L_element(const ModelParams<S>& p, long n, int i,
                            long nprime, int iprime) {
  if (!p.spin_I)
    throw DomainError(
        "aminus_L_element: unsupported at non-integer spin");
  const int I = *p.spin_I;
  if (i < 0 || i > I || iprime < 0 || iprime > I)
    throw DomainError("aminus_L_element: index outside the capped module");
  return aplus_L_element(p.with_phi(Complex<S>(1) / p.phi), n, I - i, nprime,
                         I - iprime);
}

/// Direct evaluation of the same element; cross-checks the symmetry path.
template <class S>
Complex<S> aminus_L_element_direct(const ModelParams<S>& p, long n, int i,
                                   long nprime, int iprime) {
  if (!p.spin_I)
    throw DomainError(
        "aminus_L_element_direct: unsupported at non-integer spin");
  const int I = *p.spin_I;
  if (n < 0 || nprime < 0 || i < 0 || i > I || iprime < 0 || iprime > I)
    throw DomainError("aminus_L_element_direct: index out of range");
  if (i + n != iprime + nprime) return Complex<S>(0);
  const Complex<S> q = p.q, phi = p.phi, lam = p.lambda;
  const Complex<S> q2 = q * q;
  const long half = (-static_cast<long>(i) * (i - 1) +
                     static_cast<long>(iprime) * (iprime - 1)) / 2;
  Complex<S> pref =
      ipow(phi, 2 * n) * ipow(lam, i - I) *
      ipow(q, half + static_cast<long>(i) * (I + iprime) +
                  n * (I - static_cast<long>(i + iprime))) *
      qpoch(lam * lam * ipow(q, -I + 2 * (iprime - static_cast<long>(n))), q2,
            I - i - iprime) /
      qpoch(q2, q2, i);
  SeriesSpec<S> spec;
  spec.a = {ipow(q, -2 * iprime), lam * lam * ipow(q, -I)};
  spec.b = {ipow(q, -2 * I), ipow(q, 2 * (1 + n - iprime))};
  spec.n = i;
  spec.q = q2;
  spec.z = q2;
  return pref * phi_regularized(spec);
}

namespace detail {

// Trace over the Fock space of the cyclic product of local L elements. The
// delta constraint pins the whole chain to the base index n:
//   A_+: n_{k+1} = n_k + i'_k - i_k,   A_-: n_{k+1} = n_k + i_k - i'_k.
// Terms are accumulated in increasing n with per-entry compensation; the sum
// stops once the geometric tail estimate stays below tol for 3 consecutive
// terms, and diverging term ratios raise DivergenceError.
template <class S, class Elem>
FockTraceResult<S> fock_trace(const ModelParams<S>& p, const SectorBasis& basis,
                              const TruncationPolicy<S>& policy, Elem&& elem,
                              int chain_sign) {
  p.validate();
  policy.validate();
  const int M = basis.sites();
  const int l = basis.degree();
  const int nb = basis.size();
  const Complex<S> norm = sector_norm_prefactor(p, M, l);

  ComplexMatrix<S> acc = ComplexMatrix<S>::Zero(nb, nb);
  ComplexMatrix<S> comp = ComplexMatrix<S>::Zero(nb, nb);
  ComplexMatrix<S> term(nb, nb);
  S prev_mag = S(0);
  S last_ratio = S(0);
  long quiet = 0, rising = 0;
  long n = 0;
  for (; n < policy.n_max; ++n) {
    term.setZero();
    for (int r = 0; r < nb; ++r) {
      const Monomial& iv = basis.member(r);
      for (int c = 0; c < nb; ++c) {
        const Monomial& ipv = basis.member(c);
        Complex<S> prod(1);
        long nk = n;
        bool valid = true;
        for (int k = 0; k < M; ++k) {
          const long nk1 = nk + chain_sign * (ipv[k] - iv[k]);
          if (nk1 < 0) {
            valid = false;
            break;
          }
          prod *= elem(p, nk, iv[k], nk1, ipv[k]);
          if (prod == Complex<S>(0)) break;
          nk = nk1;
        }
        if (valid) term(r, c) = prod;
      }
    }
    // compensated accumulation, entrywise
    for (int r = 0; r < nb; ++r)
      for (int c = 0; c < nb; ++c) {
        const Complex<S> y = term(r, c) - comp(r, c);
        const Complex<S> t = acc(r, c) + y;
        comp(r, c) = (t - acc(r, c)) - y;
        acc(r, c) = t;
      }
    const S mag = max_abs(term);
    const S accmag = max_abs(acc);
    if (n >= policy.n_min) {
      const S ratio = prev_mag > S(0) ? mag / prev_mag : S(0);
      last_ratio = ratio;
      if (mag > accmag * policy.tol && ratio >= S(1)) {
        if (++rising >= 3)
          throw DivergenceError(
              "fock_trace: no decay in the Fock sum (term ratio " +
              std::to_string(static_cast<double>(ratio)) +
              " at n = " + std::to_string(n) +
              "); choose phi inside the convergence region");
      } else {
        rising = 0;
      }
      const S r_clamped = std::min(ratio, S(0.97));
      const S tail = mag * r_clamped / (S(1) - r_clamped);
      if (accmag > S(0) && tail < policy.tol * accmag) {
        if (++quiet >= 3) {
          ++n;
          break;
        }
      } else {
        quiet = 0;
      }
    }
    prev_mag = mag;
  }
  const S accmag = max_abs(acc);
  const S r_clamped = std::min(last_ratio, S(0.97));
  const S tail_rel =
      accmag > S(0)
          ? prev_mag * r_clamped / ((S(1) - r_clamped) * accmag)
          : S(0);
  if (n >= policy.n_max && tail_rel >= policy.tol)
    throw DivergenceError(
        "fock_trace: truncation bound not met by n_max = " +
        std::to_string(policy.n_max) +
        "; choose phi deeper inside the convergence region");
  FockTraceResult<S> out{OperatorMatrix<S>(basis), tail_rel, n};
  out.matrix.entries = norm * acc;
  return out;
}

}  // namespace detail

/// A_+^{(I)}(lambda) on the sector via the truncated Fock trace.
/// Converges for |phi^{2M} q^{2l} zeta^{-2M}| > 1.
template <class S>
FockTraceResult<S> build_aplus_trace(const ModelParams<S>& p,
                                     const SectorBasis& basis,
                                     const TruncationPolicy<S>& policy = {}) {
  return detail::fock_trace(
      p, basis, policy,
      [](const ModelParams<S>& q, long n, int i, long np, int ip) {
        return aplus_L_element(q, n, i, np, ip);
      },
      +1);
}

/// A_-^{(I)}(lambda) on the capped sector via the truncated Fock trace
/// (integer spin only). Converges for |phi^{2M} q^{2l} zeta^{-2M}| < 1.
template <class S>
FockTraceResult<S> build_aminus(const ModelParams<S>& p,
                                const SectorBasis& basis,
                                const TruncationPolicy<S>& policy = {}) {
  if (!p.spin_I)
    throw DomainError("build_aminus: unsupported at non-integer spin");
  return detail::fock_trace(
      p, basis, policy,
      [](const ModelParams<S>& q, long n, int i, long np, int ip) {
        return aminus_L_element(q, n, i, np, ip);
      },
      -1);
}

namespace detail {

/// One entry of the closed form of A_+ at lambda = zeta; rows are the output
/// monomial (i), columns the input (i'). The z-derivative term is the exact
/// coefficient of z^s in a finite product of q-Pochhammer factors.
template <class S>
Complex<S> aplus_at_zeta_entry(const ModelParams<S>& p, const Monomial& iv,
                               const Monomial& ipv) {
  const int M = static_cast<int>(iv.size());
  int l = 0, lp = 0;
  for (int k = 0; k < M; ++k) {
    l += iv[k];
    lp += ipv[k];
  }
  if (l != lp) return Complex<S>(0);
  const Complex<S> q = p.q, z = p.zeta, phi = p.phi;
  const Complex<S> q2 = q * q;
  const Complex<S> zm4 = Complex<S>(1) / ipow(z, 4);

  Complex<S> pref = ((l % 2) ? S(1) : S(-1)) *
                    sector_norm_prefactor(p, M, l) * ipow(q, l) * ipow(z, l);
  for (int k = 0; k < M; ++k)
    pref *= qpoch(zm4, q2, iv[k]) / qpoch(q2, q2, iv[k]) *
            ipow(phi / z, 2 + 2 * (k + 1) * (ipv[k] - iv[k]));

  // coefficients of prod_{m=2}^{M} (w q^{2+2 D_m}; q^2)_{i_m} in w
  std::vector<Complex<S>> coeffs(static_cast<std::size_t>(l - iv[0]) + 1,
                                 Complex<S>(0));
  coeffs[0] = Complex<S>(1);
  int deg = 0;
  for (int m = 1; m < M; ++m) {
    long D = 0;
    for (int t = 0; t < m; ++t) D += iv[t] - ipv[t];
    for (int j = 0; j < iv[m]; ++j) {
      const Complex<S> fac = ipow(q, 2 + 2 * D + 2 * j);
      for (int d = deg; d >= 0; --d) coeffs[d + 1] -= coeffs[d] * fac;
      ++deg;
    }
  }

  const Complex<S> base = ipow(phi, 2 * M) / ipow(z, 2 * M);
  detail::KahanSum<S> acc;
  for (int s = 0; s <= l - iv[0]; ++s) {
    if (coeffs[s] == Complex<S>(0)) continue;
    Complex<S> den(1);
    for (int j = 0; j <= iv[0]; ++j) {
      const Complex<S> factor = Complex<S>(1) - base * ipow(q, 2 * (s + j));
      if (std::abs(factor) < S(1e-10))
        throw SingularityError(
            "aplus_at_zeta: resonant denominator at s = " +
            std::to_string(s + j));
      den *= factor;
    }
    acc.add(coeffs[s] * qpoch(q2, q2, iv[0]) / den);
  }
  return pref * acc.value();
}

}  // namespace detail

/// Closed form of A_+^{(I)}(zeta) on the sector.
template <class S>
OperatorMatrix<S> aplus_at_zeta(const ModelParams<S>& p,
                                const SectorBasis& basis) {
  p.validate();
  OperatorMatrix<S> out(basis);
  for (int r = 0; r < basis.size(); ++r)
    for (int c = 0; c < basis.size(); ++c)
      out.entries(r, c) =
          detail::aplus_at_zeta_entry(p, basis.member(r), basis.member(c));
  return out;
}

/// A_+(lambda) = A_+(zeta) Q_f(lambda). At generic zeta this is a square
/// product on the uncapped sector. At integer spin the product is assembled
/// rectangularly: capped rows of A_+(zeta) times capped columns of Q_f with
/// the intermediate sum over the full uncapped sector, so the factors
/// (zeta^{-4};q^2)_{j} that diverge beyond the cap are never evaluated.
template <class S>
OperatorMatrix<S> build_aplus_factorized(const ModelParams<S>& p,
                                         const SectorBasis& basis) {
  p.validate();
  const int M = basis.sites();
  const int l = basis.degree();
  if (p.spin_I && (!basis.cap() || *basis.cap() != *p.spin_I))
    throw DomainError(
        "build_aplus_factorized: basis cap inconsistent with spin_I");
  const SectorBasis inter(M, l);  // uncapped
  const int nb = basis.size(), ni = inter.size();
  ComplexMatrix<S> az(nb, ni), qf(ni, nb);
  for (int r = 0; r < nb; ++r)
    for (int c = 0; c < ni; ++c)
      az(r, c) =
          detail::aplus_at_zeta_entry(p, basis.member(r), inter.member(c));
  for (int r = 0; r < ni; ++r)
    for (int c = 0; c < nb; ++c)
      qf(r, c) = qf_element(p, inter.member(r), basis.member(c));
  return OperatorMatrix<S>(basis, az * qf);
}

/// A_-(lambda; phi) = -t * mirror[ A_+(lambda; 1/phi) ] on the mirrored
/// sector IM - l, with t = phi^{2M} q^{2l} zeta^{-2M}; the -t factor is the
/// ratio of the sector normalization prefactors. Exact (no trace), integer
/// spin only.
template <class S>
OperatorMatrix<S> build_aminus_factorized(const ModelParams<S>& p,
                                          const SectorBasis& basis) {
  p.validate();
  if (!p.spin_I)
    throw DomainError(
        "build_aminus_factorized: unsupported at non-integer spin");
  const int I = *p.spin_I;
  if (!basis.cap() || *basis.cap() != I)
    throw DomainError("build_aminus_factorized: basis must be capped at I");
  const int M = basis.sites();
  const int l = basis.degree();
  const SectorBasis mirrored(M, I * M - l, I);
  const OperatorMatrix<S> ap =
      build_aplus_factorized(p.with_phi(Complex<S>(1) / p.phi), mirrored);
  const Complex<S> t =
      ipow(p.phi, 2 * M) * ipow(p.q, 2 * l) / ipow(p.zeta, 2 * M);
  OperatorMatrix<S> out(basis);
  std::vector<int> perm(basis.size());
  for (int k = 0; k < basis.size(); ++k) {
    Monomial m = basis.member(k);
    for (int& e : m) e = I - e;
    perm[k] = mirrored.index_of(m);
  }
  for (int r = 0; r < basis.size(); ++r)
    for (int c = 0; c < basis.size(); ++c)
      out.entries(r, c) = -t * ap.entries(perm[r], perm[c]);
  return out;
}

}  // namespace qsix
