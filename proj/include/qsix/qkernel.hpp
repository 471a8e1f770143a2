// q-Pochhammer symbols, terminating basic hypergeometric series (standard and
// regularized), and numerical checks of the summation / integral identities
// they satisfy. Everything here is a pure function of its arguments; all
// scalars are std::complex<Scalar> with Scalar = binary64 by default.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsix {

template <class Scalar>
using Complex = std::complex<Scalar>;

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

/// A denominator q-Pochhammer vanished inside a standard series.
struct PoleError : Error {
  using Error::Error;
};

/// A parameter point where a formula degenerates (e.g. integer spin hit the
/// (zeta^{-4};q^2)_m zero).
struct SingularityError : Error {
  using Error::Error;
};

/// A Fock-space trace showed no decay up to the truncation bound.
struct DivergenceError : Error {
  using Error::Error;
};

struct NotFoundError : Error {
  using Error::Error;
};

namespace detail {

template <class S>
bool finite(const Complex<S>& v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}

template <class S>
void ensure_finite(const Complex<S>& v, const char* what) {
  if (!finite(v)) throw DomainError(std::string(what) + ": non-finite value");
}

// Compensated (Kahan) accumulation of complex terms. Sums are always taken in
// the caller's index order so results are bit-reproducible.
template <class S>
struct KahanSum {
  Complex<S> sum{0, 0};
  Complex<S> comp{0, 0};

  void add(const Complex<S>& term) {
    const Complex<S> y = term - comp;
    const Complex<S> t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  Complex<S> value() const { return sum; }
};

}  // namespace detail

/// [x] = x - 1/x.
template <class S>
Complex<S> bracket(const Complex<S>& x) {
  return x - Complex<S>(1) / x;
}

/// x^n for integer n by binary exponentiation (deterministic, no exp/log).
template <class S>
Complex<S> ipow(Complex<S> x, long n) {
  if (n < 0) return Complex<S>(1) / ipow(x, -n);
  Complex<S> r(1);
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

// ---------------------------------------------------------------------------
// q-Pochhammer symbols

/// (x;q)_n for integer n. Negative n follows (x;q)_{-k} = 1/(x q^{-k};q)_k.
/// Products run over increasing k by direct multiplication; no reflection
/// formulas are used, so no branch choices arise.
template <class S>
Complex<S> qpoch(Complex<S> x, Complex<S> q, long n) {
  if (n < 0) {
    Complex<S> shifted = x * ipow(q, n);
    Complex<S> denom = qpoch(shifted, q, -n);
    if (std::abs(denom) == S(0))
      throw DomainError("qpoch: negative-length symbol hit a zero factor");
    return Complex<S>(1) / denom;
  }
  Complex<S> p(1);
  Complex<S> xq = x;
  for (long k = 0; k < n; ++k) {
    p *= Complex<S>(1) - xq;
    xq *= q;
  }
  detail::ensure_finite(p, "qpoch");
  return p;
}

/// Value of an adaptively truncated infinite product together with a bound on
/// the relative error of the dropped tail.
template <class S>
struct QPochInfResult {
  Complex<S> value;
  S tail_bound;
  long factors_used;
};

/// (x;q)_infinity for |q| < 1. Truncates once |x q^k| < tol and bounds the
/// log-tail by the geometric remainder sum_{j>=k} |x q^j| / (1 - |x q^j|).
template <class S>
QPochInfResult<S> qpoch_inf(Complex<S> x, Complex<S> q, S tol = S(1e-18)) {
  const S qa = std::abs(q);
  if (qa >= S(1)) throw DomainError("qpoch_inf: requires |q| < 1");
  QPochInfResult<S> r{Complex<S>(1), S(0), 0};
  Complex<S> xq = x;
  const long kmax = 100000;
  while (std::abs(xq) >= tol && r.factors_used < kmax) {
    r.value *= Complex<S>(1) - xq;
    xq *= q;
    ++r.factors_used;
  }
  const S head = std::abs(xq);
  r.tail_bound = head / ((S(1) - qa) * (S(1) - std::min(head, S(0.5))));
  detail::ensure_finite(r.value, "qpoch_inf");
  return r;
}

// ---------------------------------------------------------------------------
// Terminating basic hypergeometric series

/// A terminating {r+1}phi{r}: numerator parameters a_s, denominator
/// parameters b_s (same count), termination degree n, base q, argument z.
template <class S>
struct SeriesSpec {
  std::vector<Complex<S>> a;
  std::vector<Complex<S>> b;
  long n = 0;
  Complex<S> q{0, 0};
  Complex<S> z{0, 0};

  void validate() const {
    if (a.size() != b.size())
      throw DomainError("SeriesSpec: parameter counts differ");
    if (n < 0) throw DomainError("SeriesSpec: negative termination degree");
    if (q == Complex<S>(0)) throw DomainError("SeriesSpec: zero base");
  }
};

/// Regularized terminating series
///   sum_{k=0}^n z^k (q^{-n};q)_k/(q;q)_k prod_s (a_s;q)_k (b_s q^k;q)_{n-k}.
/// Finite for every b_s, including b_s = q^{-m}; that is the point of the
/// regularization.
template <class S>
Complex<S> phi_regularized(const SeriesSpec<S>& spec) {
  spec.validate();
  const auto& q = spec.q;
  detail::KahanSum<S> acc;
  Complex<S> head(1);  // z^k (q^{-n};q)_k / (q;q)_k, updated incrementally
  const Complex<S> qminusn = ipow(q, -spec.n);
  for (long k = 0; k <= spec.n; ++k) {
    if (k > 0) {
      const Complex<S> kq = ipow(q, k - 1);
      head *= spec.z * (Complex<S>(1) - qminusn * kq) /
              (Complex<S>(1) - q * kq);
    }
    Complex<S> term = head;
    const Complex<S> qk = ipow(q, k);
    for (std::size_t s = 0; s < spec.a.size(); ++s) {
      term *= qpoch(spec.a[s], q, k);
      term *= qpoch(spec.b[s] * qk, q, spec.n - k);
    }
    acc.add(term);
  }
  detail::ensure_finite(acc.value(), "phi_regularized");
  return acc.value();
}

/// Standard terminating series
///   sum_{k=0}^n z^k (q^{-n};q)_k/(q;q)_k prod_s (a_s;q)_k/(b_s;q)_k.
/// Throws PoleError when a denominator Pochhammer vanishes, naming the
/// offending parameter and term.
template <class S>
Complex<S> phi_standard(const SeriesSpec<S>& spec) {
  spec.validate();
  const auto& q = spec.q;
  const S pole_tol = S(1e-12);
  detail::KahanSum<S> acc;
  Complex<S> head(1);
  const Complex<S> qminusn = ipow(q, -spec.n);
  for (long k = 0; k <= spec.n; ++k) {
    if (k > 0) {
      const Complex<S> kq = ipow(q, k - 1);
      head *= spec.z * (Complex<S>(1) - qminusn * kq) /
              (Complex<S>(1) - q * kq);
    }
    Complex<S> term = head;
    for (std::size_t s = 0; s < spec.a.size(); ++s) {
      term *= qpoch(spec.a[s], q, k);
      const Complex<S> den = qpoch(spec.b[s], q, k);
      if (k > 0 && std::abs(den) < pole_tol)
        throw PoleError("phi_standard: (b_" + std::to_string(s + 1) +
                        ";q)_" + std::to_string(k) + " vanishes");
      term /= den;
    }
    acc.add(term);
  }
  detail::ensure_finite(acc.value(), "phi_standard");
  return acc.value();
}

// ---------------------------------------------------------------------------
// Identity self-tests

/// Relative residual of
///   sum_{k=0}^i (q^{-2i};q^2)_k/(q^2;q^2)_k q^{2ik}/(1 - x q^{-2k})
///     = -x^{-1} (q^2;q^2)_i / (x^{-1};q^2)_{i+1}.
template <class S>
S geom_identity_residual(long i, Complex<S> x, Complex<S> q) {
  if (i < 0) throw DomainError("geom_identity_residual: negative order");
  const Complex<S> q2 = q * q;
  detail::KahanSum<S> acc;
  for (long k = 0; k <= i; ++k) {
    const Complex<S> den = Complex<S>(1) - x * ipow(q, -2 * k);
    if (std::abs(den) < S(1e-12))
      throw DomainError("geom_identity_residual: pole at x q^{-2k} = 1");
    acc.add(qpoch(ipow(q, -2 * i), q2, k) / qpoch(q2, q2, k) *
            ipow(q, 2 * i * k) / den);
  }
  const Complex<S> lhs = acc.value();
  const Complex<S> denom = qpoch(Complex<S>(1) / x, q2, i + 1);
  if (std::abs(denom) < S(1e-12))
    throw DomainError("geom_identity_residual: (x^{-1};q^2)_{i+1} vanishes");
  const Complex<S> rhs = -qpoch(q2, q2, i) / (x * denom);
  return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs));
}

// ---------------------------------------------------------------------------
// Askey-Roy integral

namespace detail {

template <class S>
void check_askey_roy_domain(Complex<S> a, Complex<S> b, Complex<S> c,
                            Complex<S> d, Complex<S> rho, Complex<S> q) {
  if (std::abs(q) >= S(1)) throw DomainError("askey_roy: requires |q| < 1");
  for (auto v : {a, b, c, d})
    if (std::abs(v) >= S(1))
      throw DomainError(
          "askey_roy: contour condition needs |a|,|b|,|c|,|d| < 1");
  if (rho * c * d == Complex<S>(0))
    throw DomainError("askey_roy: rho*c*d must be nonzero");
}

}  // namespace detail

/// Left side of the Askey-Roy integral evaluated by the N-point trapezoid
/// rule on the unit circle. The integrand is analytic in an annulus around
/// the circle, so the rule converges geometrically in N.
template <class S>
Complex<S> askey_roy_quadrature(Complex<S> a, Complex<S> b, Complex<S> c,
                                Complex<S> d, Complex<S> rho, Complex<S> q,
                                long npoints) {
  detail::check_askey_roy_domain(a, b, c, d, rho, q);
  if (npoints <= 0) throw DomainError("askey_roy: npoints must be positive");
  const S two_pi = S(2) * S(M_PI);
  detail::KahanSum<S> acc;
  for (long k = 0; k < npoints; ++k) {
    const S theta = two_pi * static_cast<S>(k) / static_cast<S>(npoints);
    const Complex<S> y(std::cos(theta), std::sin(theta));
    Complex<S> num = qpoch_inf(rho * y / d, q).value *
                     qpoch_inf(q * d / (rho * y), q).value *
                     qpoch_inf(rho * c / y, q).value *
                     qpoch_inf(q * y / (rho * c), q).value;
    Complex<S> den = qpoch_inf(a * y, q).value * qpoch_inf(b * y, q).value *
                     qpoch_inf(c / y, q).value * qpoch_inf(d / y, q).value;
    acc.add(num / den);
  }
  return acc.value() / Complex<S>(static_cast<S>(npoints));
}

/// Closed-form right side of the Askey-Roy integral.
template <class S>
Complex<S> askey_roy_closed_form(Complex<S> a, Complex<S> b, Complex<S> c,
                                 Complex<S> d, Complex<S> rho, Complex<S> q) {
  detail::check_askey_roy_domain(a, b, c, d, rho, q);
  Complex<S> num = qpoch_inf(a * b * c * d, q).value *
                   qpoch_inf(rho, q).value * qpoch_inf(q / rho, q).value *
                   qpoch_inf(rho * c / d, q).value *
                   qpoch_inf(q * d / (rho * c), q).value;
  Complex<S> den = qpoch_inf(a * c, q).value * qpoch_inf(a * d, q).value *
                   qpoch_inf(b * c, q).value * qpoch_inf(b * d, q).value *
                   qpoch_inf(q, q).value;
  return num / den;
}

/// Relative difference between quadrature and closed form.
template <class S>
S askey_roy_residual(Complex<S> a, Complex<S> b, Complex<S> c, Complex<S> d,
                     Complex<S> rho, Complex<S> q, long npoints) {
  const Complex<S> lhs = askey_roy_quadrature(a, b, c, d, rho, q, npoints);
  const Complex<S> rhs = askey_roy_closed_form(a, b, c, d, rho, q);
  return std::abs(lhs - rhs) / std::abs(rhs);
}

}  // namespace qsix
