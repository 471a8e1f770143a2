// Identity-verification suites over the operator family, Bethe-root
// extraction, and the run configuration / report plumbing behind the CLI.
// This layer is concrete in binary64; tolerances below are the artifact's
// contract and are fixed here, not at call sites.

#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qsix/aplus_operator.hpp"
#include "qsix/qf_operator.hpp"
#include "qsix/sector.hpp"
#include "qsix/transfer.hpp"

namespace qsix::verify {

using Real = double;
using Cplx = std::complex<double>;
using Params = ModelParams<double>;
using Policy = TruncationPolicy<double>;

struct ConfigError : Error {
  using Error::Error;
};

enum class QOp { Qf, Aplus, Aminus };
enum class QOpPath { Trace, Factorized };
enum class CommutePair { QfQf, QfT, TT, AplusAminus, TAplus, TAminus };

/// Normalized max-entry residual of the three-term TQ relation at
/// params.lambda. Qf uses the left-multiplied form, A+- the right form.
Real tq_residual(const Params& p, const SectorBasis& basis, QOp op,
                 QOpPath path = QOpPath::Factorized, const Policy& policy = {});

/// Normalized commutator residual for the selected operator pair at spectral
/// parameters lambda and mu.
Real commutativity_residual(const Params& p, const SectorBasis& basis,
                            Cplx lambda, Cplx mu,
                            CommutePair pair = CommutePair::QfQf);

/// Residual of the Wronskian identity at params.lambda (integer spin).
Real wronskian_residual(const Params& p, const SectorBasis& basis);

/// Residual of A_+(zeta) Q_inf = (-1)^{l+1} phi^{2M} q^{l-IM} Id.
Real inversion_residual(const Params& p, const SectorBasis& basis);

/// Trace-path A_+ against A_+(zeta) Q_f(lambda), normalized.
Real factorization_residual(const Params& p, const SectorBasis& basis,
                            const Policy& policy = {});

/// Deviation of Q_f(zeta) from the identity matrix (max entry).
Real identity_point_residual(const Params& p, const SectorBasis& basis);

/// Large-lambda behaviour: deviation of the rescaled operator from its
/// stated constant at two probe magnitudes, and their ratio (expected near
/// (hi/lo)^2 for an O(lambda^{-2}) approach).
struct AsymptoticsResult {
  Real dev_lo = 0;
  Real dev_hi = 0;
  Real ratio = 0;
};
AsymptoticsResult aplus_asymptotics(const Params& p, const SectorBasis& basis,
                                    Real lo = 1e3, Real hi = 1e4);
AsymptoticsResult aminus_asymptotics(const Params& p, const SectorBasis& basis,
                                     Real lo = 1e3, Real hi = 1e4);
AsymptoticsResult qf_asymptotics(const Params& p, const SectorBasis& basis,
                                 Real lo = 1e3, Real hi = 1e4);

// ---------------------------------------------------------------------------
// Bethe roots

struct BetheRootEntry {
  int eig_index = 0;
  Cplx t_eigenvalue{0, 0};
  std::vector<Cplx> poly_coeffs;    // lambda^n * A(lambda), degree 2n
  Cplx leading_coeff{0, 0};         // reported in place of rho_+-
  std::vector<Cplx> roots;          // one representative per +- pair
  std::vector<Real> residuals;      // scalar TQ zero condition per root
  int spurious_discarded = 0;
  int unpaired = 0;                 // roots whose -lambda partner is missing
};

struct BetheRootFamily {
  QOp op = QOp::Aplus;
  int expected_count = 0;
  std::vector<BetheRootEntry> entries;
};

struct BetheRootReport {
  int sector_degree = 0;
  std::vector<BetheRootFamily> families;
  std::vector<std::string> warnings;
};

/// Diagonalize T at params.lambda, sample A_+ (and A_- at integer spin) on
/// interpolation circles, extract Bethe roots per eigenvalue and verify each
/// against the scalar TQ zero condition. node_rotation cyclically reorders
/// the sample nodes; results must not depend on it.
BetheRootReport bethe_roots(const Params& p, const SectorBasis& basis,
                            int node_rotation = 0);

// ---------------------------------------------------------------------------
// Suite orchestration

struct RunConfig {
  int sites = 2;
  std::vector<int> sectors = {0, 1, 2, 3};
  std::optional<int> spin_I;  // integer mode iff set
  Cplx q{0.55, 0.08};
  Cplx zeta{0.8, 0.3};
  Cplx phi{2.4, 0.2};
  std::vector<Cplx> lambdas = {{0.9, 0.4}};
  Policy policy{};
  std::vector<std::string> suites = {"all"};
  std::string out_path;            // empty: stdout
  std::string dump_matrices_path;  // empty: no dumps
  std::string format = "json";
  bool precision_warn = false;

  Params params() const;
  void validate() const;
};

struct SuiteRecord {
  std::string name;
  std::map<std::string, std::string> params;
  Real residual = 0;
  Real tolerance = 0;
  bool pass = false;
  double ms = 0;
};

struct SuiteReport {
  RunConfig config;
  std::vector<SuiteRecord> records;
  std::vector<std::string> warnings;

  bool all_pass() const;
  std::string to_json() const;
};

/// All suite names understood by run_suite, in execution order.
const std::vector<std::string>& known_suites();

/// Execute the selected suites over the configured sectors and lambda grid.
/// Configuration problems throw ConfigError before any computation;
/// construction failures inside a suite (e.g. a divergent trace) become
/// failed records with a diagnostic, not exceptions.
SuiteReport run_suite(const RunConfig& config);

std::string format_complex(Cplx v);

}  // namespace qsix::verify
