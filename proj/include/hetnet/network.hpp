#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace hetnet {

// One hyperbolic equilibrium of the network, described by its linearization:
// expanding rates strictly descending, contracting magnitudes strictly
// ascending (the actual stable eigenvalues are the negatives).
struct EquilibriumSpec {
  std::string label;
  std::vector<double> lambda_expanding;
  std::vector<double> lambda_contracting;

  int u() const { return static_cast<int>(lambda_expanding.size()); }
  int s() const { return static_cast<int>(lambda_contracting.size()); }
  int ambient_dim() const { return u() + s(); }
};

// Spectral-gap constants of one equilibrium.
//   alpha = lambda1/lambda2   (+inf when u = 1)
//   beta  = 1/alpha           (0 when u = 1)
//   mu    = weakest contraction over strongest expansion (saddle value)
//   rho   = (1 + mu) / 2
struct DerivedConstants {
  double alpha;
  double beta;
  double mu;
  double rho;

  bool alpha_infinite() const { return std::isinf(alpha); }
};

inline constexpr double kAlphaInfinite = std::numeric_limits<double>::infinity();

// Throws ErrorCode::ConfigError on structurally malformed eigenvalue lists
// (empty, non-positive, or not strictly monotone in the required order).
DerivedConstants derive_constants(const EquilibriumSpec& eq);

// Directed connection inside the network; source_eigen_index is the 1-based
// rank of the expanding eigenvalue at the source the connection leaves along
// (1 = strongest).
struct ConnectionSpec {
  std::string source;
  std::string target;
  int source_eigen_index = 1;
};

struct NetworkSpec {
  std::vector<EquilibriumSpec> equilibria;
  std::vector<ConnectionSpec> connections;
  // Number of nodes in the principal cycle; the first principal_length
  // equilibria, in list order, are the principal sequence.
  int principal_length = 0;

  int size() const { return static_cast<int>(equilibria.size()); }
  int index_of(const std::string& label) const;  // -1 if absent
  const EquilibriumSpec& at(const std::string& label) const;
};

struct Violation {
  std::string hypothesis;  // "H1".."H4"
  std::string detail;
};

struct ValidationReport {
  bool passed = false;
  std::vector<Violation> violations;
  std::vector<std::string> notes;  // non-fatal review flags, e.g. N* < N
};

// Checks H1-H4 against the declared eigenvalue and connection lists. Never
// throws on hypothesis failures: every violation lands in the report.
//   H1: nonempty network, labels unique, constant ambient dimension,
//       every eigenvalue magnitude > 1e-9 (hyperbolicity).
//   H2: strict eigenvalue ordering per node plus the low-order resonance
//       screen (pairwise distinct signed eigenvalues; no eigenvalue equals
//       the sum of two distinct others, relative tolerance 1e-9).
//   H3: a strong connection (source_eigen_index 1) closes the principal cycle
//       p_i -> p_{i+1 mod N*}.
//   H4: saddle value mu > 1 at every principal node.
ValidationReport validate_hypotheses(const NetworkSpec& net);

// Labels of the principal cycle in traversal order. Throws
// ErrorCode::HypothesisError if the strong-connection chain is broken.
std::vector<std::string> principal_sequence(const NetworkSpec& net);

}  // namespace hetnet
