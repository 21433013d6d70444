#pragma once

// Hamiltonians, unitary evolution, excitation swap, charge operators and
// phase kicks. Units: hbar = c = 1, Gaussian electromagnetic units.

#include <string>
#include <variant>

#include "nonlocal/hilbert.hpp"

namespace nonlocal {

/// H = g (a^+ |g><e| + a |e><g|) on (mode, two-level).
struct JaynesCummings {
  std::string mode;
  std::string two_level;
  double coupling = 1.0;
};

/// H = omega0 |e><e|.
struct FreeTwoLevel {
  std::string two_level;
  double splitting = 0.0;
};

using HamiltonianSpec = std::variant<JaynesCummings, FreeTwoLevel>;

LocalOperator build_hamiltonian(const CompositeSpace& space,
                                const HamiltonianSpec& spec);

/// exp(-i H t) for a hermitian H. Decomposes H into its connected blocks
/// (JC conserves excitation number) and diagonalizes each block.
LocalOperator propagator(const LocalOperator& hamiltonian, double t);

StateVector evolve(const StateVector& state, const LocalOperator& hamiltonian,
                   double t);

/// Ideal excitation swap |1,lower> <-> |0,upper>; |0,lower> and |1,upper>
/// fixed; identity on Fock levels n >= 2. Real permutation, no phases.
LocalOperator swap_unitary(const CompositeSpace& space, const std::string& mode,
                           const std::string& two_level);

/// The swap realized physically: JC evolution for g t = pi/2. Agrees with
/// swap_unitary on the {0,1} x {lower,upper} block up to diagonal phases.
LocalOperator jc_swap_unitary(const CompositeSpace& space,
                              const std::string& mode,
                              const std::string& two_level,
                              double coupling = 1.0);

/// Q_site = sum over subsystems at the site of charge * n. Throws if the site
/// holds no subsystem.
LocalOperator charge_operator(const CompositeSpace& space, Site site);

struct KickSpec {
  double chi = 0.0;  // time-integrated potential per unit charge
  Site region = Site::B;
};

/// exp(i chi Q_region). Identity (with no targets) on an empty region.
LocalOperator phase_kick(const CompositeSpace& space, const KickSpec& kick);

/// Scalar Aharonov-Bohm phase of opening a condenser: 4 pi sigma d q t.
double ab_phase(double sigma, double d_plates, double q, double t);

/// Max-abs entry of [A, B]; both operators must act on the same targets.
double commutator_norm(const LocalOperator& a, const LocalOperator& b);

/// Re-expresses `op` on a superset of its targets (tensoring identity).
Matrix embed_matrix(const CompositeSpace& space, const LocalOperator& op,
                    const std::vector<std::string>& targets);

}  // namespace nonlocal
