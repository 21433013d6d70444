#pragma once

// Composite Hilbert spaces of bosonic modes and two-level systems.
//
// Basis convention: row-major mixed radix, the last listed subsystem varies
// fastest. Two-level systems use index 0 for the lower level (|g>, |down>,
// |p>) and index 1 for the upper level (|e>, |up>, |n>).

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nonlocal {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kConstructionTol = 1e-12;
inline constexpr double kPropagatedTol = 1e-10;

inline constexpr std::size_t kMaxStateDim = std::size_t{1} << 20;
inline constexpr std::size_t kMaxOperatorDim = 4096;

/// Raised when a numerical invariant (norm, unitarity, trace) is broken.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SubsystemKind { bosonic_mode, two_level };
enum class Site { A, B, other };

std::string to_string(Site site);

struct SubsystemSpec {
  std::string label;
  SubsystemKind kind = SubsystemKind::two_level;
  int truncation = 2;  // only meaningful for bosonic modes
  Site site = Site::other;
  // Charge per quantum for a mode; charge of the upper level for a two-level
  // system (the lower level carries zero).
  double charge = 0.0;

  static SubsystemSpec mode(std::string label, int truncation, Site site,
                            double charge = 0.0);
  static SubsystemSpec two_level(std::string label, Site site,
                                 double charge = 0.0);

  int dimension() const {
    return kind == SubsystemKind::bosonic_mode ? truncation : 2;
  }
};

class CompositeSpace {
 public:
  explicit CompositeSpace(std::vector<SubsystemSpec> subsystems);

  const std::vector<SubsystemSpec>& subsystems() const { return subsystems_; }
  std::size_t size() const { return subsystems_.size(); }
  std::size_t dim() const { return dim_; }

  /// Position of `label` in the factor ordering; throws std::invalid_argument.
  std::size_t position(const std::string& label) const;
  bool contains(const std::string& label) const;
  const SubsystemSpec& subsystem(const std::string& label) const {
    return subsystems_[position(label)];
  }

  std::size_t stride(std::size_t position) const { return strides_[position]; }
  int dimension(std::size_t position) const {
    return subsystems_[position].dimension();
  }

  std::size_t encode(std::span<const int> levels) const;
  std::vector<int> decode(std::size_t index) const;

  bool operator==(const CompositeSpace& other) const;

 private:
  std::vector<SubsystemSpec> subsystems_;
  std::vector<std::size_t> strides_;
  std::size_t dim_ = 1;
};

using SpacePtr = std::shared_ptr<const CompositeSpace>;

inline SpacePtr make_space(std::vector<SubsystemSpec> subsystems) {
  return std::make_shared<const CompositeSpace>(std::move(subsystems));
}

/// Normalized amplitude vector over a CompositeSpace.
class StateVector {
 public:
  /// Throws InvariantViolation unless the norm is 1 within kPropagatedTol.
  StateVector(SpacePtr space, Vector amplitudes);

  const CompositeSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex operator[](std::size_t index) const { return amplitudes_[index]; }

 private:
  SpacePtr space_;
  Vector amplitudes_;
};

/// Dense operator on an ordered subset of subsystems, embedded by index
/// arithmetic when applied.
class LocalOperator {
 public:
  struct Claims {
    bool hermitian = false;
    bool unitary = false;
  };

  /// Verifies every claimed property; throws InvariantViolation on failure.
  LocalOperator(std::vector<std::string> targets, Matrix matrix, Claims claims,
                double tol = kPropagatedTol);

  const std::vector<std::string>& targets() const { return targets_; }
  const Matrix& matrix() const { return matrix_; }
  bool is_hermitian() const { return claims_.hermitian; }
  bool is_unitary() const { return claims_.unitary; }

 private:
  std::vector<std::string> targets_;
  Matrix matrix_;
  Claims claims_;
};

StateVector basis_state(SpacePtr space, std::span<const int> levels);
StateVector basis_state(SpacePtr space, std::initializer_list<int> levels);

struct CoherentState {
  Vector amplitudes;           // renormalized over levels 0..d-1
  double truncation_deficit;   // 1 - sum_{n<d} |c_n|^2 before renormalization
  bool truncation_warning;     // |alpha|^2 > d
};

CoherentState coherent_state(Complex alpha, int truncation);

/// Embeds local amplitude vectors (one per subsystem, in space order) as a
/// product state.
StateVector product_state(SpacePtr space, const std::vector<Vector>& factors);

/// Applies a unitary LocalOperator by contracting over its target indices.
StateVector apply_local(const StateVector& state, const LocalOperator& op);

/// Reduced density matrix over `keep`, ordered as given.
Matrix partial_trace(const StateVector& state,
                     const std::vector<std::string>& keep);

double fidelity(const StateVector& a, const StateVector& b);
/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const Matrix& rho, const Matrix& sigma);
/// <psi|rho|psi> for a pure reference.
double fidelity(const Matrix& rho, const Vector& psi);

double purity(const Matrix& rho);

/// Expectation value of an embedded hermitian operator.
double expectation(const StateVector& state, const LocalOperator& op);

/// Serializes amplitudes as a JSON array of [re, im] pairs.
std::string amplitudes_to_json(const Vector& amplitudes);
Vector amplitudes_from_json(const std::string& text);

namespace detail {

// Base indices of every configuration of the non-target subsystems, with the
// target digits held at zero, plus the offsets of every local target index.
struct Embedding {
  std::vector<std::size_t> bases;
  std::vector<std::size_t> offsets;
};

Embedding embed(const CompositeSpace& space,
                const std::vector<std::string>& targets);

}  // namespace detail

}  // namespace nonlocal
