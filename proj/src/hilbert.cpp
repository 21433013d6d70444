#include "nonlocal/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace nonlocal {

std::string to_string(Site site) {
  switch (site) {
    case Site::A:
      return "A";
    case Site::B:
      return "B";
    case Site::other:
      return "other";
  }
  return "other";
}

SubsystemSpec SubsystemSpec::mode(std::string label, int truncation, Site site,
                                  double charge) {
  return {std::move(label), SubsystemKind::bosonic_mode, truncation, site,
          charge};
}

SubsystemSpec SubsystemSpec::two_level(std::string label, Site site,
                                       double charge) {
  return {std::move(label), SubsystemKind::two_level, 2, site, charge};
}

CompositeSpace::CompositeSpace(std::vector<SubsystemSpec> subsystems)
    : subsystems_(std::move(subsystems)) {
  if (subsystems_.empty()) {
    throw std::invalid_argument("composite space needs at least one subsystem");
  }
  std::set<std::string> seen;
  for (const auto& s : subsystems_) {
    if (!seen.insert(s.label).second) {
      throw std::invalid_argument("duplicate subsystem label '" + s.label + "'");
    }
    if (s.kind == SubsystemKind::bosonic_mode && s.truncation < 2) {
      throw std::invalid_argument("mode '" + s.label +
                                  "' needs truncation >= 2");
    }
  }
  strides_.assign(subsystems_.size(), 1);
  for (std::size_t k = subsystems_.size(); k-- > 0;) {
    strides_[k] = dim_;
    dim_ *= static_cast<std::size_t>(subsystems_[k].dimension());
    if (dim_ > kMaxStateDim) {
      throw std::invalid_argument("composite dimension exceeds 2^20");
    }
  }
}

std::size_t CompositeSpace::position(const std::string& label) const {
  for (std::size_t k = 0; k < subsystems_.size(); ++k) {
    if (subsystems_[k].label == label) return k;
  }
  throw std::invalid_argument("unknown subsystem '" + label + "'");
}

bool CompositeSpace::contains(const std::string& label) const {
  return std::any_of(subsystems_.begin(), subsystems_.end(),
                     [&](const SubsystemSpec& s) { return s.label == label; });
}

std::size_t CompositeSpace::encode(std::span<const int> levels) const {
  if (levels.size() != subsystems_.size()) {
    throw std::invalid_argument("expected one level per subsystem");
  }
  std::size_t index = 0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k] < 0 || levels[k] >= subsystems_[k].dimension()) {
      throw std::domain_error("level " + std::to_string(levels[k]) +
                              " out of range for subsystem '" +
                              subsystems_[k].label + "'");
    }
    index += static_cast<std::size_t>(levels[k]) * strides_[k];
  }
  return index;
}

std::vector<int> CompositeSpace::decode(std::size_t index) const {
  if (index >= dim_) throw std::out_of_range("basis index out of range");
  std::vector<int> levels(subsystems_.size());
  for (std::size_t k = 0; k < subsystems_.size(); ++k) {
    levels[k] = static_cast<int>(index / strides_[k]);
    index %= strides_[k];
  }
  return levels;
}

bool CompositeSpace::operator==(const CompositeSpace& other) const {
  if (size() != other.size()) return false;
  for (std::size_t k = 0; k < size(); ++k) {
    const auto& a = subsystems_[k];
    const auto& b = other.subsystems_[k];
    if (a.label != b.label || a.kind != b.kind ||
        a.dimension() != b.dimension()) {
      return false;
    }
  }
  return true;
}

StateVector::StateVector(SpacePtr space, Vector amplitudes)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
  if (!space_) throw std::invalid_argument("state needs a space");
  if (static_cast<std::size_t>(amplitudes_.size()) != space_->dim()) {
    throw std::invalid_argument("amplitude count does not match space dim");
  }
  const double norm = amplitudes_.norm();
  if (!(std::abs(norm - 1.0) <= kPropagatedTol)) {
    throw InvariantViolation("state norm " + std::to_string(norm) +
                             " deviates from 1");
  }
}

LocalOperator::LocalOperator(std::vector<std::string> targets, Matrix matrix,
                             Claims claims, double tol)
    : targets_(std::move(targets)), matrix_(std::move(matrix)), claims_(claims) {
  if (matrix_.rows() != matrix_.cols()) {
    throw std::invalid_argument("local operator must be square");
  }
  if (static_cast<std::size_t>(matrix_.rows()) > kMaxOperatorDim) {
    throw std::invalid_argument("local operator exceeds dimension 4096");
  }
  std::set<std::string> unique(targets_.begin(), targets_.end());
  if (unique.size() != targets_.size()) {
    throw std::invalid_argument("local operator targets repeat a subsystem");
  }
  if (claims_.hermitian) {
    const double err = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
    if (err > tol) {
      throw InvariantViolation("operator claimed hermitian, |M - M^+| = " +
                               std::to_string(err));
    }
  }
  if (claims_.unitary) {
    const Matrix id = Matrix::Identity(matrix_.rows(), matrix_.cols());
    const double err = (matrix_.adjoint() * matrix_ - id).cwiseAbs().maxCoeff();
    if (err > tol) {
      throw InvariantViolation("operator claimed unitary, |M^+M - I| = " +
                               std::to_string(err));
    }
  }
}

StateVector basis_state(SpacePtr space, std::span<const int> levels) {
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(space->dim()));
  amps[static_cast<Eigen::Index>(space->encode(levels))] = 1.0;
  return StateVector(std::move(space), std::move(amps));
}

StateVector basis_state(SpacePtr space, std::initializer_list<int> levels) {
  return basis_state(std::move(space),
                     std::span<const int>(levels.begin(), levels.size()));
}

CoherentState coherent_state(Complex alpha, int truncation) {
  if (truncation < 2) throw std::invalid_argument("truncation must be >= 2");
  const double r = std::abs(alpha);
  const double theta = std::arg(alpha);
  Vector amps = Vector::Zero(truncation);
  // Log-space evaluation keeps e^{-|alpha|^2/2} from underflowing at large
  // |alpha|.
  for (int n = 0; n < truncation; ++n) {
    if (r == 0.0) {
      amps[n] = n == 0 ? 1.0 : 0.0;
      continue;
    }
    const double log_mag =
        -0.5 * r * r + n * std::log(r) - 0.5 * std::lgamma(n + 1.0);
    amps[n] = std::polar(std::exp(log_mag), n * theta);
  }
  const double kept = amps.squaredNorm();
  CoherentState out;
  out.truncation_deficit = std::max(0.0, 1.0 - kept);
  out.truncation_warning = r * r > truncation;
  if (kept <= 0.0) {
    throw std::domain_error("coherent state has no weight below truncation");
  }
  out.amplitudes = amps / std::sqrt(kept);
  return out;
}

StateVector product_state(SpacePtr space, const std::vector<Vector>& factors) {
  if (factors.size() != space->size()) {
    throw std::invalid_argument("expected one factor per subsystem");
  }
  Vector amps = Vector::Ones(1);
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const auto& f = factors[k];
    if (f.size() != space->dimension(k)) {
      throw std::invalid_argument("factor size mismatch for '" +
                                  space->subsystems()[k].label + "'");
    }
    Vector next(amps.size() * f.size());
    for (Eigen::Index i = 0; i < amps.size(); ++i) {
      next.segment(i * f.size(), f.size()) = amps[i] * f;
    }
    amps = std::move(next);
  }
  return StateVector(std::move(space), amps / amps.norm());
}

namespace detail {

Embedding embed(const CompositeSpace& space,
                const std::vector<std::string>& targets) {
  std::vector<std::size_t> pos;
  pos.reserve(targets.size());
  for (const auto& t : targets) pos.push_back(space.position(t));

  Embedding e;
  e.offsets = {0};
  for (std::size_t p : pos) {
    std::vector<std::size_t> next;
    next.reserve(e.offsets.size() * space.dimension(p));
    for (std::size_t off : e.offsets) {
      for (int level = 0; level < space.dimension(p); ++level) {
        next.push_back(off + static_cast<std::size_t>(level) * space.stride(p));
      }
    }
    e.offsets = std::move(next);
  }

  e.bases = {0};
  for (std::size_t k = 0; k < space.size(); ++k) {
    if (std::find(pos.begin(), pos.end(), k) != pos.end()) continue;
    std::vector<std::size_t> next;
    next.reserve(e.bases.size() * space.dimension(k));
    for (std::size_t base : e.bases) {
      for (int level = 0; level < space.dimension(k); ++level) {
        next.push_back(base + static_cast<std::size_t>(level) * space.stride(k));
      }
    }
    e.bases = std::move(next);
  }
  return e;
}

}  // namespace detail

namespace {

std::size_t local_dim(const CompositeSpace& space,
                      const std::vector<std::string>& targets) {
  std::size_t d = 1;
  for (const auto& t : targets) {
    d *= static_cast<std::size_t>(space.dimension(space.position(t)));
  }
  return d;
}

}  // namespace

StateVector apply_local(const StateVector& state, const LocalOperator& op) {
  if (!op.is_unitary()) {
    throw std::invalid_argument("apply_local requires a unitary operator");
  }
  const auto& space = state.space();
  if (local_dim(space, op.targets()) !=
      static_cast<std::size_t>(op.matrix().rows())) {
    throw std::invalid_argument("operator size does not match its targets");
  }
  const auto e = detail::embed(space, op.targets());
  const auto n = static_cast<Eigen::Index>(e.offsets.size());
  const Matrix& m = op.matrix();
  Vector out = state.amplitudes();
  Vector local(n);
  for (std::size_t base : e.bases) {
    for (Eigen::Index j = 0; j < n; ++j) {
      local[j] = out[static_cast<Eigen::Index>(base + e.offsets[j])];
    }
    const Vector mapped = m * local;
    for (Eigen::Index j = 0; j < n; ++j) {
      out[static_cast<Eigen::Index>(base + e.offsets[j])] = mapped[j];
    }
  }
  return StateVector(state.space_ptr(), std::move(out));
}

Matrix partial_trace(const StateVector& state,
                     const std::vector<std::string>& keep) {
  if (keep.empty()) throw std::invalid_argument("keep list is empty");
  const auto e = detail::embed(state.space(), keep);
  const auto n = static_cast<Eigen::Index>(e.offsets.size());
  Matrix rho = Matrix::Zero(n, n);
  Vector local(n);
  for (std::size_t base : e.bases) {
    for (Eigen::Index j = 0; j < n; ++j) {
      local[j] = state[base + e.offsets[j]];
    }
    rho.noalias() += local * local.adjoint();
  }
  return rho;
}

double fidelity(const StateVector& a, const StateVector& b) {
  if (a.amplitudes().size() != b.amplitudes().size()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

namespace {

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.adjoint()));
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  const Matrix s = psd_sqrt(rho);
  const Matrix inner = s * sigma * s;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (inner + inner.adjoint()));
  const double root_trace = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(root_trace * root_trace, 0.0, 1.0);
}

double fidelity(const Matrix& rho, const Vector& psi) {
  if (rho.rows() != psi.size()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  return std::clamp(psi.dot(rho * psi).real(), 0.0, 1.0);
}

double purity(const Matrix& rho) { return (rho * rho).trace().real(); }

double expectation(const StateVector& state, const LocalOperator& op) {
  const auto e = detail::embed(state.space(), op.targets());
  const auto n = static_cast<Eigen::Index>(e.offsets.size());
  if (n != op.matrix().rows()) {
    throw std::invalid_argument("operator size does not match its targets");
  }
  Complex total = 0.0;
  Vector local(n);
  for (std::size_t base : e.bases) {
    for (Eigen::Index j = 0; j < n; ++j) {
      local[j] = state[base + e.offsets[j]];
    }
    total += local.dot(op.matrix() * local);
  }
  return total.real();
}

std::string amplitudes_to_json(const Vector& amplitudes) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < amplitudes.size(); ++i) {
    arr.push_back({amplitudes[i].real(), amplitudes[i].imag()});
  }
  return arr.dump();
}

Vector amplitudes_from_json(const std::string& text) {
  const auto arr = nlohmann::json::parse(text);
  if (!arr.is_array()) throw std::invalid_argument("expected a JSON array");
  Vector out(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& pair = arr[i];
    if (!pair.is_array() || pair.size() != 2) {
      throw std::invalid_argument("expected [re, im] pairs");
    }
    out[static_cast<Eigen::Index>(i)] =
        Complex(pair[0].get<double>(), pair[1].get<double>());
  }
  return out;
}

}  // namespace nonlocal
