#include "nonlocal/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace nonlocal {

namespace {

struct ModeQubitPair {
  std::size_t mode;
  std::size_t qubit;
  int d;
};

ModeQubitPair resolve_pair(const CompositeSpace& space, const std::string& mode,
                           const std::string& two_level) {
  const std::size_t m = space.position(mode);
  const std::size_t q = space.position(two_level);
  if (space.subsystems()[m].kind != SubsystemKind::bosonic_mode) {
    throw std::invalid_argument("'" + mode + "' is not a bosonic mode");
  }
  if (space.subsystems()[q].kind != SubsystemKind::two_level) {
    throw std::invalid_argument("'" + two_level + "' is not a two-level system");
  }
  return {m, q, space.dimension(m)};
}

// Local index for (n, s) with the mode listed first.
constexpr Eigen::Index pair_index(int n, int s) { return 2 * n + s; }

}  // namespace

LocalOperator build_hamiltonian(const CompositeSpace& space,
                                const HamiltonianSpec& spec) {
  if (const auto* jc = std::get_if<JaynesCummings>(&spec)) {
    const auto pair = resolve_pair(space, jc->mode, jc->two_level);
    Matrix h = Matrix::Zero(2 * pair.d, 2 * pair.d);
    for (int n = 0; n + 1 < pair.d; ++n) {
      const double amp = jc->coupling * std::sqrt(n + 1.0);
      h(pair_index(n + 1, 0), pair_index(n, 1)) = amp;
      h(pair_index(n, 1), pair_index(n + 1, 0)) = amp;
    }
    return LocalOperator({jc->mode, jc->two_level}, std::move(h),
                         {.hermitian = true}, kConstructionTol);
  }
  const auto& free = std::get<FreeTwoLevel>(spec);
  if (space.subsystem(free.two_level).kind != SubsystemKind::two_level) {
    throw std::invalid_argument("'" + free.two_level +
                                "' is not a two-level system");
  }
  Matrix h = Matrix::Zero(2, 2);
  h(1, 1) = free.splitting;
  return LocalOperator({free.two_level}, std::move(h), {.hermitian = true},
                       kConstructionTol);
}

LocalOperator propagator(const LocalOperator& hamiltonian, double t) {
  if (!hamiltonian.is_hermitian()) {
    throw std::invalid_argument("propagator requires a hermitian operator");
  }
  const Matrix& h = hamiltonian.matrix();
  const Eigen::Index n = h.rows();

  // Connected components of the coupling graph; each is diagonalized alone.
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  auto find = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = r + 1; c < n; ++c) {
      if (h(r, c) != Complex(0.0)) parent[find(r)] = find(c);
    }
  }
  std::vector<std::vector<Eigen::Index>> blocks;
  std::vector<Eigen::Index> block_of(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index root = find(i);
    if (block_of[root] < 0) {
      block_of[root] = static_cast<Eigen::Index>(blocks.size());
      blocks.emplace_back();
    }
    blocks[block_of[root]].push_back(i);
  }

  Matrix u = Matrix::Zero(n, n);
  for (const auto& idx : blocks) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    Matrix sub(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) sub(r, c) = h(idx[r], idx[c]);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sub);
    Vector phases(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      phases[k] = std::polar(1.0, -eig.eigenvalues()[k] * t);
    }
    const Matrix block =
        eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) u(idx[r], idx[c]) = block(r, c);
    }
  }
  return LocalOperator(hamiltonian.targets(), std::move(u), {.unitary = true});
}

StateVector evolve(const StateVector& state, const LocalOperator& hamiltonian,
                   double t) {
  return apply_local(state, propagator(hamiltonian, t));
}

LocalOperator swap_unitary(const CompositeSpace& space, const std::string& mode,
                           const std::string& two_level) {
  const auto pair = resolve_pair(space, mode, two_level);
  Matrix u = Matrix::Identity(2 * pair.d, 2 * pair.d);
  const Eigen::Index one_lower = pair_index(1, 0);
  const Eigen::Index zero_upper = pair_index(0, 1);
  u(one_lower, one_lower) = 0.0;
  u(zero_upper, zero_upper) = 0.0;
  u(one_lower, zero_upper) = 1.0;
  u(zero_upper, one_lower) = 1.0;
  return LocalOperator({mode, two_level}, std::move(u),
                       {.hermitian = true, .unitary = true}, kConstructionTol);
}

LocalOperator jc_swap_unitary(const CompositeSpace& space,
                              const std::string& mode,
                              const std::string& two_level, double coupling) {
  if (coupling == 0.0) throw std::invalid_argument("JC swap needs g != 0");
  const auto h = build_hamiltonian(space, JaynesCummings{mode, two_level, coupling});
  return propagator(h, std::numbers::pi / (2.0 * coupling));
}

namespace {

std::vector<std::string> site_labels(const CompositeSpace& space, Site site) {
  std::vector<std::string> labels;
  for (const auto& s : space.subsystems()) {
    if (s.site == site) labels.push_back(s.label);
  }
  return labels;
}

// Diagonal of Q over the local basis of `labels`.
Eigen::VectorXd charge_diagonal(const CompositeSpace& space,
                                const std::vector<std::string>& labels) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(1);
  for (const auto& label : labels) {
    const auto& s = space.subsystem(label);
    const int d = s.dimension();
    Eigen::VectorXd next(diag.size() * d);
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
      for (int level = 0; level < d; ++level) {
        next[i * d + level] = diag[i] + s.charge * level;
      }
    }
    diag = std::move(next);
  }
  return diag;
}

}  // namespace

LocalOperator charge_operator(const CompositeSpace& space, Site site) {
  const auto labels = site_labels(space, site);
  if (labels.empty()) {
    throw std::invalid_argument("no subsystem at site " + to_string(site));
  }
  const Eigen::VectorXd diag = charge_diagonal(space, labels);
  return LocalOperator(labels, Matrix(diag.cast<Complex>().asDiagonal()),
                       {.hermitian = true}, kConstructionTol);
}

LocalOperator phase_kick(const CompositeSpace& space, const KickSpec& kick) {
  const auto labels = site_labels(space, kick.region);
  const Eigen::VectorXd diag = charge_diagonal(space, labels);
  Vector phases(diag.size());
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    phases[i] = std::polar(1.0, kick.chi * diag[i]);
  }
  return LocalOperator(labels, Matrix(phases.asDiagonal()), {.unitary = true},
                       kConstructionTol);
}

double ab_phase(double sigma, double d_plates, double q, double t) {
  return 4.0 * std::numbers::pi * sigma * d_plates * q * t;
}

Matrix embed_matrix(const CompositeSpace& space, const LocalOperator& op,
                    const std::vector<std::string>& targets) {
  for (const auto& t : op.targets()) {
    if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
      throw std::invalid_argument("embed_matrix: '" + t +
                                  "' missing from target list");
    }
  }
  // Positions of the operator's targets inside the wider local register.
  std::vector<int> dims;
  for (const auto& t : targets) dims.push_back(space.subsystem(t).dimension());
  std::vector<std::size_t> strides(targets.size(), 1);
  std::size_t total = 1;
  for (std::size_t k = targets.size(); k-- > 0;) {
    strides[k] = total;
    total *= static_cast<std::size_t>(dims[k]);
  }
  if (total > kMaxOperatorDim) {
    throw std::invalid_argument("embedded operator exceeds dimension 4096");
  }
  std::vector<std::size_t> op_pos;
  for (const auto& t : op.targets()) {
    op_pos.push_back(static_cast<std::size_t>(
        std::find(targets.begin(), targets.end(), t) - targets.begin()));
  }
  auto digits = [&](std::size_t index) {
    std::vector<int> d(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k) {
      d[k] = static_cast<int>(index / strides[k]);
      index %= strides[k];
    }
    return d;
  };
  auto op_index = [&](const std::vector<int>& d) {
    std::size_t idx = 0;
    for (std::size_t p : op_pos) idx = idx * dims[p] + d[p];
    return static_cast<Eigen::Index>(idx);
  };
  const auto n = static_cast<Eigen::Index>(total);
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto dr = digits(static_cast<std::size_t>(r));
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto dc = digits(static_cast<std::size_t>(c));
      bool spectators_match = true;
      for (std::size_t k = 0; k < targets.size() && spectators_match; ++k) {
        if (std::find(op_pos.begin(), op_pos.end(), k) == op_pos.end() &&
            dr[k] != dc[k]) {
          spectators_match = false;
        }
      }
      if (spectators_match) out(r, c) = op.matrix()(op_index(dr), op_index(dc));
    }
  }
  return out;
}

double commutator_norm(const LocalOperator& a, const LocalOperator& b) {
  if (a.targets() != b.targets()) {
    throw std::invalid_argument("commutator_norm: operators act on different targets");
  }
  const Matrix c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
  return c.size() == 0 ? 0.0 : c.cwiseAbs().maxCoeff();
}

}  // namespace nonlocal
