#include "eitnsim/liouvillian.hpp"

#include "eitnsim/error.hpp"
#include "eitnsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace eitnsim {
namespace {

using Triplet = Eigen::Triplet<Complex>;
constexpr Complex kI{0.0, 1.0};

// Union-find over hyperfine levels carrying the frame offset relative to the
// set representative.
struct FramePotentials {
  std::array<int, 6> parent{};
  std::array<int, 6> offset{}; // shift[x] - shift[parent[x]]

  FramePotentials() { std::iota(parent.begin(), parent.end(), 0); }

  std::pair<int, int> find(int x) {
    int total = 0;
    int r = x;
    while (parent[r] != r) {
      total += offset[r];
      r = parent[r];
    }
    return {r, total};
  }

  // Requires shift[a] - shift[b] == diff. Returns false if that contradicts
  // constraints already accepted.
  bool link(int a, int b, int diff) {
    auto [ra, oa] = find(a);
    auto [rb, ob] = find(b);
    if (ra == rb) return oa - ob == diff;
    parent[ra] = rb;
    offset[ra] = diff + ob - oa;
    return true;
  }
};

double level_offset(const LevelScheme& scheme, int F_e, int F_ref) {
  return scheme.level_energy(Manifold::Excited5P32, F_e) -
         scheme.level_energy(Manifold::Excited5P32, F_ref);
}

bool driven(const LaserField& field, const FieldComponent& c) {
  return field.intensity > 0.0 && c.amplitude_rel > 0.0;
}

void add_kron(std::vector<Triplet>& out, const Eigen::MatrixXcd& A,
              const Eigen::MatrixXcd& B, Complex scale) {
  // vec_row(A X B) = (A kron B^T) vec_row(X)
  const int n = static_cast<int>(A.rows());
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const Complex a = A(i, k);
      if (a == Complex(0.0)) continue;
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          const Complex b = B(l, j);
          if (b == Complex(0.0)) continue;
          out.emplace_back(i * n + j, k * n + l, scale * a * b);
        }
    }
}

SparseMatrixC from_triplets(int dim, const std::vector<Triplet>& t) {
  SparseMatrixC m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

} // namespace

std::string to_string(FrameMode mode) {
  return mode == FrameMode::Secular ? "Secular" : "Floquet";
}

FrameMode frame_mode_from_string(const std::string& name) {
  if (name == "Secular") return FrameMode::Secular;
  if (name == "Floquet") return FrameMode::Floquet;
  throw ConfigError("unknown solver mode '" + name + "'");
}

double FieldSet::modulation_MHz() const {
  double f = 0.0;
  for (const auto* field : {&laser1, &laser2}) {
    if (!field->modulated()) continue;
    if (f > 0.0 && field->modulation_MHz != f)
      throw ConfigError("both lasers modulated at different frequencies");
    f = field->modulation_MHz;
  }
  return f;
}

int manifold_slot(Manifold m, int F) {
  return m == Manifold::Ground5S12 ? F - 1 : 2 + F;
}

int FrameAssignment::frame_shift(Manifold m, int F) const {
  return shift[manifold_slot(m, F)];
}

std::vector<std::pair<int, int>>
FrameAssignment::pairs(const LevelScheme& scheme, Laser laser,
                       int component) const {
  std::vector<std::pair<int, int>> out;
  const auto couplings = dipole_couplings(scheme);
  for (const auto& t : transitions) {
    if (!t.kept || t.laser != laser || t.component != component) continue;
    for (const auto& c : couplings)
      if (scheme.state(c.ground).F == t.ground_F &&
          scheme.state(c.excited).F == t.excited_F)
        out.emplace_back(c.ground, c.excited);
  }
  return out;
}

FrameAssignment assign_frames(const LevelScheme& scheme, const FieldSet& fields,
                              double velocity, FrameMode mode) {
  FrameAssignment frame;
  frame.mode = mode;
  frame.velocity = velocity;
  const double f = fields.modulation_MHz();
  const double doppler = units::doppler_shift(velocity, fields.wavelength_nm);

  bool any_sideband = false;
  for (Laser laser : {Laser::Laser1, Laser::Laser2}) {
    const auto& field = fields.get(laser);
    for (const auto& c : field.components)
      if (c.order != 0 && driven(field, c)) any_sideband = true;
  }
  if (mode == FrameMode::Floquet && !any_sideband) {
    frame.mode = FrameMode::Secular;
    frame.warnings.push_back(
        "Floquet mode requested without a driven sideband; using Secular");
  }

  // Candidate (component, transition) pairs with their detunings.
  std::vector<DrivenTransition> candidates;
  for (Laser laser : {Laser::Laser1, Laser::Laser2}) {
    const auto& field = fields.get(laser);
    const int Fg = field.target_ground_F;
    const int F_ref = laser == Laser::Laser1 ? 2 : 1;
    for (int Fe : scheme.levels(Manifold::Excited5P32)) {
      if (std::abs(Fe - Fg) > 1) continue;
      for (int ci = 0; ci < static_cast<int>(field.components.size()); ++ci) {
        const auto& c = field.components[ci];
        if (!driven(field, c)) continue;
        const double detuning = field.carrier_detuning_MHz + c.offset_MHz -
                                doppler - level_offset(scheme, Fe, F_ref);
        candidates.push_back({laser, ci, c.order, Fg, Fe, detuning, true});
      }
    }
  }

  if (frame.mode == FrameMode::Floquet) {
    frame.transitions = std::move(candidates);
    frame.residual_frequency_MHz = f;
    return frame;
  }

  // Secular: nearest component per (laser, transition); ties to lower order.
  std::vector<DrivenTransition> chosen;
  for (const auto& c : candidates) {
    auto it = std::find_if(chosen.begin(), chosen.end(), [&](const auto& x) {
      return x.laser == c.laser && x.excited_F == c.excited_F;
    });
    if (it == chosen.end()) {
      chosen.push_back(c);
    } else {
      const double a = std::abs(c.detuning_MHz), b = std::abs(it->detuning_MHz);
      if (a < b || (a == b && c.order < it->order)) *it = c;
    }
  }

  // Most resonant first; a transition that would close a loop with a net
  // frequency mismatch cannot be made static and is dropped.
  std::stable_sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) {
    const double da = std::abs(a.detuning_MHz), db = std::abs(b.detuning_MHz);
    if (da != db) return da < db;
    if (a.excited_F != b.excited_F) return a.excited_F < b.excited_F;
    return a.laser < b.laser;
  });
  FramePotentials potentials;
  for (auto& t : chosen) {
    const int g = manifold_slot(Manifold::Ground5S12, t.ground_F);
    const int e = manifold_slot(Manifold::Excited5P32, t.excited_F);
    t.kept = potentials.link(e, g, t.order);
  }

  // Gauge: ground F=2 (else F=1, else the lowest level) has zero offset.
  for (int slot = 0; slot < 6; ++slot) {
    const auto [root, off] = potentials.find(slot);
    int anchor = slot;
    for (int cand : {1, 0, 2, 3, 4, 5}) {
      if (potentials.find(cand).first == root) {
        anchor = cand;
        break;
      }
    }
    frame.shift[slot] = off - potentials.find(anchor).second;
  }
  frame.transitions = std::move(chosen);
  return frame;
}

Hamiltonian assemble_hamiltonian(const LevelScheme& scheme,
                                 const FieldSet& fields,
                                 const Eigen::Vector3d& B_gauss,
                                 const FrameAssignment& frame) {
  const int n = scheme.size();
  const bool full = scheme.mode() == SchemeMode::FullZeeman24;
  const double B = B_gauss.norm();
  if (!full && B > 0.0)
    throw ConfigError("a magnetic field requires the FullZeeman24 scheme");
  const Eigen::Vector3d axis = B > 0.0 ? Eigen::Vector3d(B_gauss / B)
                                       : Eigen::Vector3d::UnitZ();

  Hamiltonian H;
  H.n = n;
  H.mode = frame.mode;
  H.velocity = frame.velocity;
  H.gamma = units::angular(scheme.gamma());
  H.frequency_MHz = frame.mode == FrameMode::Floquet ? frame.residual_frequency_MHz
                                                     : 0.0;
  H.static_part = Eigen::MatrixXcd::Zero(n, n);

  const double f = fields.modulation_MHz();
  const double doppler = units::doppler_shift(frame.velocity, fields.wavelength_nm);
  const double d1 = fields.laser1.carrier_detuning_MHz;
  const double d2 = fields.laser2.carrier_detuning_MHz;
  const double e1 = scheme.level_energy(Manifold::Excited5P32, 1);
  const double e2 = scheme.level_energy(Manifold::Excited5P32, 2);

  for (const auto& s : scheme.states()) {
    double diag = 0.0;
    if (s.is_ground()) {
      if (s.F == 1) diag = e1 - e2 + d2 - d1;
    } else {
      diag = scheme.level_energy(s.manifold, s.F) - e2 - d1 + doppler;
    }
    if (full) diag += zeeman_shift(s, B, scheme);
    diag -= frame.shift[manifold_slot(s.manifold, s.F)] * f;
    H.static_part(s.index, s.index) = units::angular(diag);
  }

  std::array<std::array<Complex, 3>, 2> pol{};
  for (Laser laser : {Laser::Laser1, Laser::Laser2}) {
    const auto& field = fields.get(laser);
    const int li = laser == Laser::Laser1 ? 0 : 1;
    if (full) pol[li] = polarization_components(field.polarization, axis);
    const double rabi = units::angular(rabi_from_intensity(
        field.intensity, fields.saturation_intensity, scheme.gamma()));
    for (const auto& c : field.components)
      H.rabi_weight[li] += std::pow(rabi * c.amplitude_rel, 2);
  }

  const auto couplings = dipole_couplings(scheme);
  for (const auto& t : frame.transitions) {
    if (!t.kept) continue;
    const auto& field = fields.get(t.laser);
    const int li = t.laser == Laser::Laser1 ? 0 : 1;
    const double rabi = units::angular(rabi_from_intensity(
        field.intensity, fields.saturation_intensity, scheme.gamma()));
    const double half = 0.5 * rabi * field.components[t.component].amplitude_rel;
    const int harmonic = frame.mode == FrameMode::Floquet ? -t.order : 0;

    for (const auto& c : couplings) {
      if (scheme.state(c.ground).F != t.ground_F ||
          scheme.state(c.excited).F != t.excited_F)
        continue;
      const Complex value =
          half * c.amplitude * (full ? pol[li][c.q + 1] : Complex(1.0));
      if (value == Complex(0.0)) continue;
      H.couplings.push_back({t.laser, t.component, harmonic, c.excited,
                             c.ground, value});
      if (harmonic == 0) {
        H.static_part(c.excited, c.ground) += value;
        H.static_part(c.ground, c.excited) += std::conj(value);
      } else {
        auto& up = H.harmonics[harmonic];
        auto& down = H.harmonics[-harmonic];
        if (up.size() == 0) up = Eigen::MatrixXcd::Zero(n, n);
        if (down.size() == 0) down = Eigen::MatrixXcd::Zero(n, n);
        up(c.excited, c.ground) += value;
        down(c.ground, c.excited) += std::conj(value);
      }
    }
  }
  return H;
}

SparseMatrixC assemble_dissipator(const LevelScheme& scheme,
                                  const RelaxationConfig& relax,
                                  const FrameAssignment& frame) {
  if (!(relax.gamma_t_MHz > 0.0))
    throw ConfigError("relaxation.gamma_t_MHz must be positive (unique steady state)");
  if (!(relax.gamma_L_MHz >= 0.0))
    throw ConfigError("relaxation.gamma_L_MHz must be non-negative");

  const int n = scheme.size();
  const int dim = n * n;
  SparseMatrixC D(dim, dim);

  // Radiative decay. Excited levels sitting in different frames radiate
  // incoherently with respect to each other.
  std::vector<Triplet> trip;
  for (const auto& ch : decay_channels(scheme)) {
    std::map<int, Eigen::MatrixXcd> by_frame;
    for (int e : scheme.excited_indices()) {
      if (ch.op.col(e).isZero(0.0)) continue;
      const auto& s = scheme.state(e);
      const int shift = frame.shift[manifold_slot(s.manifold, s.F)];
      auto& op = by_frame[shift];
      if (op.size() == 0) op = Eigen::MatrixXcd::Zero(n, n);
      op.col(e) = ch.op.col(e).cast<Complex>();
    }
    for (const auto& [shift, op] : by_frame) {
      const Eigen::MatrixXcd LdL = op.adjoint() * op;
      add_kron(trip, op, op.adjoint(), units::angular(1.0));
      add_kron(trip, LdL, Eigen::MatrixXcd::Identity(n, n), units::angular(-0.5));
      add_kron(trip, Eigen::MatrixXcd::Identity(n, n), LdL, units::angular(-0.5));
    }
  }
  D = from_triplets(dim, trip);

  D += transit_superop(n, scheme.ground_indices(),
                       units::angular(relax.gamma_t_MHz));

  // Mutual laser dephasing as a projector Lindblad term, which keeps the map
  // completely positive. Laser 1 is the phase reference: the F=2 block carries
  // the relative phase, so F=1<->F=2 and the laser-2 optical coherences decay
  // at gamma_L. Damping only the ground-ground elements would not be CP (the
  // excited levels are coherent with both ground blocks) and yields slightly
  // negative populations once sidebands are present.
  if (relax.gamma_L_MHz > 0.0) {
    const double rate = units::angular(relax.gamma_L_MHz);
    auto projector = [&](const std::vector<int>& idx) {
      Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(n, n);
      for (int i : idx) P(i, i) = 1.0;
      return P;
    };
    const auto g1 = scheme.indices(Manifold::Ground5S12, 1);
    const auto g2 = scheme.indices(Manifold::Ground5S12, 2);
    if (relax.optical_dephasing) {
      // Every pair of the blocks F=1, F=2, excited dephases at gamma_L.
      for (const auto& idx : {g1, g2, scheme.excited_indices()})
        D += lindblad_superop(std::sqrt(rate) * projector(idx));
    } else {
      D += lindblad_superop(std::sqrt(2.0 * rate) * projector(g2));
    }
  }
  D.makeCompressed();
  return D;
}

SparseMatrixC commutator_superop(const Eigen::MatrixXcd& H) {
  const int n = static_cast<int>(H.rows());
  std::vector<Triplet> trip;
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  add_kron(trip, H, I, -kI);
  add_kron(trip, I, H, kI);
  return from_triplets(n * n, trip);
}

SparseMatrixC lindblad_superop(const Eigen::MatrixXcd& L) {
  const int n = static_cast<int>(L.rows());
  const Eigen::MatrixXcd LdL = L.adjoint() * L;
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  std::vector<Triplet> trip;
  add_kron(trip, L, L.adjoint(), 1.0);
  add_kron(trip, LdL, I, -0.5);
  add_kron(trip, I, LdL, -0.5);
  return from_triplets(n * n, trip);
}

SparseMatrixC transit_superop(int n, const std::vector<int>& ground,
                              double rate) {
  std::vector<Triplet> trip;
  const int dim = n * n;
  for (int k = 0; k < dim; ++k) trip.emplace_back(k, k, -rate);
  const double share = rate / static_cast<double>(ground.size());
  for (int g : ground)
    for (int k = 0; k < n; ++k) trip.emplace_back(g * n + g, k * n + k, share);
  return from_triplets(dim, trip);
}

Superoperator liouvillian(const Hamiltonian& H, const SparseMatrixC& D) {
  const int dim = H.n * H.n;
  if (D.rows() != dim || D.cols() != dim)
    throw ValidationError("dissipator dimension does not match Hamiltonian");
  Superoperator L;
  L.n = H.n;
  L.static_part = commutator_superop(H.static_part) + D;
  L.static_part.makeCompressed();
  L.frequency_MHz = H.frequency_MHz;
  L.velocity = H.velocity;
  for (const auto& [m, Hm] : H.harmonics)
    L.harmonics.emplace_back(m, commutator_superop(Hm));
  return L;
}

Eigen::VectorXcd Superoperator::apply(const Eigen::VectorXcd& v,
                                      double t_us) const {
  Eigen::VectorXcd out = static_part * v;
  const double w = units::angular(frequency_MHz);
  for (const auto& [m, op] : harmonics)
    out += std::exp(kI * (m * w * t_us)) * (op * v);
  return out;
}

Eigen::MatrixXcd Superoperator::apply(const Eigen::MatrixXcd& u,
                                      double t_us) const {
  Eigen::MatrixXcd out = static_part * u;
  const double w = units::angular(frequency_MHz);
  for (const auto& [m, op] : harmonics)
    out += std::exp(kI * (m * w * t_us)) * (op * u);
  return out;
}

Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho) {
  const int n = static_cast<int>(rho.rows());
  Eigen::VectorXcd v(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v(i * n + j) = rho(i, j);
  return v;
}

Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, int n) {
  Eigen::MatrixXcd rho(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rho(i, j) = v(i * n + j);
  return rho;
}

Generator build_generator(const LevelScheme& scheme, const FieldSet& fields,
                          const Eigen::Vector3d& B_gauss,
                          const RelaxationConfig& relax, double velocity,
                          FrameMode mode) {
  Generator g;
  g.frame = assign_frames(scheme, fields, velocity, mode);
  g.hamiltonian = assemble_hamiltonian(scheme, fields, B_gauss, g.frame);
  g.L = liouvillian(g.hamiltonian, assemble_dissipator(scheme, relax, g.frame));
  return g;
}

} // namespace eitnsim
