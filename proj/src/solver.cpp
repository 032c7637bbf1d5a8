#include "eitnsim/solver.hpp"

#include "eitnsim/error.hpp"
#include "eitnsim/units.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace boost::numeric::odeint {
// odeint's Eigen bindings return a complex infinity norm for complex states.
template <> struct vector_space_norm_inf<Eigen::VectorXcd> {
  using result_type = double;
  double operator()(const Eigen::VectorXcd& x) const {
    return x.cwiseAbs().maxCoeff();
  }
};
} // namespace boost::numeric::odeint

namespace eitnsim {
namespace {

namespace ode = boost::numeric::odeint;
constexpr Complex kI{0.0, 1.0};
constexpr int kDenseLimit = 64;

// Generator evaluated densely for small systems, sparse otherwise.
class GeneratorEval {
public:
  explicit GeneratorEval(const Superoperator& L)
      : L_(L), dense_(L.dimension() <= kDenseLimit),
        w_(units::angular(L.frequency_MHz)) {
    if (dense_) {
      static_ = Eigen::MatrixXcd(L.static_part);
      for (const auto& [m, op] : L.harmonics)
        harmonics_.emplace_back(m, Eigen::MatrixXcd(op));
    }
  }

  void set_frequency(double f_MHz) { w_ = units::angular(f_MHz); }
  // The state holds `columns` stacked vectors (column-major n^2 x columns).
  void set_columns(int columns) { columns_ = columns; }

  void operator()(const Eigen::VectorXcd& xs, Eigen::VectorXcd& dxs, double t) const {
    const int dim = L_.dimension();
    dxs.resize(xs.size());
    Eigen::Map<const Eigen::MatrixXcd> x(xs.data(), dim, columns_);
    Eigen::Map<Eigen::MatrixXcd> dx(dxs.data(), dim, columns_);
    if (dense_) {
      dx.noalias() = static_ * x;
      for (const auto& [m, op] : harmonics_)
        dx += std::exp(kI * (m * w_ * t)) * (op * x);
    } else {
      dx = L_.static_part * x;
      for (const auto& [m, op] : L_.harmonics)
        dx += std::exp(kI * (m * w_ * t)) * (op * x);
    }
  }

  double norm_estimate() const {
    double s = 0.0;
    for (int k = 0; k < L_.static_part.outerSize(); ++k)
      for (SparseMatrixC::InnerIterator it(L_.static_part, k); it; ++it)
        s = std::max(s, std::abs(it.value()));
    for (const auto& [m, op] : L_.harmonics)
      for (int k = 0; k < op.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(op, k); it; ++it)
          s = std::max(s, std::abs(it.value()));
    return s * 4.0;
  }

private:
  const Superoperator& L_;
  bool dense_;
  double w_;
  int columns_ = 1;
  Eigen::MatrixXcd static_;
  std::vector<std::pair<int, Eigen::MatrixXcd>> harmonics_;
};

void integrate(const GeneratorEval& rhs, Eigen::VectorXcd& x, double t0,
               double t1, const PropagateOptions& opt, double dt) {
  using State = Eigen::VectorXcd;
  auto stepper = ode::make_controlled(
      opt.absolute_tolerance, opt.relative_tolerance,
      ode::runge_kutta_dopri5<State, double, State, double,
                              ode::vector_space_algebra>());
  double t = t0;
  auto system = [&rhs](const State& s, State& ds, double tt) { rhs(s, ds, tt); };
  while (t1 - t > 1e-14 * std::max(1.0, std::abs(t1))) {
    dt = std::min(dt, t1 - t);
    if (dt < opt.min_step_us && t1 - t > opt.min_step_us) {
      std::ostringstream msg;
      msg << "step size underflow (stiff system) at t = " << t << " us";
      throw SolverError(msg.str());
    }
    stepper.try_step(system, x, t, dt);
  }
}

double inf_norm(const SparseMatrixC& A) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(A, k); it; ++it)
      rows(it.row()) += std::abs(it.value());
  return rows.maxCoeff();
}

DensityMatrix finalize(Eigen::MatrixXcd rho) {
  DensityMatrix out;
  out.symmetrization_error = (rho - rho.adjoint()).norm() * 0.5;
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const Complex tr = rho.trace();
  if (std::abs(tr) == 0.0 || !std::isfinite(std::abs(tr)))
    throw SolverError("density matrix has zero or non-finite trace");
  rho /= tr.real();
  out.rho = std::move(rho);
  return out;
}

// Real coordinates of a Hermitian n x n matrix: the diagonal, then Re and Im
// of each upper element. T maps them to vec(rho); P = T^-1.
struct HermitianBasis {
  int n = 0;
  SparseMatrixC T, P;
};

HermitianBasis make_basis(int n) {
  const int dim = n * n;
  std::vector<Eigen::Triplet<Complex>> tt, pt;
  int col = 0;
  for (int i = 0; i < n; ++i, ++col) {
    tt.emplace_back(i * n + i, col, 1.0);
    pt.emplace_back(col, i * n + i, 1.0);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int ij = i * n + j, ji = j * n + i;
      tt.emplace_back(ij, col, 1.0);
      tt.emplace_back(ji, col, 1.0);
      pt.emplace_back(col, ij, 0.5);
      pt.emplace_back(col, ji, 0.5);
      ++col;
      tt.emplace_back(ij, col, Complex(0, 1));
      tt.emplace_back(ji, col, Complex(0, -1));
      pt.emplace_back(col, ij, Complex(0, -0.5));
      pt.emplace_back(col, ji, Complex(0, 0.5));
      ++col;
    }
  }
  HermitianBasis b;
  b.n = n;
  b.T.resize(dim, dim);
  b.P.resize(dim, dim);
  b.T.setFromTriplets(tt.begin(), tt.end());
  b.P.setFromTriplets(pt.begin(), pt.end());
  return b;
}

using SparseReal = Eigen::SparseMatrix<double>;

// Per-thread factorization whose symbolic analysis is reused while the
// sparsity pattern stays the same (it does across the velocity classes of a
// scan point).
struct RealSolverCache {
  HermitianBasis basis;
  std::vector<int> outer, inner;
  Eigen::SparseLU<SparseReal> lu;
};

// Solves L rho = 0, Tr rho = 1 in real coordinates. L preserves Hermiticity,
// so the projected system is real and several times cheaper to factorize
// than the complex one.
Eigen::VectorXcd hermitian_solve(const Superoperator& L) {
  thread_local RealSolverCache cache;
  const int n = L.n;
  const int dim = L.dimension();
  if (cache.basis.n != n) {
    cache.basis = make_basis(n);
    cache.outer.clear();
  }
  const SparseMatrixC M = cache.basis.P * L.static_part * cache.basis.T;

  // Row 0 (the rho_00 equation) is replaced by the trace condition. Entries
  // are kept even when zero so the pattern does not depend on the values.
  std::vector<Eigen::Triplet<double>> rt;
  rt.reserve(M.nonZeros() + n);
  for (int k = 0; k < M.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(M, k); it; ++it)
      if (it.row() != 0) rt.emplace_back(it.row(), it.col(), it.value().real());
  for (int i = 0; i < n; ++i) rt.emplace_back(0, i, 1.0);
  SparseReal A(dim, dim);
  A.setFromTriplets(rt.begin(), rt.end());
  A.makeCompressed();

  const std::vector<int> outer(A.outerIndexPtr(), A.outerIndexPtr() + dim + 1);
  const std::vector<int> inner(A.innerIndexPtr(), A.innerIndexPtr() + A.nonZeros());
  if (outer != cache.outer || inner != cache.inner) {
    cache.lu.analyzePattern(A);
    cache.outer = outer;
    cache.inner = inner;
  }
  cache.lu.factorize(A);
  if (cache.lu.info() != Eigen::Success) {
    cache.outer.clear();
    throw SolverError("degenerate steady state: sparse factorization failed");
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  rhs(0) = 1.0;
  const Eigen::VectorXd r = cache.lu.solve(rhs);
  if (cache.lu.info() != Eigen::Success || !r.allFinite())
    throw SolverError("degenerate steady state: sparse solve failed");
  return cache.basis.T * r.cast<Complex>();
}

} // namespace

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void DensityMatrix::check_invariants() const {
  const double herm = (rho - rho.adjoint()).norm();
  const double tr = std::abs(rho.trace() - Complex(1.0));
  const double min_ev = min_eigenvalue();
  if (herm > 1e-10 || tr > 1e-10 || min_ev < -1e-8 || !rho.allFinite()) {
    std::ostringstream msg;
    msg << "density matrix invariant violated (hermiticity " << herm
        << ", trace error " << tr << ", min eigenvalue " << min_ev
        << ", velocity " << velocity << ")";
    throw SolverError(msg.str());
  }
}

double trace_norm(const Eigen::MatrixXcd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  return svd.singularValues().sum();
}

DensityMatrix steady_state(const Superoperator& L) {
  if (L.time_dependent())
    throw ValidationError("steady_state needs a time-independent generator");
  const int n = L.n;
  const int dim = L.dimension();

  // Replace the rho_00 equation by the trace condition.
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
  rhs(0) = 1.0;
  Eigen::VectorXcd x;

  if (dim <= kDenseLimit) {
    Eigen::MatrixXcd A(L.static_part);
    A.row(0).setZero();
    for (int k = 0; k < n; ++k) A(0, k * n + k) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
    if (!lu.isInvertible())
      throw SolverError("degenerate steady state: generator has a null space "
                        "beyond the trace direction");
    x = lu.solve(rhs);
  } else {
    x = hermitian_solve(L);
  }

  DensityMatrix out = finalize(unvectorize(x, n));
  out.velocity = L.velocity;
  const double scale = std::max(inf_norm(L.static_part), 1e-300);
  out.residual =
      (L.static_part * vectorize(out.rho)).cwiseAbs().maxCoeff() / scale;
  if (!(out.residual < 1e-10)) {
    std::ostringstream msg;
    msg << "degenerate steady state: residual " << out.residual
        << " exceeds 1e-10 relative";
    throw SolverError(msg.str());
  }
  out.check_invariants();
  return out;
}

DensityMatrix propagate(const Superoperator& L, const Eigen::MatrixXcd& rho0,
                        double t_final_us, const PropagateOptions& options) {
  if (rho0.rows() != L.n || rho0.cols() != L.n)
    throw ValidationError("initial state dimension does not match generator");
  if (!(t_final_us >= 0.0)) throw ValidationError("t_final must be >= 0");

  DensityMatrix out;
  out.velocity = L.velocity;
  if (t_final_us == 0.0) {
    out.rho = rho0;
    return out;
  }

  GeneratorEval rhs(L);
  Eigen::VectorXcd x = vectorize(rho0);
  const double dt0 = std::min(t_final_us, 0.1 / rhs.norm_estimate());
  integrate(rhs, x, 0.0, t_final_us, options, dt0);

  const Complex tr0 = rho0.trace();
  Eigen::MatrixXcd rho = unvectorize(x, L.n);
  if (std::abs(rho.trace() - tr0) > 1e-8) {
    std::ostringstream msg;
    msg << "trace drift " << std::abs(rho.trace() - tr0) << " during propagation";
    throw SolverError(msg.str());
  }
  out.rho = 0.5 * (rho + rho.adjoint());
  out.symmetrization_error = (rho - rho.adjoint()).norm() * 0.5;
  return out;
}

namespace {

// Fourth-order Magnus steps over one period: the generator is sampled at the
// two Gauss points of each step and every step is an exact exponential.
std::vector<Eigen::MatrixXcd> magnus_steps(const Superoperator& L, double f_MHz,
                                           int steps) {
  const Eigen::MatrixXcd L0(L.static_part);
  std::vector<std::pair<int, Eigen::MatrixXcd>> harmonics;
  for (const auto& [m, op] : L.harmonics) harmonics.emplace_back(m, Eigen::MatrixXcd(op));
  const double w = units::angular(f_MHz);
  const double h = 1.0 / (f_MHz * steps);
  const double c = std::sqrt(3.0) / 6.0;
  auto at = [&](double t) {
    Eigen::MatrixXcd a = L0;
    for (const auto& [m, op] : harmonics) a += std::exp(kI * (m * w * t)) * op;
    return a;
  };
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    const Eigen::MatrixXcd a1 = at((k + 0.5 - c) * h);
    const Eigen::MatrixXcd a2 = at((k + 0.5 + c) * h);
    const Eigen::MatrixXcd omega =
        0.5 * h * (a1 + a2) + (std::sqrt(3.0) / 12.0) * h * h * (a2 * a1 - a1 * a2);
    out.push_back(omega.exp());
  }
  return out;
}

Eigen::MatrixXcd product(const std::vector<Eigen::MatrixXcd>& steps) {
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(steps.front().rows(),
                                                  steps.front().cols());
  for (const auto& s : steps) U = (s * U).eval();
  return U;
}

struct DenseMonodromy {
  Eigen::MatrixXcd phi;                // Richardson-extrapolated
  std::vector<Eigen::MatrixXcd> steps; // finest level
};

// Step doubling until the finer product changes by less than the tolerance,
// then one Richardson step (the Gauss-point Magnus scheme is symmetric, so
// its error expands in even powers of h).
DenseMonodromy dense_monodromy(const Superoperator& L, double f_MHz,
                               const PropagateOptions& options, int min_steps) {
  int steps = min_steps;
  Eigen::MatrixXcd coarse = product(magnus_steps(L, f_MHz, steps));
  for (;;) {
    DenseMonodromy out;
    out.steps = magnus_steps(L, f_MHz, 2 * steps);
    const Eigen::MatrixXcd fine = product(out.steps);
    const double error = (fine - coarse).cwiseAbs().maxCoeff() / 15.0;
    if (error <= options.magnus_tolerance || 2 * steps >= 1 << 14) {
      out.phi = (16.0 * fine - coarse) / 15.0;
      return out;
    }
    coarse = fine;
    steps *= 2;
  }
}

} // namespace

Eigen::MatrixXcd monodromy(const Superoperator& L, double f_MHz,
                           const PropagateOptions& options) {
  if (!(f_MHz > 0.0)) throw ValidationError("monodromy needs f > 0");
  if (L.dimension() <= kDenseLimit)
    return dense_monodromy(L, f_MHz, options, 16).phi;

  GeneratorEval rhs(L);
  rhs.set_frequency(f_MHz);
  const double period = 1.0 / f_MHz;
  const int dim = L.dimension();
  rhs.set_columns(dim);
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(dim, dim);
  Eigen::VectorXcd u = Eigen::Map<Eigen::VectorXcd>(U.data(), dim * dim);
  const double dt0 = std::min(period, 0.1 / rhs.norm_estimate());
  integrate(rhs, u, 0.0, period, options, dt0);
  return Eigen::Map<Eigen::MatrixXcd>(u.data(), dim, dim);
}

PeriodicSteadyState period_map_steady_state(const Superoperator& L,
                                            double f_MHz, int samples,
                                            const PropagateOptions& options) {
  const double f = f_MHz > 0.0 ? f_MHz : L.frequency_MHz;
  if (!(f > 0.0)) throw ValidationError("period map needs a positive frequency");
  if (samples < 32) throw ValidationError("need at least 32 phase samples");
  const int n = L.n;
  const bool dense = L.dimension() <= kDenseLimit;

  DenseMonodromy dm;
  Eigen::MatrixXcd phi;
  if (dense) {
    dm = dense_monodromy(L, f, options, samples / 2);
    phi = dm.phi;
  } else {
    phi = monodromy(L, f, options);
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(phi);
  if (es.info() != Eigen::Success)
    throw SolverError("eigendecomposition of the monodromy map failed");

  PeriodicSteadyState out;
  out.eigenvalues = es.eigenvalues();
  out.period_us = 1.0 / f;

  std::vector<double> moduli(out.eigenvalues.size());
  for (int i = 0; i < out.eigenvalues.size(); ++i)
    moduli[i] = std::abs(out.eigenvalues(i));
  std::sort(moduli.rbegin(), moduli.rend());
  if (moduli.size() > 1 && moduli[0] - moduli[1] < 1e-6) {
    std::ostringstream msg;
    msg << "ambiguous periodic fixed point: leading eigenvalue moduli "
        << moduli[0] << " and " << moduli[1];
    throw SolverError(msg.str());
  }

  int best = 0;
  for (int i = 1; i < out.eigenvalues.size(); ++i)
    if (std::abs(out.eigenvalues(i) - 1.0) < std::abs(out.eigenvalues(best) - 1.0))
      best = i;
  out.rho = finalize(unvectorize(es.eigenvectors().col(best), n));
  out.rho.velocity = L.velocity;
  out.periodicity_residual = trace_norm(
      unvectorize(phi * vectorize(out.rho.rho), n) - out.rho.rho);

  Eigen::VectorXcd x = vectorize(out.rho.rho);
  const double dt_seg = out.period_us / samples;
  if (dense && static_cast<int>(dm.steps.size()) % samples == 0) {
    const int per_sample = static_cast<int>(dm.steps.size()) / samples;
    for (int k = 0; k < samples; ++k) {
      out.times_us.push_back(k * dt_seg);
      out.trajectory.push_back(unvectorize(x, n));
      for (int j = 0; j < per_sample; ++j) x = dm.steps[k * per_sample + j] * x;
    }
  } else {
    GeneratorEval rhs(L);
    rhs.set_frequency(f);
    double dt = std::min(dt_seg, 0.1 / rhs.norm_estimate());
    for (int k = 0; k < samples; ++k) {
      out.times_us.push_back(k * dt_seg);
      out.trajectory.push_back(unvectorize(x, n));
      integrate(rhs, x, k * dt_seg, (k + 1) * dt_seg, options, dt);
    }
  }
  out.rho.check_invariants();
  return out;
}

namespace {

AbsorptionSample absorption_impl(
    const Hamiltonian& H,
    const std::vector<std::pair<double, const Eigen::MatrixXcd*>>& samples) {
  AbsorptionSample out;
  std::map<std::pair<int, int>, double> per_component;
  const double w = units::angular(H.frequency_MHz);
  const double norm = 1.0 / static_cast<double>(samples.size());

  for (const auto& term : H.couplings) {
    double rate = 0.0;
    for (const auto& [t, rho] : samples) {
      const Complex h = term.harmonic == 0
                            ? term.value
                            : term.value * std::exp(kI * (term.harmonic * w * t));
      rate += 2.0 * (h * (*rho)(term.ground, term.excited)).imag();
    }
    per_component[{static_cast<int>(term.laser), term.component}] += rate * norm;
  }

  for (const auto& [key, rate] : per_component) {
    const Laser laser = static_cast<Laser>(key.first);
    const int li = laser == Laser::Laser1 ? 0 : 1;
    const double weight = H.rabi_weight[li];
    const double value = weight > 0.0 ? H.gamma * rate / weight : 0.0;
    out.components.push_back({laser, key.second, value});
    (li == 0 ? out.laser1 : out.laser2) += value;
  }
  return out;
}

void check_match(const DensityMatrix& rho, const Hamiltonian& H) {
  if (rho.size() != H.n)
    throw ValidationError("density matrix and Hamiltonian dimensions differ");
  if (rho.velocity != H.velocity)
    throw ValidationError("density matrix velocity class does not match the "
                          "Hamiltonian frame");
}

} // namespace

AbsorptionSample absorption(const DensityMatrix& rho, const Hamiltonian& H) {
  check_match(rho, H);
  if (!H.harmonics.empty())
    throw ValidationError("time-dependent Hamiltonian needs a periodic state");
  return absorption_impl(H, {{0.0, &rho.rho}});
}

AbsorptionSample absorption(const PeriodicSteadyState& state,
                            const Hamiltonian& H) {
  check_match(state.rho, H);
  std::vector<std::pair<double, const Eigen::MatrixXcd*>> samples;
  for (std::size_t k = 0; k < state.trajectory.size(); ++k)
    samples.emplace_back(state.times_us[k], &state.trajectory[k]);
  AbsorptionSample out = absorption_impl(H, samples);
  out.time_averaged = true;
  return out;
}

} // namespace eitnsim
