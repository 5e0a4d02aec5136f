// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "creepfit/common.hpp"

namespace creepfit {

// Stress and strain live in 6-component Voigt vectors ordered
// (xx, yy, zz, yz, zx, xy). Shear strain components are tensor strains,
// not engineering strains; convert with a factor of 2 at I/O boundaries.
template <typename Scalar>
using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar>
using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;

using Vec6 = Vector6<double>;
using Mat6 = Matrix6<double>;

/// One Voigt (spring + dashpot) branch of the transient-creep chain.
template <typename Scalar>
struct TransientBranchT {
  Scalar coeff;        // C_t, transient-creep coefficient
  Scalar exponent;     // m_t, transient-creep stress exponent
  Scalar retard_time;  // t_eps, retardation time constant (s)
};

/// Nonlinear Burgers material constants: Hookean spring, a power-law
/// steady dashpot, and one or more transient Voigt branches. Stress in GPa,
/// time in seconds; the creep coefficients are interpreted in that system.
template <typename Scalar>
struct MaterialParamsT {
  Scalar modulus = Scalar(1);   // E, Young's modulus (GPa)
  Scalar poisson = Scalar(0);   // nu
  Scalar steady_coeff = Scalar(0);  // C_s
  Scalar steady_exp = Scalar(0);    // m_s
  std::vector<TransientBranchT<Scalar>> branches;  // n >= 1

  static MaterialParamsT burgers(Scalar modulus, Scalar poisson, Scalar steady_coeff,
                                 Scalar steady_exp, Scalar transient_coeff,
                                 Scalar transient_exp, Scalar retard_time) {
    MaterialParamsT p;
    p.modulus = modulus;
    p.poisson = poisson;
    p.steady_coeff = steady_coeff;
    p.steady_exp = steady_exp;
    p.branches = {{transient_coeff, transient_exp, retard_time}};
    return p;
  }

  void validate() const {
    if (!(modulus > Scalar(0))) throw std::invalid_argument("modulus must be positive");
    if (!(poisson > Scalar(0) && poisson < Scalar(0.5)))
      throw std::invalid_argument("poisson ratio must lie in (0, 0.5)");
    if (!(steady_coeff >= Scalar(0)) || !(steady_exp >= Scalar(0)))
      throw std::invalid_argument("steady-creep constants must be nonnegative");
    if (branches.empty()) throw std::invalid_argument("at least one transient branch required");
    for (const auto& b : branches) {
      if (!(b.coeff >= Scalar(0)) || !(b.exponent >= Scalar(0)))
        throw std::invalid_argument("transient-creep constants must be nonnegative");
      if (!(b.retard_time > Scalar(0)))
        throw std::invalid_argument("retardation time must be positive");
    }
  }
};

/// Material point at one instant: stress plus the partitioned strain history.
template <typename Scalar>
struct MaterialStateT {
  Vector6<Scalar> stress = Vector6<Scalar>::Zero();
  Vector6<Scalar> elastic = Vector6<Scalar>::Zero();
  Vector6<Scalar> steady = Vector6<Scalar>::Zero();
  std::vector<Vector6<Scalar>> transient;  // one per branch
  Scalar time = Scalar(0);

  static MaterialStateT zero(const MaterialParamsT<Scalar>& params) {
    MaterialStateT s;
    s.transient.assign(params.branches.size(), Vector6<Scalar>::Zero());
    return s;
  }

  Vector6<Scalar> total_strain() const {
    Vector6<Scalar> sum = elastic + steady;
    for (const auto& t : transient) sum += t;
    return sum;
  }
};

template <typename Scalar>
struct StressInvariantsT {
  Vector6<Scalar> deviator;  // s_ij
  Scalar j2;                 // (1/2) s:s
};

using TransientBranch = TransientBranchT<double>;
using MaterialParams = MaterialParamsT<double>;
using MaterialState = MaterialStateT<double>;
using StressInvariants = StressInvariantsT<double>;

/// Deviatoric stress and its second invariant J2 = (1/2) s:s, with the shear
/// components counted twice in the Voigt contraction.
template <typename Scalar>
StressInvariantsT<Scalar> deviatoric_invariants(const Vector6<Scalar>& sigma) {
  if (!sigma.allFinite()) throw std::invalid_argument("stress vector has non-finite entries");
  const Scalar mean = (sigma[0] + sigma[1] + sigma[2]) / Scalar(3);
  Vector6<Scalar> dev = sigma;
  dev[0] -= mean;
  dev[1] -= mean;
  dev[2] -= mean;
  const Scalar j2 = Scalar(0.5) * (dev[0] * dev[0] + dev[1] * dev[1] + dev[2] * dev[2]) +
                    dev[3] * dev[3] + dev[4] * dev[4] + dev[5] * dev[5];
  return {dev, j2};
}

/// Hookean compliance in Voigt form with tensor shear strains: diagonal
/// 1/E and (1+nu)/E, normal-block off-diagonals -nu/E.
template <typename Scalar>
Matrix6<Scalar> elastic_compliance(Scalar modulus, Scalar poisson) {
  Matrix6<Scalar> c = Matrix6<Scalar>::Zero();
  const Scalar direct = Scalar(1) / modulus;
  const Scalar coupling = -poisson / modulus;
  const Scalar shear = (Scalar(1) + poisson) / modulus;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) c(i, j) = (i == j) ? direct : coupling;
    c(i + 3, i + 3) = shear;
  }
  return c;
}

template <typename Scalar>
struct CreepIncrementT {
  Vector6<Scalar> strain;      // stress-held (explicit) part of the increment
  Matrix6<Scalar> compliance;  // sensitivity to the stress increment
};

using CreepIncrement = CreepIncrementT<double>;

/// Steady-creep update over dt at frozen J2: the stress-held strain
/// dt*C_s*J2^m_s*s plus the tangent dt*C_s*J2^m_s*diag(1/3,1/3,1/3,1/2,1/2,1/2).
template <typename Scalar>
CreepIncrementT<Scalar> steady_creep_increment(const MaterialStateT<Scalar>& state,
                                               const MaterialParamsT<Scalar>& params,
                                               Scalar dt) {
  if (!(dt > Scalar(0))) throw std::invalid_argument("dt must be positive");
  const auto inv = deviatoric_invariants(state.stress);
  const Scalar rate = params.steady_coeff * std::pow(inv.j2, params.steady_exp);
  CreepIncrementT<Scalar> out;
  out.strain = dt * rate * inv.deviator;
  out.compliance = Matrix6<Scalar>::Zero();
  for (int i = 0; i < 3; ++i) {
    out.compliance(i, i) = dt * rate / Scalar(3);
    out.compliance(i + 3, i + 3) = dt * rate / Scalar(2);
  }
  return out;
}

namespace detail {

/// Explicit part and tangent of one transient branch.
template <typename Scalar>
CreepIncrementT<Scalar> transient_branch_increment(const MaterialStateT<Scalar>& state,
                                                   const MaterialParamsT<Scalar>& params,
                                                   std::size_t branch, Scalar dt) {
  const auto& b = params.branches[branch];
  const auto inv = deviatoric_invariants(state.stress);
  const Scalar rate = b.coeff * std::pow(inv.j2, b.exponent);
  const Scalar denom = Scalar(2) * b.retard_time + dt;
  CreepIncrementT<Scalar> out;
  out.strain = (Scalar(2) * dt * rate * inv.deviator - Scalar(2) * dt * state.transient[branch]) / denom;
  out.compliance = Matrix6<Scalar>::Zero();
  const Scalar factor = dt * rate / denom;
  for (int i = 0; i < 3; ++i) {
    out.compliance(i, i) = factor * Scalar(2) / Scalar(3);
    out.compliance(i + 3, i + 3) = factor;
  }
  return out;
}

}  // namespace detail

/// Transient-creep update over dt, summed over all Voigt branches.
template <typename Scalar>
CreepIncrementT<Scalar> transient_creep_increment(const MaterialStateT<Scalar>& state,
                                                  const MaterialParamsT<Scalar>& params,
                                                  Scalar dt) {
  if (!(dt > Scalar(0))) throw std::invalid_argument("dt must be positive");
  CreepIncrementT<Scalar> out;
  out.strain = Vector6<Scalar>::Zero();
  out.compliance = Matrix6<Scalar>::Zero();
  for (std::size_t k = 0; k < params.branches.size(); ++k) {
    const auto part = detail::transient_branch_increment(state, params, k, dt);
    out.strain += part.strain;
    out.compliance += part.compliance;
  }
  return out;
}

template <typename Scalar>
struct TangentT {
  Matrix6<Scalar> compliance;
  Matrix6<Scalar> stiffness;
};

using Tangent = TangentT<double>;

/// Total incremental compliance (elastic + steady + transient) and its
/// inverse, the tangent stiffness. Both are symmetric positive definite for
/// valid parameters.
template <typename Scalar>
TangentT<Scalar> assemble_tangent(const MaterialStateT<Scalar>& state,
                                  const MaterialParamsT<Scalar>& params, Scalar dt) {
  TangentT<Scalar> out;
  out.compliance = elastic_compliance(params.modulus, params.poisson) +
                   steady_creep_increment(state, params, dt).compliance +
                   transient_creep_increment(state, params, dt).compliance;
  Eigen::FullPivLU<Matrix6<Scalar>> lu(out.compliance);
  if (!lu.isInvertible()) throw numerical_error("singular incremental compliance matrix");
  out.stiffness = lu.inverse();
  return out;
}

/// Stress-held creep strain accumulated over dt, converted to an equivalent
/// stress increment through the tangent stiffness.
template <typename Scalar>
Vector6<Scalar> artificial_stress_increment(const MaterialStateT<Scalar>& state,
                                            const MaterialParamsT<Scalar>& params, Scalar dt) {
  const Vector6<Scalar> held = steady_creep_increment(state, params, dt).strain +
                               transient_creep_increment(state, params, dt).strain;
  return assemble_tangent(state, params, dt).stiffness * held;
}

/// Advance one central-difference step under a prescribed stress increment.
/// Every strain partition is updated with its own increment formula; creep
/// parts follow the deviatoric stress increment, so they stay traceless.
template <typename Scalar>
MaterialStateT<Scalar> step_stress_driven(const MaterialStateT<Scalar>& state,
                                          const MaterialParamsT<Scalar>& params,
                                          const Vector6<Scalar>& stress_increment, Scalar dt) {
  if (!(dt > Scalar(0))) throw std::invalid_argument("dt must be positive");
  if (state.transient.size() != params.branches.size())
    throw std::invalid_argument("state/parameter branch counts differ");

  const auto inv = deviatoric_invariants(state.stress);
  const Vector6<Scalar> dev_increment = deviatoric_invariants(stress_increment).deviator;

  MaterialStateT<Scalar> next = state;
  next.stress += stress_increment;
  next.time += dt;
  next.elastic += elastic_compliance(params.modulus, params.poisson) * stress_increment;

  const Scalar steady_rate = params.steady_coeff * std::pow(inv.j2, params.steady_exp);
  next.steady += dt * steady_rate * (inv.deviator + Scalar(0.5) * dev_increment);

  for (std::size_t k = 0; k < params.branches.size(); ++k) {
    const auto& b = params.branches[k];
    const Scalar rate = b.coeff * std::pow(inv.j2, b.exponent);
    const Scalar denom = Scalar(2) * b.retard_time + dt;
    next.transient[k] += (Scalar(2) * dt * rate * inv.deviator -
                          Scalar(2) * dt * state.transient[k] + dt * rate * dev_increment) /
                         denom;
  }

  if (!next.stress.allFinite() || !next.total_strain().allFinite())
    throw numerical_error("stress-driven step produced non-finite state");
  return next;
}

/// Linear spring-dashpot constants for the Kelvin-Voigt and Maxwell models.
template <typename Scalar>
struct LinearViscoParamsT {
  Scalar modulus;    // E
  Scalar viscosity;  // eta

  void validate() const {
    if (!(modulus > Scalar(0)) || !(viscosity > Scalar(0)))
      throw std::invalid_argument("modulus and viscosity must be positive");
  }
};

using LinearViscoParams = LinearViscoParamsT<double>;

/// Kelvin-Voigt creep under constant stress: eps = (sigma0/E)(1 - exp(-E t / eta)).
template <typename Scalar>
Scalar kelvin_voigt_creep(const LinearViscoParamsT<Scalar>& p, Scalar sigma0, Scalar t) {
  return sigma0 / p.modulus * (Scalar(1) - std::exp(-p.modulus * t / p.viscosity));
}

/// Maxwell stress relaxation under constant strain: sigma = sigma0 exp(-E t / eta).
template <typename Scalar>
Scalar maxwell_relaxation(const LinearViscoParamsT<Scalar>& p, Scalar sigma0, Scalar t) {
  return sigma0 * std::exp(-p.modulus * t / p.viscosity);
}

template <typename Scalar>
struct PronySeriesT {
  Scalar instantaneous;  // E_0
  std::vector<std::pair<Scalar, Scalar>> terms;  // (p_i, tau_i)

  void validate() const {
    if (!(instantaneous > Scalar(0))) throw std::invalid_argument("E0 must be positive");
    Scalar sum = Scalar(0);
    for (const auto& [p, tau] : terms) {
      if (!(tau > Scalar(0))) throw std::invalid_argument("Prony time constants must be positive");
      sum += p;
    }
    if (sum < Scalar(0) || sum > Scalar(1))
      throw std::invalid_argument("Prony weights must sum to [0, 1]");
  }
};

using PronySeries = PronySeriesT<double>;

/// Generalized-Maxwell relaxation modulus Y(t) = E0 (1 - sum p_i (1 - exp(-t/tau_i))).
template <typename Scalar>
Scalar prony_relaxation(const PronySeriesT<Scalar>& series, Scalar t) {
  Scalar decay = Scalar(0);
  for (const auto& [p, tau] : series.terms) decay += p * (Scalar(1) - std::exp(-t / tau));
  return series.instantaneous * (Scalar(1) - decay);
}

}  // namespace creepfit
