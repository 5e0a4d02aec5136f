// SPDX-License-Identifier: Apache-2.0

// Test-only reference solutions, independent of the integrator under test.

#pragma once

#include <cmath>
#include <functional>

#include "creepfit/constitutive.hpp"

namespace creepfit::oracle {

/// Closed-form axial strain under constant uniaxial stress sigma0 applied at
/// t = 0:
///   eps_xx(t) = sigma0/E
///            + C_s (sigma0^2/3)^m_s (2 sigma0/3) t
///            + sum_k C_t (sigma0^2/3)^m_t (2 sigma0/3) (1 - exp(-t/t_eps)).
inline double constant_stress_axial_strain(const MaterialParams& p, double sigma0, double t) {
  const double j2 = sigma0 * sigma0 / 3.0;
  const double dev = 2.0 * sigma0 / 3.0;
  double strain = sigma0 / p.modulus + p.steady_coeff * std::pow(j2, p.steady_exp) * dev * t;
  for (const auto& b : p.branches)
    strain += b.coeff * std::pow(j2, b.exponent) * dev * (1.0 - std::exp(-t / b.retard_time));
  return strain;
}

/// Lateral strain for the same history: elastic -nu sigma0/E plus minus one
/// half of each (incompressible) creep contribution.
inline double constant_stress_lateral_strain(const MaterialParams& p, double sigma0, double t) {
  const double creep = constant_stress_axial_strain(p, sigma0, t) - sigma0 / p.modulus;
  return -p.poisson * sigma0 / p.modulus - creep / 2.0;
}

/// State right after an instantaneous elastic load to uniaxial sigma0.
inline MaterialState preloaded_state(const MaterialParams& p, double sigma0) {
  MaterialState state = MaterialState::zero(p);
  state.stress[0] = sigma0;
  state.elastic = elastic_compliance(p.modulus, p.poisson) * state.stress;
  return state;
}

/// Fine-step RK4 reference for uniaxial stress histories. Integrates the
/// rate equations directly (no central differencing); the elastic part is
/// evaluated exactly from sigma(t).
inline double reference_axial_strain(const MaterialParams& p,
                                     const std::function<double(double)>& sigma, double t_end,
                                     double dt) {
  const auto steady_rate = [&](double s) {
    const double j2 = s * s / 3.0;
    return p.steady_coeff * std::pow(j2, p.steady_exp) * (2.0 * s / 3.0);
  };
  const std::size_t branches = p.branches.size();
  std::vector<double> transient(branches, 0.0);
  const auto branch_rate = [&](std::size_t k, double s, double eps_t) {
    const auto& b = p.branches[k];
    const double j2 = s * s / 3.0;
    return (b.coeff * std::pow(j2, b.exponent) * (2.0 * s / 3.0) - eps_t) / b.retard_time;
  };

  double steady = 0.0;
  const int steps = static_cast<int>(std::ceil(t_end / dt));
  const double h = t_end / steps;
  for (int i = 0; i < steps; ++i) {
    const double t0 = i * h;
    const double s0 = sigma(t0);
    const double s1 = sigma(t0 + h / 2.0);
    const double s2 = sigma(t0 + h);

    const double k1 = steady_rate(s0);
    const double k2 = steady_rate(s1);
    const double k4 = steady_rate(s2);
    steady += h / 6.0 * (k1 + 4.0 * k2 + k4);

    for (std::size_t k = 0; k < branches; ++k) {
      const double y = transient[k];
      const double r1 = branch_rate(k, s0, y);
      const double r2 = branch_rate(k, s1, y + h / 2.0 * r1);
      const double r3 = branch_rate(k, s1, y + h / 2.0 * r2);
      const double r4 = branch_rate(k, s2, y + h * r3);
      transient[k] = y + h / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
    }
  }
  double total = sigma(t_end) / p.modulus + steady;
  for (double eps_t : transient) total += eps_t;
  return total;
}

}  // namespace creepfit::oracle
