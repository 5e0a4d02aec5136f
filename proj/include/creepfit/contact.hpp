// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include "creepfit/constitutive.hpp"

namespace creepfit {

// Unit system: load in mN, depth in nm, time in s, moduli and hardness in
// GPa. A pressure of 1 mN/nm^2 equals 1e6 GPa.
inline constexpr double kGPaPerMNPerNm2 = 1.0e6;

enum class LoadProfile { triangular, trapezoidal };

/// Load-controlled schedule: ramp to the peak, optional hold, ramp to zero.
struct LoadSchedule {
  LoadProfile profile = LoadProfile::triangular;
  double peak_load = 1.0;    // mN
  double load_time = 30.0;   // s
  double hold_time = 0.0;    // s, zero for triangular
  double unload_time = 30.0; // s
  int sample_count = 100;

  void validate() const;
  double duration() const { return load_time + hold_time + unload_time; }
  double load_at(double t) const;
  Eigen::VectorXd sample_times() const;
};

/// One indentation record: (time, load, depth) samples with strictly
/// increasing time and a zero first sample.
struct LDCurve {
  Eigen::VectorXd time;   // s
  Eigen::VectorXd load;   // mN
  Eigen::VectorXd depth;  // nm

  Eigen::Index size() const { return time.size(); }
  void validate() const;
};

/// Index of the peak-load sample; ties resolve to the last occurrence so a
/// hold segment ends where unloading starts.
Eigen::Index peak_index(const LDCurve& curve);

double peak_depth(const LDCurve& curve);      // depth at peak load (nm)
double residual_depth(const LDCurve& curve);  // depth at the final sample (nm)

/// Tip area function A(h_c) = c0 h_c^2 + c1 h_c + c2 h_c^0.5 + c3 h_c^0.25.
/// The leading 24.5 is the perfectly sharp Berkovich value.
struct AreaFunction {
  double c0 = 24.5;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

double contact_area(const AreaFunction& af, double contact_depth_nm);  // nm^2

/// h_c = h_max - eps * P_max / S. Throws if the result is not positive.
double contact_depth(double max_depth, double peak_load, double stiffness, double eps_geom);

/// H = P / A, converted to GPa.
double hardness(double peak_load_mN, double area_nm2);

/// E_r = (1/beta) (sqrt(pi)/2) S / sqrt(A), in GPa.
double reduced_modulus(double stiffness_mN_nm, double area_nm2, double beta);

/// Sample modulus from the reduced modulus and the indenter constants.
/// A nonpositive or infinite indenter modulus selects a rigid indenter.
double sample_modulus(double reduced, double indenter_modulus, double indenter_poisson,
                      double sample_poisson);

/// Creep-rate correction of the contact stiffness:
/// 1/S_e = 1/S + (dh/dt at end of hold) / |dP/dt at start of unload|.
double ngan_corrected_stiffness(double stiffness, double depth_rate, double unload_rate);

/// Contact stiffness dP/dh at the onset of unloading, from a power-law fit
/// P = k (h - h_f)^m over the top `fit_fraction` of the unloading branch.
/// Throws numerical_error when the branch shows a nose.
double unloading_stiffness(const LDCurve& curve, double fit_fraction);

/// Depth rate dh/dt near the end of the hold segment (linear fit over the
/// trailing half of the load plateau). Requires a curve with a hold.
double hold_end_depth_rate(const LDCurve& curve);

/// |dP/dt| over the leading fifth of the unloading branch.
double initial_unload_rate(const LDCurve& curve);

/// Elastic Sneddon cone: P = (2/pi) E_r tan(psi) h^2 sampled on the schedule,
/// with a rigid indenter so E_r = E_s / (1 - nu_s^2). Loading and unloading
/// coincide.
LDCurve sneddon_conical_curve(double sample_modulus_gpa, double sample_poisson,
                              double half_angle_deg, const LoadSchedule& schedule);

struct AnalysisOptions {
  double eps_geom = 0.75;
  double beta = 1.034;
  double fit_fraction = 0.5;
  double indenter_modulus = 1141.0;  // GPa, diamond
  double indenter_poisson = 0.07;
  double sample_poisson = 0.3;
};

struct OliverPharrResult {
  double stiffness;        // mN/nm
  double contact_depth;    // nm
  double area;             // nm^2
  double hardness;         // GPa
  double reduced_modulus;  // GPa
  double sample_modulus;   // GPa
};

OliverPharrResult oliver_pharr(const LDCurve& curve, const AreaFunction& af,
                               const AnalysisOptions& options);

/// Reduced forward model: the constitutive integrator driven at a single
/// representative point. Uniaxial stress P(t)/A_rep, depth L_rep * eps_xx.
struct ForwardConfig {
  double rep_area = 0.0;        // nm^2
  double rep_length = 0.0;      // nm
  double half_angle_deg = 70.3; // equivalent cone half-angle
  double max_step = 0.0;        // s; 0 selects min retardation time / 50

  /// Scales chosen so the purely elastic response matches the Sneddon cone
  /// depth at the peak load; they are then frozen for a whole study.
  static ForwardConfig calibrated(double modulus, double poisson, double peak_load,
                                  double half_angle_deg = 70.3);
};

LDCurve forward_indentation(const MaterialParams& params, const LoadSchedule& schedule,
                            const ForwardConfig& config);

/// Map an experimental curve onto a reference curve's time/load grid.
/// Loading and unloading branches interpolate depth against load separately;
/// a hold segment interpolates against the hold time fraction.
LDCurve resample_to_load_grid(const LDCurve& experiment, const LDCurve& reference);

}  // namespace creepfit
