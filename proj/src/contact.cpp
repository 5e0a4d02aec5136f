// SPDX-License-Identifier: Apache-2.0

#include "creepfit/contact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace creepfit {

namespace {

constexpr double kPi = 3.14159265358979323846;

double lerp(double a, double b, double f) { return a + (b - a) * f; }

/// Piecewise-linear interpolation of y(x) over an index range of strictly
/// monotone x (either direction). Clamped outside the range.
double interp_monotone(const Eigen::VectorXd& x, const Eigen::VectorXd& y, Eigen::Index lo,
                       Eigen::Index hi, double xq) {
  const bool increasing = x[hi] >= x[lo];
  Eigen::Index a = lo;
  Eigen::Index b = hi;
  const double first = x[lo];
  const double last = x[hi];
  if (increasing ? (xq <= first) : (xq >= first)) return y[lo];
  if (increasing ? (xq >= last) : (xq <= last)) return y[hi];
  while (b - a > 1) {
    const Eigen::Index mid = (a + b) / 2;
    if (increasing ? (x[mid] <= xq) : (x[mid] >= xq))
      a = mid;
    else
      b = mid;
  }
  const double span = x[b] - x[a];
  if (span == 0.0) return y[a];
  return lerp(y[a], y[b], (xq - x[a]) / span);
}

struct LineFit {
  double slope;
  double intercept;
};

LineFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(x.size());
  const double mx = x.mean();
  const double my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  if (sxx <= 0.0) throw numerical_error("degenerate abscissa in line fit");
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  (void)n;
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace

void LoadSchedule::validate() const {
  if (!(peak_load > 0.0)) throw std::invalid_argument("peak load must be positive");
  if (!(load_time > 0.0) || !(unload_time > 0.0))
    throw std::invalid_argument("load and unload times must be positive");
  if (hold_time < 0.0) throw std::invalid_argument("hold time must be nonnegative");
  if (profile == LoadProfile::triangular && hold_time != 0.0)
    throw std::invalid_argument("triangular profile has no hold segment");
  if (sample_count < 3) throw std::invalid_argument("at least three samples required");
}

double LoadSchedule::load_at(double t) const {
  if (t <= 0.0) return 0.0;
  if (t < load_time) return peak_load * t / load_time;
  if (t <= load_time + hold_time) return peak_load;
  const double remaining = duration() - t;
  return remaining <= 0.0 ? 0.0 : peak_load * remaining / unload_time;
}

Eigen::VectorXd LoadSchedule::sample_times() const {
  return Eigen::VectorXd::LinSpaced(sample_count, 0.0, duration());
}

void LDCurve::validate() const {
  const Eigen::Index n = size();
  if (n < 2 || load.size() != n || depth.size() != n)
    throw std::invalid_argument("curve needs matching time/load/depth columns");
  if (time[0] != 0.0 && std::abs(time[0]) > 1e-12)
    throw std::invalid_argument("curve must start at t = 0");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(time[i] > time[i - 1])) throw std::invalid_argument("time must be strictly increasing");
  if ((load.array() < 0.0).any()) throw std::invalid_argument("negative load sample");
  if (load[0] != 0.0 || depth[0] != 0.0)
    throw std::invalid_argument("first sample must have zero load and depth");
}

Eigen::Index peak_index(const LDCurve& curve) {
  if (curve.size() == 0) throw std::invalid_argument("empty curve");
  const double peak = curve.load.maxCoeff();
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < curve.size(); ++i)
    if (curve.load[i] >= peak) idx = i;
  return idx;
}

double peak_depth(const LDCurve& curve) { return curve.depth[peak_index(curve)]; }

double residual_depth(const LDCurve& curve) {
  if (curve.size() == 0) throw std::invalid_argument("empty curve");
  return curve.depth[curve.size() - 1];
}

double contact_area(const AreaFunction& af, double contact_depth_nm) {
  if (!(contact_depth_nm > 0.0)) throw std::invalid_argument("contact depth must be positive");
  const double h = contact_depth_nm;
  const double area = af.c0 * h * h + af.c1 * h + af.c2 * std::sqrt(h) + af.c3 * std::pow(h, 0.25);
  if (!(area > 0.0))
    throw numerical_error("area function is not positive at h_c = " + std::to_string(h));
  return area;
}

double contact_depth(double max_depth, double peak_load, double stiffness, double eps_geom) {
  if (!(stiffness > 0.0) || !(max_depth > 0.0))
    throw std::invalid_argument("stiffness and max depth must be positive");
  const double hc = max_depth - eps_geom * peak_load / stiffness;
  if (!(hc > 0.0))
    throw numerical_error("contact depth not positive; unloading stiffness fit is unusable");
  return hc;
}

double hardness(double peak_load_mN, double area_nm2) {
  if (!(area_nm2 > 0.0)) throw std::invalid_argument("contact area must be positive");
  return peak_load_mN / area_nm2 * kGPaPerMNPerNm2;
}

double reduced_modulus(double stiffness_mN_nm, double area_nm2, double beta) {
  if (!(stiffness_mN_nm > 0.0) || !(area_nm2 > 0.0))
    throw std::invalid_argument("stiffness and area must be positive");
  return (1.0 / beta) * (std::sqrt(kPi) / 2.0) * stiffness_mN_nm / std::sqrt(area_nm2) *
         kGPaPerMNPerNm2;
}

double sample_modulus(double reduced, double indenter_modulus, double indenter_poisson,
                      double sample_poisson) {
  const bool rigid = !(indenter_modulus > 0.0) || std::isinf(indenter_modulus);
  const double indenter_compliance =
      rigid ? 0.0 : (1.0 - indenter_poisson * indenter_poisson) / indenter_modulus;
  const double denom = 1.0 / reduced - indenter_compliance;
  if (!(denom > 0.0))
    throw numerical_error("apparent compliance below indenter compliance; tip dominates");
  return (1.0 - sample_poisson * sample_poisson) / denom;
}

double ngan_corrected_stiffness(double stiffness, double depth_rate, double unload_rate) {
  if (!(unload_rate > 0.0)) throw std::invalid_argument("unload rate must be positive");
  const double inv = 1.0 / stiffness + depth_rate / unload_rate;
  if (!(inv > 0.0)) throw numerical_error("creep correction drives stiffness nonpositive");
  return 1.0 / inv;
}

double unloading_stiffness(const LDCurve& curve, double fit_fraction) {
  if (!(fit_fraction > 0.0 && fit_fraction <= 1.0))
    throw std::invalid_argument("fit fraction must lie in (0, 1]");
  const Eigen::Index start = peak_index(curve);
  const Eigen::Index n = curve.size();
  if (start >= n - 1) throw std::invalid_argument("curve has no unloading segment");

  const double h_peak = curve.depth[start];
  const double depth_tol = 1e-9 * std::max(1.0, std::abs(h_peak));
  for (Eigen::Index i = start + 1; i < n; ++i)
    if (curve.depth[i] > h_peak + depth_tol)
      throw numerical_error("nose detected: depth increases during unloading");

  const double p_peak = curve.load[start];
  const double p_end = curve.load[n - 1];
  const double threshold = p_end + (1.0 - fit_fraction) * (p_peak - p_end);
  std::vector<double> hs, ps;
  for (Eigen::Index i = start; i < n; ++i) {
    if (curve.load[i] + 1e-14 < threshold) break;
    if (curve.load[i] > 0.0) {
      hs.push_back(curve.depth[i]);
      ps.push_back(curve.load[i]);
    }
  }
  if (hs.size() < 3) throw std::invalid_argument("too few samples in the unloading fit window");

  const double h_min = *std::min_element(hs.begin(), hs.end());
  const double h_span = std::max(h_peak - h_min, 1e-9 * std::max(1.0, std::abs(h_peak)));

  // Log-linear residual of P = k (h - h_f)^m for a candidate final depth.
  Eigen::VectorXd log_p(hs.size());
  for (std::size_t i = 0; i < ps.size(); ++i) log_p[static_cast<Eigen::Index>(i)] = std::log(ps[i]);
  const auto residual = [&](double hf) {
    Eigen::VectorXd log_h(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const double d = hs[i] - hf;
      if (!(d > 0.0)) return std::numeric_limits<double>::max();
      log_h[static_cast<Eigen::Index>(i)] = std::log(d);
    }
    const LineFit fit = fit_line(log_h, log_p);
    return (log_p.array() - fit.slope * log_h.array() - fit.intercept).square().sum();
  };

  // Coarse scan below the window minimum, then golden-section refinement.
  const double lo = h_min - 10.0 * h_span;
  const double hi = h_min - 1e-9 * h_span;
  double best = lo;
  double best_res = residual(lo);
  constexpr int kScan = 96;
  for (int i = 1; i <= kScan; ++i) {
    const double hf = lerp(lo, hi, static_cast<double>(i) / kScan);
    const double r = residual(hf);
    if (r < best_res) {
      best_res = r;
      best = hf;
    }
  }
  double a = std::max(lo, best - (hi - lo) / kScan);
  double b = std::min(hi, best + (hi - lo) / kScan);
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - golden * (b - a);
  double x2 = a + golden * (b - a);
  double f1 = residual(x1);
  double f2 = residual(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - golden * (b - a);
      f1 = residual(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + golden * (b - a);
      f2 = residual(x2);
    }
  }
  const double hf = (a + b) / 2.0;

  Eigen::VectorXd log_h(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i)
    log_h[static_cast<Eigen::Index>(i)] = std::log(hs[i] - hf);
  const LineFit fit = fit_line(log_h, log_p);
  const double m = fit.slope;
  const double k = std::exp(fit.intercept);
  const double stiffness = k * m * std::pow(h_peak - hf, m - 1.0);
  if (!(stiffness > 0.0)) throw numerical_error("nose detected: fitted unloading slope not positive");
  return stiffness;
}

double hold_end_depth_rate(const LDCurve& curve) {
  // The hold is the plateau at peak load.
  const double p_max = curve.load.maxCoeff();
  Eigen::Index first = -1, last = -1;
  for (Eigen::Index i = 0; i < curve.size(); ++i)
    if (curve.load[i] >= p_max * (1.0 - 1e-9)) {
      if (first < 0) first = i;
      last = i;
    }
  if (first < 0 || last - first < 3 || !(curve.time[last] > curve.time[first]))
    throw std::invalid_argument("curve has no usable hold segment");
  const double t_mid = (curve.time[first] + curve.time[last]) / 2.0;
  std::vector<double> ts, hs;
  for (Eigen::Index i = first; i <= last; ++i)
    if (curve.time[i] >= t_mid) {
      ts.push_back(curve.time[i]);
      hs.push_back(curve.depth[i]);
    }
  if (ts.size() < 2) throw std::invalid_argument("too few samples in the hold segment");
  return fit_line(Eigen::Map<Eigen::VectorXd>(ts.data(), static_cast<Eigen::Index>(ts.size())),
                  Eigen::Map<Eigen::VectorXd>(hs.data(), static_cast<Eigen::Index>(hs.size())))
      .slope;
}

double initial_unload_rate(const LDCurve& curve) {
  const Eigen::Index start = peak_index(curve);
  const Eigen::Index n = curve.size();
  if (start >= n - 1) throw std::invalid_argument("curve has no unloading segment");
  const Eigen::Index count = std::max<Eigen::Index>(3, (n - start) / 5);
  const Eigen::Index end = std::min(n, start + count);
  const Eigen::VectorXd t = curve.time.segment(start, end - start);
  const Eigen::VectorXd p = curve.load.segment(start, end - start);
  return std::abs(fit_line(t, p).slope);
}

LDCurve sneddon_conical_curve(double sample_modulus_gpa, double sample_poisson,
                              double half_angle_deg, const LoadSchedule& schedule) {
  if (!(half_angle_deg > 0.0 && half_angle_deg < 90.0))
    throw std::invalid_argument("half angle must lie in (0, 90) degrees");
  schedule.validate();
  const double reduced = sample_modulus_gpa / (1.0 - sample_poisson * sample_poisson);
  const double tangent = std::tan(half_angle_deg * kPi / 180.0);
  const double coeff = 2.0 / kPi * reduced / kGPaPerMNPerNm2 * tangent;  // P = coeff h^2
  LDCurve curve;
  curve.time = schedule.sample_times();
  curve.load.resize(curve.time.size());
  curve.depth.resize(curve.time.size());
  for (Eigen::Index i = 0; i < curve.time.size(); ++i) {
    const double p = schedule.load_at(curve.time[i]);
    curve.load[i] = p;
    curve.depth[i] = std::sqrt(p / coeff);
  }
  return curve;
}

OliverPharrResult oliver_pharr(const LDCurve& curve, const AreaFunction& af,
                               const AnalysisOptions& options) {
  const Eigen::Index peak = peak_index(curve);
  const double p_max = curve.load[peak];
  const double h_max = curve.depth[peak];
  OliverPharrResult r;
  r.stiffness = unloading_stiffness(curve, options.fit_fraction);
  r.contact_depth = contact_depth(h_max, p_max, r.stiffness, options.eps_geom);
  r.area = contact_area(af, r.contact_depth);
  r.hardness = hardness(p_max, r.area);
  r.reduced_modulus = reduced_modulus(r.stiffness, r.area, options.beta);
  r.sample_modulus = sample_modulus(r.reduced_modulus, options.indenter_modulus,
                                    options.indenter_poisson, options.sample_poisson);
  return r;
}

ForwardConfig ForwardConfig::calibrated(double modulus, double poisson, double peak_load,
                                        double half_angle_deg) {
  if (!(modulus > 0.0)) throw std::invalid_argument("modulus must be positive");
  const double reduced = modulus / (1.0 - poisson * poisson);
  const double tangent = std::tan(half_angle_deg * kPi / 180.0);
  const double elastic_depth =
      std::sqrt(kPi * peak_load / (2.0 * reduced / kGPaPerMNPerNm2 * tangent));
  const double hc = 2.0 / kPi * elastic_depth;
  ForwardConfig cfg;
  cfg.half_angle_deg = half_angle_deg;
  cfg.rep_area = kPi * tangent * tangent * hc * hc;
  const double peak_stress = peak_load / cfg.rep_area * kGPaPerMNPerNm2;
  cfg.rep_length = elastic_depth * modulus / peak_stress;
  return cfg;
}

namespace {

/// Zero-allocation variant of step_stress_driven used inside the sampling loop.
void step_inplace(MaterialState& state, const MaterialParams& params, const Mat6& hooke,
                  double stress_rate, double dt) {
  const auto inv = deviatoric_invariants(state.stress);
  const double steady_rate = params.steady_coeff * std::pow(inv.j2, params.steady_exp);
  const double dsig = stress_rate * dt;
  // Uniaxial stress increment along xx; deviatoric part (2/3, -1/3, -1/3).
  Vec6 dev_inc = Vec6::Zero();
  dev_inc[0] = 2.0 / 3.0 * dsig;
  dev_inc[1] = -dsig / 3.0;
  dev_inc[2] = -dsig / 3.0;

  state.elastic += hooke.col(0) * dsig;
  state.steady += dt * steady_rate * (inv.deviator + 0.5 * dev_inc);
  for (std::size_t k = 0; k < params.branches.size(); ++k) {
    const auto& b = params.branches[k];
    const double rate = b.coeff * std::pow(inv.j2, b.exponent);
    const double denom = 2.0 * b.retard_time + dt;
    state.transient[k] +=
        (2.0 * dt * rate * inv.deviator - 2.0 * dt * state.transient[k] + dt * rate * dev_inc) /
        denom;
  }
  state.stress[0] += dsig;
  state.time += dt;
}

}  // namespace

LDCurve forward_indentation(const MaterialParams& params, const LoadSchedule& schedule,
                            const ForwardConfig& config) {
  params.validate();
  schedule.validate();
  if (!(config.rep_area > 0.0) || !(config.rep_length > 0.0))
    throw std::invalid_argument("forward config must carry positive representative scales");

  double max_step = config.max_step;
  if (max_step <= 0.0) {
    double t_min = params.branches.front().retard_time;
    for (const auto& b : params.branches) t_min = std::min(t_min, b.retard_time);
    max_step = t_min / 50.0;
  }

  const double stress_scale = kGPaPerMNPerNm2 / config.rep_area;  // GPa per mN
  const double elastic_strain = schedule.peak_load * stress_scale / params.modulus;
  const double strain_guard = 1e6 * elastic_strain;

  const Mat6 hooke = elastic_compliance(params.modulus, params.poisson);
  MaterialState state = MaterialState::zero(params);

  LDCurve curve;
  curve.time = schedule.sample_times();
  curve.load.resize(curve.time.size());
  curve.depth.resize(curve.time.size());
  curve.load[0] = 0.0;
  curve.depth[0] = 0.0;

  for (Eigen::Index i = 1; i < curve.time.size(); ++i) {
    const double t0 = curve.time[i - 1];
    const double t1 = curve.time[i];
    const int substeps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / max_step)));
    const double dt = (t1 - t0) / substeps;
    for (int s = 0; s < substeps; ++s) {
      const double ta = t0 + s * dt;
      const double tb = (s + 1 == substeps) ? t1 : ta + dt;
      const double rate =
          (schedule.load_at(tb) - schedule.load_at(ta)) * stress_scale / (tb - ta);
      step_inplace(state, params, hooke, rate, tb - ta);
    }
    const double strain = state.total_strain()[0];
    if (!std::isfinite(strain) || std::abs(strain) > strain_guard)
      throw numerical_error("forward model diverged at sample " + std::to_string(i));
    curve.load[i] = schedule.load_at(t1);
    curve.depth[i] = config.rep_length * strain;
  }
  return curve;
}

LDCurve resample_to_load_grid(const LDCurve& experiment, const LDCurve& reference) {
  experiment.validate();
  const Eigen::Index n = reference.size();
  const Eigen::Index ref_peak = peak_index(reference);
  const Eigen::Index exp_peak = peak_index(experiment);

  // First/last occurrence of the experimental peak bracket its hold segment.
  const double exp_max = experiment.load.maxCoeff();
  Eigen::Index exp_hold_start = exp_peak;
  for (Eigen::Index i = 0; i <= exp_peak; ++i)
    if (experiment.load[i] >= exp_max * (1.0 - 1e-9)) {
      exp_hold_start = i;
      break;
    }
  const double ref_max = reference.load.maxCoeff();
  Eigen::Index ref_hold_start = ref_peak;
  for (Eigen::Index i = 0; i <= ref_peak; ++i)
    if (reference.load[i] >= ref_max * (1.0 - 1e-9)) {
      ref_hold_start = i;
      break;
    }

  LDCurve out;
  out.time = reference.time;
  out.load = reference.load;
  out.depth.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i < ref_hold_start) {
      out.depth[i] = interp_monotone(experiment.load, experiment.depth, 0, exp_hold_start,
                                     reference.load[i]);
    } else if (i <= ref_peak) {
      const double ref_span = reference.time[ref_peak] - reference.time[ref_hold_start];
      const double f =
          ref_span > 0.0 ? (reference.time[i] - reference.time[ref_hold_start]) / ref_span : 1.0;
      const double t_exp =
          experiment.time[exp_hold_start] +
          f * (experiment.time[exp_peak] - experiment.time[exp_hold_start]);
      out.depth[i] =
          interp_monotone(experiment.time, experiment.depth, exp_hold_start, exp_peak, t_exp);
    } else {
      out.depth[i] = interp_monotone(experiment.load, experiment.depth, exp_peak,
                                     experiment.size() - 1, reference.load[i]);
    }
  }
  return out;
}

}  // namespace creepfit
