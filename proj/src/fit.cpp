#include "eprlab/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "eprlab/kernels.hpp"

namespace eprlab {

namespace {

constexpr int kNParams = 4;  // amplitude, background, center, blur
using Params = std::array<double, kNParams>;

// Model machinery around a fixed ideal curve and detector. The detector
// convolution never changes, so it is folded into the base curve once; each
// blur value costs one Gaussian convolution.
class PatternModel {
 public:
  PatternModel(const PatternCurve& ideal, const Aperture& detector)
      : base_(ideal) {
    ideal.validate();
    const std::vector<double> dk =
        detector_intensity_kernel(detector, ideal.dx());
    if (dk.size() > 1) {
      std::vector<double> tmp(base_.values.size());
      kernels::convolve_same(base_.values.data(), base_.values.size(),
                             dk.data(), dk.size(), tmp.data());
      base_.values.swap(tmp);
    }
  }

  // curve for |blur|, cached for the repeated evaluations of one iteration
  const PatternCurve& curve(double blur) {
    const double b = std::abs(blur);
    if (!have_cached_ || cached_blur_ != b) {
      cached_ = base_;
      const std::vector<double> gk = gaussian_kernel(base_.dx(), b);
      if (gk.size() > 1) {
        std::vector<double> tmp(cached_.values.size());
        kernels::convolve_same(base_.values.data(), base_.values.size(),
                               gk.data(), gk.size(), tmp.data());
        cached_.values.swap(tmp);
      }
      cached_blur_ = b;
      have_cached_ = true;
    }
    return cached_;
  }

  double max_blur() const {
    return (base_.max_position() - base_.min_position()) / 12.0;
  }

 private:
  PatternCurve base_;
  PatternCurve cached_;
  double cached_blur_ = -1.0;
  bool have_cached_ = false;
};

struct Problem {
  const std::vector<double>* x;
  const std::vector<double>* y;
  std::vector<double> sqrt_w;
  PatternModel* model;

  void residuals(const Params& p, std::vector<double>& r) {
    const PatternCurve& c = model->curve(p[3]);
    const std::size_t n = x->size();
    r.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double m = p[1] + p[0] * c.value_at((*x)[i] - p[2]);
      r[i] = ((*y)[i] - m) * sqrt_w[i];
    }
  }

  double cost(const Params& p, std::vector<double>& scratch) {
    residuals(p, scratch);
    return kernels::dot(scratch.data(), scratch.data(), scratch.size());
  }
};

// central finite differences, steps scaled to the parameter magnitudes
Params diff_steps(const Params& p, double span, double dx) {
  constexpr double kRel = 6e-6;  // ~cbrt(eps)
  return {kRel * std::max(std::abs(p[0]), 1.0),
          kRel * std::max(std::abs(p[1]), 1.0),
          std::max(kRel * span, 0.05 * dx),
          std::max(kRel * span, 0.05 * dx)};
}

// solve (4x4) A x = b by Gauss elimination with partial pivoting
bool solve4(std::array<std::array<double, kNParams>, kNParams> a,
            std::array<double, kNParams> b, std::array<double, kNParams>& out) {
  std::array<int, kNParams> idx{0, 1, 2, 3};
  for (int col = 0; col < kNParams; ++col) {
    int pivot = col;
    for (int r = col + 1; r < kNParams; ++r)
      if (std::abs(a[idx[r]][col]) > std::abs(a[idx[pivot]][col])) pivot = r;
    std::swap(idx[col], idx[pivot]);
    const double diag = a[idx[col]][col];
    if (!std::isfinite(diag) || std::abs(diag) < 1e-300) return false;
    for (int r = col + 1; r < kNParams; ++r) {
      const double f = a[idx[r]][col] / diag;
      for (int c = col; c < kNParams; ++c) a[idx[r]][c] -= f * a[idx[col]][c];
      b[idx[r]] -= f * b[idx[col]];
    }
  }
  for (int col = kNParams - 1; col >= 0; --col) {
    double acc = b[idx[col]];
    for (int c = col + 1; c < kNParams; ++c) acc -= a[idx[col]][c] * out[c];
    out[col] = acc / a[idx[col]][col];
    if (!std::isfinite(out[col])) return false;
  }
  return true;
}

// invert a symmetric positive 4x4; false on numerical singularity
bool invert4(const std::array<std::array<double, kNParams>, kNParams>& a,
             std::array<std::array<double, kNParams>, kNParams>& inv) {
  for (int col = 0; col < kNParams; ++col) {
    std::array<double, kNParams> e{};
    e[col] = 1.0;
    std::array<double, kNParams> x{};
    if (!solve4(a, e, x)) return false;
    for (int r = 0; r < kNParams; ++r) inv[r][col] = x[r];
  }
  return true;
}

void jacobian(Problem& prob, const Params& p, const Params& h,
              std::vector<std::vector<double>>& jt) {
  std::vector<double> rp, rm;
  for (int k = 0; k < kNParams; ++k) {
    Params pp = p, pm = p;
    pp[k] += h[k];
    pm[k] -= h[k];
    prob.residuals(pp, rp);
    prob.residuals(pm, rm);
    jt[k].resize(rp.size());
    const double inv = 1.0 / (2.0 * h[k]);
    for (std::size_t i = 0; i < rp.size(); ++i)
      jt[k][i] = (rp[i] - rm[i]) * inv;  // d r_i / d theta_k
  }
}

FitResult finish(Problem& prob, Params p, int iterations, bool converged,
                 const char* method, double span, double dx) {
  p[3] = std::abs(p[3]);
  FitResult result;
  result.amplitude = p[0];
  result.background = p[1];
  result.center_mm = p[2];
  result.blur_sigma_mm = p[3];
  result.iterations = iterations;
  result.converged = converged;
  result.method = method;

  std::vector<double> r;
  prob.residuals(p, r);
  const double cost = kernels::dot(r.data(), r.data(), r.size());
  const int dof = static_cast<int>(r.size()) - kNParams;
  result.chi2_per_dof = dof > 0 ? cost / dof : 0.0;

  std::vector<std::vector<double>> jt(kNParams);
  jacobian(prob, p, diff_steps(p, span, dx), jt);
  std::array<std::array<double, kNParams>, kNParams> h{};
  for (int a = 0; a < kNParams; ++a)
    for (int b = a; b < kNParams; ++b)
      h[a][b] = h[b][a] =
          kernels::dot(jt[a].data(), jt[b].data(), jt[a].size());

  std::array<std::array<double, kNParams>, kNParams> cov{};
  if (invert4(h, cov) && cov[0][0] >= 0.0 && cov[1][1] >= 0.0 &&
      cov[2][2] >= 0.0 && cov[3][3] >= 0.0) {
    result.amplitude_err = std::sqrt(cov[0][0]);
    result.background_err = std::sqrt(cov[1][1]);
    result.center_err = std::sqrt(cov[2][2]);
    result.blur_sigma_err = std::sqrt(cov[3][3]);
  } else {
    result.blur_unbounded = true;
    result.converged = false;
  }
  return result;
}

Params initial_guess(const std::vector<double>& x, const std::vector<double>& y,
                     PatternModel& model, const FitOptions& options) {
  if (options.init) {
    return {options.init->amplitude, options.init->background,
            options.init->center_mm, options.init->blur_sigma_mm};
  }
  const std::size_t n = x.size();
  const double ymax = *std::max_element(y.begin(), y.end());
  const double ymin = *std::min_element(y.begin(), y.end());

  // background: median of the edge samples
  std::vector<double> edges;
  const std::size_t k = std::min<std::size_t>(4, n / 2);
  for (std::size_t i = 0; i < k; ++i) {
    edges.push_back(y[i]);
    edges.push_back(y[n - 1 - i]);
  }
  std::nth_element(edges.begin(), edges.begin() + edges.size() / 2,
                   edges.end());
  const double background = edges[edges.size() / 2];

  // center: centroid of the background-subtracted signal
  double wsum = 0.0, xsum = 0.0, x2sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::max(0.0, y[i] - background);
    wsum += w;
    xsum += w * x[i];
    x2sum += w * x[i] * x[i];
  }
  double center = 0.0, var_data = 0.0;
  if (wsum > 0.0) {
    center = xsum / wsum;
    var_data = std::max(0.0, x2sum / wsum - center * center);
  }

  // blur: second-moment mismatch against the unblurred model curve
  const PatternCurve& base = model.curve(0.0);
  double bw = 0.0, bx = 0.0, bx2 = 0.0;
  for (std::size_t i = 0; i < base.values.size(); ++i) {
    bw += base.values[i];
    bx += base.values[i] * base.positions[i];
    bx2 += base.values[i] * base.positions[i] * base.positions[i];
  }
  const double bc = bx / bw;
  const double var_base = std::max(0.0, bx2 / bw - bc * bc);
  const double dx = base.dx();
  const double blur =
      std::sqrt(std::max(var_data - var_base, 4.0 * dx * dx));

  return {ymax - ymin, background, center,
          std::min(blur, model.max_blur() * 0.5)};
}

FitResult nelder_mead(Problem& prob, const Params& start, double span,
                      double dx, const FitOptions& options, int used_iters);

FitResult fit_core(const std::vector<double>& x, const std::vector<double>& y,
                   const PatternCurve& ideal, const Aperture& detector,
                   const FitOptions& options) {
  if (x.size() != y.size())
    throw std::invalid_argument("positions/data size mismatch");
  if (x.size() < 8)
    throw std::invalid_argument("fit needs at least 8 scan points");
  for (double xi : x)
    if (xi < ideal.min_position() || xi > ideal.max_position())
      throw std::invalid_argument("scan position outside the model curve");

  PatternModel model(ideal, detector);
  Problem prob;
  prob.x = &x;
  prob.y = &y;
  prob.model = &model;
  prob.sqrt_w.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    prob.sqrt_w[i] = 1.0 / std::sqrt(std::max(y[i], 1.0));

  const double span = x.back() - x.front();
  const double dx = ideal.dx();
  const double max_blur = model.max_blur();

  Params p = initial_guess(x, y, model, options);
  p[3] = std::min(std::abs(p[3]), max_blur);

  std::vector<double> r, scratch;
  double cost = prob.cost(p, r);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  int stalls = 0;
  std::vector<std::vector<double>> jt(kNParams);

  for (; iter < options.max_iterations; ++iter) {
    jacobian(prob, p, diff_steps(p, span, dx), jt);
    prob.residuals(p, r);

    std::array<std::array<double, kNParams>, kNParams> h{};
    std::array<double, kNParams> g{};
    bool finite = true;
    for (int a = 0; a < kNParams; ++a) {
      g[a] = kernels::dot(jt[a].data(), r.data(), r.size());
      for (int b = a; b < kNParams; ++b)
        h[a][b] = h[b][a] =
            kernels::dot(jt[a].data(), jt[b].data(), jt[a].size());
      if (!std::isfinite(g[a]) || !std::isfinite(h[a][a])) finite = false;
    }
    if (!finite) return nelder_mead(prob, p, span, dx, options, iter);

    bool accepted = false;
    double best_rejected = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < 24 && !accepted; ++attempt) {
      auto damped = h;
      for (int d = 0; d < kNParams; ++d)
        damped[d][d] += lambda * std::max(h[d][d], 1e-12);
      std::array<double, kNParams> delta{};
      if (!solve4(damped, g, delta)) {
        if (iter == 0) return nelder_mead(prob, p, span, dx, options, iter);
        lambda = std::min(lambda * 5.0, 1e12);
        continue;
      }
      Params trial = p;
      for (int d = 0; d < kNParams; ++d) trial[d] -= delta[d];
      trial[3] = std::min(std::abs(trial[3]), max_blur);
      const double trial_cost = prob.cost(trial, scratch);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double drop = cost - trial_cost;
        p = trial;
        accepted = true;
        lambda = std::max(lambda / 3.0, 1e-12);
        if (drop <= options.tolerance * std::max(cost, 1e-30)) converged = true;
        cost = trial_cost;
      } else {
        best_rejected = std::min(best_rejected, trial_cost);
        lambda = std::min(lambda * 5.0, 1e12);
      }
    }
    if (converged) {
      ++iter;
      break;
    }
    if (!accepted &&
        best_rejected <= cost * (1.0 + options.tolerance) + 1e-30) {
      // steps only bounce within roundoff of the current cost: at the optimum
      converged = true;
      ++iter;
      break;
    }
    stalls = accepted ? 0 : stalls + 1;
    if (stalls >= 3) break;  // cannot improve at any damping
  }

  FitResult result = finish(prob, p, iter, converged, "gauss_newton", span, dx);
  if (!converged) result.converged = false;
  return result;
}

FitResult nelder_mead(Problem& prob, const Params& start, double span,
                      double dx, const FitOptions& options, int used_iters) {
  // deterministic init simplex, 10% steps with absolute floors
  std::array<Params, kNParams + 1> simplex;
  std::array<double, kNParams + 1> costs{};
  const Params step = {std::max(0.1 * std::abs(start[0]), 1.0),
                       std::max(0.1 * std::abs(start[1]), 1.0),
                       std::max(0.1 * span, dx), std::max(0.1 * span, dx)};
  std::vector<double> scratch;
  simplex[0] = start;
  costs[0] = prob.cost(start, scratch);
  for (int k = 0; k < kNParams; ++k) {
    simplex[k + 1] = start;
    simplex[k + 1][k] += step[k];
    costs[k + 1] = prob.cost(simplex[k + 1], scratch);
  }

  const int budget = std::max(200, options.max_iterations * 4);
  for (int it = 0; it < budget; ++it) {
    std::array<int, kNParams + 1> order{0, 1, 2, 3, 4};
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return costs[a] < costs[b]; });
    const int best = order[0], worst = order[kNParams];
    if (costs[worst] - costs[best] <=
        1e-12 * std::max(std::abs(costs[best]), 1e-30))
      break;

    Params centroid{};
    for (int k = 0; k <= kNParams; ++k) {
      if (k == worst) continue;
      for (int d = 0; d < kNParams; ++d) centroid[d] += simplex[k][d];
    }
    for (int d = 0; d < kNParams; ++d) centroid[d] /= kNParams;

    auto blend = [&](double f) {
      Params q;
      for (int d = 0; d < kNParams; ++d)
        q[d] = centroid[d] + f * (simplex[worst][d] - centroid[d]);
      return q;
    };
    const Params refl = blend(-1.0);
    const double refl_cost = prob.cost(refl, scratch);
    if (refl_cost < costs[best]) {
      const Params expand = blend(-2.0);
      const double expand_cost = prob.cost(expand, scratch);
      if (expand_cost < refl_cost) {
        simplex[worst] = expand;
        costs[worst] = expand_cost;
      } else {
        simplex[worst] = refl;
        costs[worst] = refl_cost;
      }
    } else if (refl_cost < costs[order[kNParams - 1]]) {
      simplex[worst] = refl;
      costs[worst] = refl_cost;
    } else {
      const Params contract = blend(0.5);
      const double contract_cost = prob.cost(contract, scratch);
      if (contract_cost < costs[worst]) {
        simplex[worst] = contract;
        costs[worst] = contract_cost;
      } else {
        for (int k = 0; k <= kNParams; ++k) {
          if (k == best) continue;
          for (int d = 0; d < kNParams; ++d)
            simplex[k][d] = 0.5 * (simplex[k][d] + simplex[best][d]);
          costs[k] = prob.cost(simplex[k], scratch);
        }
      }
    }
  }

  int best = 0;
  for (int k = 1; k <= kNParams; ++k)
    if (costs[k] < costs[best]) best = k;
  return finish(prob, simplex[best], used_iters, false, "simplex", span, dx);
}

}  // namespace

FitResult fit_pattern(const CoincidenceScan& scan, const PatternCurve& ideal,
                      const Aperture& detector, const FitOptions& options) {
  scan.validate();
  std::vector<double> y(scan.counts.begin(), scan.counts.end());
  return fit_core(scan.positions, y, ideal, detector, options);
}

FitResult fit_pattern_values(const std::vector<double>& positions,
                             const std::vector<double>& y,
                             const PatternCurve& ideal,
                             const Aperture& detector,
                             const FitOptions& options) {
  return fit_core(positions, y, ideal, detector, options);
}

ExtractedVariances extract_variances(const FitResult& image_fit,
                                     const FitResult& interference_fit,
                                     const OpticsConfig& optics,
                                     const DetectorWidths& widths) {
  if (!image_fit.converged || !interference_fit.converged)
    throw std::invalid_argument(
        "extract_variances needs converged fits for both arms");
  optics.validate();
  if (widths.image_slit_mm < 0.0 || widths.interference_fiber_waist_mm < 0.0)
    throw std::invalid_argument("detector widths must be >= 0");

  ExtractedVariances out;
  const double m = optics.magnification_imaging_arm;
  const double res_img = widths.image_slit_mm / std::sqrt(12.0);
  const double raw_x = image_fit.blur_sigma_mm * image_fit.blur_sigma_mm -
                       res_img * res_img;
  out.clamped_x = raw_x < 0.0;
  out.measurement.var_x_minus = std::max(0.0, raw_x) / (m * m);
  out.measurement.err_x =
      2.0 * image_fit.blur_sigma_mm * image_fit.blur_sigma_err / (m * m);

  const double lambda_mm = optics.lambda_nm * 1e-6;
  const double to_freq = 2.0 * std::numbers::pi / (lambda_mm * optics.f2_mm);
  const double res_fib = 0.5 * widths.interference_fiber_waist_mm;
  const double raw_p =
      interference_fit.blur_sigma_mm * interference_fit.blur_sigma_mm -
      res_fib * res_fib;
  out.clamped_p = raw_p < 0.0;
  out.measurement.var_p_plus = to_freq * to_freq * std::max(0.0, raw_p);
  out.measurement.err_p = to_freq * to_freq * 2.0 *
                          interference_fit.blur_sigma_mm *
                          interference_fit.blur_sigma_err;
  return out;
}

}  // namespace eprlab
