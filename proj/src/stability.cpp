#include "molldeconv/stability.hpp"

#include "molldeconv/error.hpp"
#include "molldeconv/phantoms.hpp"
#include "molldeconv/random.hpp"
#include "molldeconv/transform.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace molldeconv {

double masked_norm(const ComplexArray& values, const RegionMask& omega) {
  return std::sqrt(omega.membership().select(values.abs2(), 0.0).sum());
}

KappaProbe::KappaProbe(const Reconstructor& reconstructor, const SampledField& g, const SampledField& delta,
                       const RegionMask& omega)
    : reconstructor_(reconstructor),
      g_(g),
      g_hat_(forward_transform(g)),
      perturbed_hat_(forward_transform({g.grid(), g.values() + delta.values()})),
      real_(g.is_real() && delta.is_real()),
      omega_(omega),
      c1_(0.0) {
  if (!(g.grid() == reconstructor.grid()) || !(delta.grid() == g.grid()) || !(omega.grid() == g.grid()))
    throw InvalidArgument("kappa probe: data, noise, region and reconstructor must share one grid");
  if (omega.empty()) throw InvalidArgument("kappa probe: empty norm region");
  const double data = masked_norm(g.values(), omega);
  const double noise = masked_norm(delta.values(), omega);
  if (data == 0.0) throw InvalidArgument("kappa undefined: data vanish on the norm region");
  if (noise == 0.0) throw InvalidArgument("kappa undefined: the perturbation vanishes on the norm region");
  c1_ = noise / data;
}

KappaSample KappaProbe::evaluate(double alpha, const BetaField& beta) const {
  SampledField clean = reconstructor_.apply_spectrum(g_hat_, real_, alpha, beta);
  SampledField perturbed = reconstructor_.apply_spectrum(perturbed_hat_, real_, alpha, beta);
  const double base = masked_norm(clean.values(), omega_);
  if (base == 0.0) throw InvalidArgument("kappa undefined: the reconstruction vanishes on the norm region");
  const double c2 = masked_norm(perturbed.values() - clean.values(), omega_) / base;
  return {c1_, c2, c2 / c1_, std::move(clean), std::move(perturbed)};
}

StabilityReport estimate_kappa(const SampledField& g, const ReconstructionParams& params, double noise_sigma,
                               std::uint64_t seed, Index realizations, const RegionMask& omega) {
  const Reconstructor reconstructor(g.grid(), params.kernel, params.mollifier);
  return estimate_kappa(reconstructor, g, params.alpha, params.beta, noise_sigma, seed, realizations, omega);
}

StabilityReport estimate_kappa(const Reconstructor& reconstructor, const SampledField& g, double alpha,
                               const BetaField& beta, double noise_sigma, std::uint64_t seed, Index realizations,
                               const RegionMask& omega) {
  if (!(noise_sigma > 0.0)) throw InvalidArgument("noise sigma must be positive");
  if (realizations < 1) throw InvalidArgument("at least one noise realization is needed");
  StabilityReport report;
  report.seed = seed;
  report.realizations = realizations;
  for (Index r = 0; r < realizations; ++r) {
    const SampledField delta = gaussian_noise(g.grid(), noise_sigma, substream(seed, static_cast<std::uint64_t>(r)));
    const KappaSample sample = KappaProbe(reconstructor, g, delta, omega).evaluate(alpha, beta);
    report.c1 += sample.c1;
    report.c2 += sample.c2;
    report.kappas.push_back(sample.kappa);
  }
  report.c1 /= static_cast<double>(realizations);
  report.c2 /= static_cast<double>(realizations);
  report.kappa = report.c2 / report.c1;
  report.kappa_min = *std::min_element(report.kappas.begin(), report.kappas.end());
  report.kappa_max = *std::max_element(report.kappas.begin(), report.kappas.end());
  return report;
}

KappaSample estimate_kappa_with_noise(const SampledField& g, const SampledField& delta,
                                      const ReconstructionParams& params, const RegionMask& omega) {
  const Reconstructor reconstructor(g.grid(), params.kernel, params.mollifier);
  return KappaProbe(reconstructor, g, delta, omega).evaluate(params.alpha, params.beta);
}

NormEstimate operator_norm(const ReconstructionParams& params, const RegionMask& omega, double tol, Index max_iter,
                           std::uint64_t seed) {
  const Reconstructor reconstructor(omega.grid(), params.kernel, params.mollifier);
  return operator_norm(reconstructor, params.alpha, params.beta, omega, tol, max_iter, seed);
}

namespace {

// Thick-restart Lanczos: basis size and Ritz vectors kept across restarts.
constexpr Index kLanczosBasis = 32;
constexpr Index kLanczosKeep = 8;

}  // namespace

NormEstimate operator_norm(const Reconstructor& reconstructor, double alpha, const BetaField& beta,
                           const RegionMask& omega, double tol, Index max_iter, std::uint64_t seed) {
  if (!(tol > 0.0)) throw InvalidArgument("operator_norm tolerance must be positive");
  if (max_iter < 1) throw InvalidArgument("operator_norm needs at least one iteration");
  if (!(omega.grid() == reconstructor.grid())) throw InvalidArgument("operator_norm: region on another grid");
  if (omega.empty()) throw InvalidArgument("operator_norm: empty region");
  const Grid& grid = reconstructor.grid();
  const BoolArray& mask = omega.membership();
  const auto symbols = reconstructor.level_symbols(alpha, beta);
  const Complex zero(0.0, 0.0);

  // v -> M R^* M R M v
  auto normal = [&](const ComplexArray& v) {
    const ComplexArray w =
        mask.select(reconstructor.apply_levels(detail::forward_values(grid, v), symbols, beta), zero);
    return ComplexArray(mask.select(reconstructor.apply_adjoint_levels(w, symbols, beta), zero));
  };

  const Index dim = std::min(kLanczosBasis, omega.count());
  const Index keep = std::min(kLanczosKeep, dim - 1);

  Rng rng(seed);
  ComplexArray start(grid.size());
  for (Index k = 0; k < start.size(); ++k) start[k] = mask[k] ? Complex(rng.normal(), 0.0) : zero;
  std::vector<ComplexArray> basis{start / start.matrix().norm()};
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  Index filled = 0;

  NormEstimate result;
  result.tolerance = tol;
  while (true) {
    // Extend the basis; column j of H holds basis^* (normal v_j) on and above the diagonal.
    ComplexArray w;
    double tail = 0.0;
    bool invariant = false;
    Index j = filled;
    while (true) {
      w = normal(basis[static_cast<std::size_t>(j)]);
      ++result.iterations;
      const double scale = w.matrix().norm();
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < basis.size(); ++i) {
          const Complex h = basis[i].matrix().dot(w.matrix());
          H(static_cast<Index>(i), j) += h;
          w -= h * basis[i];
        }
      }
      tail = w.matrix().norm();
      invariant = tail <= 1e-13 * scale;
      ++j;
      if (invariant || j == dim || result.iterations >= max_iter) break;
      basis.push_back(w / tail);
    }

    const Index size = j;
    Eigen::MatrixXcd T = H.topLeftCorner(size, size).triangularView<Eigen::StrictlyUpper>();
    T += T.adjoint().eval();
    T.diagonal() = H.diagonal().head(size).real().cast<Complex>();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ritz(T);
    const double theta = std::max(ritz.eigenvalues()[size - 1], 0.0);
    const double residual = invariant ? 0.0 : tail * std::abs(ritz.eigenvectors()(size - 1, size - 1));
    result.estimate = std::sqrt(theta);
    result.last_change = theta > 0.0 ? residual / theta : 0.0;
    if (theta == 0.0 || result.last_change <= tol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= max_iter) break;

    // Restart from the leading Ritz vectors and the residual direction.
    const Index kept = std::min(keep, size - 1);
    std::vector<ComplexArray> next;
    H.setZero();
    for (Index r = 0; r < kept; ++r) {
      const Index col = size - 1 - r;
      ComplexArray x = ComplexArray::Zero(grid.size());
      for (Index i = 0; i < size; ++i) x += ritz.eigenvectors()(i, col) * basis[static_cast<std::size_t>(i)];
      next.push_back(std::move(x));
      H(r, r) = ritz.eigenvalues()[col];
    }
    next.push_back(w / tail);
    basis = std::move(next);
    filled = kept;
  }
  return result;
}

ScalingReport stability_scaling_experiment(const KernelSpec& kernel, const MollifierSpec& mollifier,
                                           const RegionMask& omega, const std::vector<double>& B_values,
                                           double slack) {
  if (!kernel.bounds()) throw InvalidArgument("scaling experiment needs a kernel with bound constants");
  if (B_values.size() < 3) throw InvalidArgument("scaling experiment needs at least 3 values of B");
  for (double B : B_values)
    if (!(B > 0.0)) throw InvalidArgument("B values must be positive");
  const auto [lo, hi] = std::minmax_element(B_values.begin(), B_values.end());
  if (*hi / *lo < 100.0 * (1.0 - 1e-9)) throw InvalidArgument("B values must span at least two decades");

  const Reconstructor reconstructor(omega.grid(), kernel, mollifier);
  ScalingReport report;
  report.B = B_values;
  report.bound = static_cast<double>(omega.grid().dims()) + kernel.bounds()->b;
  Eigen::VectorXd x(static_cast<Index>(B_values.size()));
  Eigen::VectorXd y(x.size());
  for (std::size_t i = 0; i < B_values.size(); ++i) {
    const BetaField beta = constant_beta(omega.grid(), B_values[i]);
    report.norms.push_back(operator_norm(reconstructor, 1.0, beta, omega));
    x[static_cast<Index>(i)] = -std::log(B_values[i]);
    y[static_cast<Index>(i)] = std::log(report.norms.back().estimate);
  }
  const Eigen::VectorXd xc = x.array() - x.mean();
  report.slope = xc.dot(y.array().matrix() - Eigen::VectorXd::Constant(y.size(), y.mean())) / xc.squaredNorm();
  report.within_bound = report.slope <= report.bound + slack;
  return report;
}

KappaMatch match_kappa(const std::function<double(double)>& kappa_of, double lo, double hi, double target,
                       double tol, Index max_steps) {
  if (!(lo > 0.0) || !(hi > lo)) throw InvalidArgument("kappa matching needs 0 < lo < hi");
  if (!(target > 0.0)) throw InvalidArgument("kappa target must be positive");
  double k_lo = kappa_of(lo);
  double k_hi = kappa_of(hi);
  Index evaluations = 2;
  auto close = [&](double k) { return std::abs(k / target - 1.0) <= tol; };
  if (close(k_lo)) return {lo, k_lo, evaluations};
  if (close(k_hi)) return {hi, k_hi, evaluations};
  if ((k_lo - target) * (k_hi - target) > 0.0) {
    std::ostringstream msg;
    msg << "kappa target " << target << " unreachable on [" << lo << ", " << hi << "]: kappa ranges over ["
        << std::min(k_lo, k_hi) << ", " << std::max(k_lo, k_hi) << "]";
    throw CalibrationError(msg.str());
  }
  for (Index step = 0; step < max_steps; ++step) {
    const double mid = std::sqrt(lo * hi);
    const double k = kappa_of(mid);
    ++evaluations;
    if (close(k)) return {mid, k, evaluations};
    if (k < std::min(k_lo, k_hi) || k > std::max(k_lo, k_hi)) {
      std::ostringstream msg;
      msg << "kappa is not monotone: kappa(" << lo << ") = " << k_lo << ", kappa(" << mid << ") = " << k
          << ", kappa(" << hi << ") = " << k_hi;
      throw CalibrationError(msg.str());
    }
    if ((k - target) * (k_lo - target) > 0.0) {
      lo = mid;
      k_lo = k;
    } else {
      hi = mid;
      k_hi = k;
    }
  }
  std::ostringstream msg;
  msg << "kappa matching did not reach tolerance " << tol << " after " << max_steps << " bisection steps";
  throw CalibrationError(msg.str());
}

CalibrationResult calibrate_beta(const SampledField& g, const KernelSpec& kernel, const MollifierSpec& mollifier,
                                 double alpha, const RegionMask& roi, double target_kappa,
                                 const CalibrationOptions& options) {
  const Reconstructor reconstructor(g.grid(), kernel, mollifier);
  const SampledField delta = gaussian_noise(g.grid(), options.noise_sigma, substream(options.seed, std::uint64_t{0}));
  const KappaProbe probe(reconstructor, g, delta, RegionMask::full(g.grid()));
  return calibrate_beta(probe, alpha, roi, target_kappa, options);
}

CalibrationResult calibrate_beta(const KappaProbe& probe, double alpha, const RegionMask& roi, double target_kappa,
                                 const CalibrationOptions& options) {
  const Grid& grid = probe.reconstructor().grid();
  if (!(roi.grid() == grid)) throw InvalidArgument("calibration roi lives on another grid");
  if (roi.empty()) throw InvalidArgument("calibration roi is empty");
  const auto [lo, hi] = options.beta_out_range;
  CalibrationResult result{};

  if (roi.is_full()) {
    const KappaMatch match = match_kappa(
        [&](double b) { return probe.kappa(alpha, constant_beta(grid, b)); }, lo, hi, target_kappa, options.tolerance);
    result = {match.value, match.value, match.kappa, {}};
    std::ostringstream line;
    line << "full roi: constant beta " << match.value << " gives kappa " << match.kappa;
    result.log.push_back(line.str());
    return result;
  }

  auto candidates = options.beta_in_candidates;
  std::sort(candidates.begin(), candidates.end());
  if (candidates.empty()) throw InvalidArgument("calibration needs beta_in candidates");
  for (double beta_in : candidates) {
    auto kappa_of = [&](double beta_out) { return probe.kappa(alpha, two_region_beta(grid, roi, beta_in, beta_out)); };
    const double k_lo = kappa_of(lo);
    const double k_hi = kappa_of(hi);
    std::ostringstream line;
    line << "beta_in " << beta_in << ": kappa(beta_out=" << lo << ") = " << k_lo << ", kappa(beta_out=" << hi
         << ") = " << k_hi;
    const double slack = 1.0 + options.tolerance;
    if (target_kappa * slack < std::min(k_lo, k_hi) || target_kappa > std::max(k_lo, k_hi) * slack) {
      line << "; target out of range";
      result.log.push_back(line.str());
      continue;
    }
    const KappaMatch match = match_kappa(kappa_of, lo, hi, target_kappa, options.tolerance);
    line << "; matched beta_out " << match.value << " with kappa " << match.kappa;
    result.log.push_back(line.str());
    result.beta_in = beta_in;
    result.beta_out = match.value;
    result.kappa = match.kappa;
    return result;
  }
  std::ostringstream msg;
  msg << "kappa target " << target_kappa << " unreachable for every beta_in candidate";
  for (const auto& line : result.log) msg << "\n  " << line;
  throw CalibrationError(msg.str());
}

}  // namespace molldeconv
