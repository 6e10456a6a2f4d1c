#include "molldeconv/reconstruct.hpp"

#include "molldeconv/error.hpp"
#include "molldeconv/parallel.hpp"
#include "molldeconv/transform.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace molldeconv {

namespace {

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw InvalidArgument(std::string(what) + ": grid mismatch");
}

void require_finite(const SampledField& g) {
  if (!g.values().allFinite()) throw InvalidArgument("input data contains non-finite values");
}

Complex symbol_value(const Complex& gamma_hat, double phi) {
  const double miss = 1.0 - phi;
  return std::conj(gamma_hat) * phi / (std::norm(gamma_hat) + miss * miss);
}

bool hermitian_on(const SpectralGrid& spectral, const ComplexArray& values) {
  const double scale = values.abs().maxCoeff();
  for (Index k = 0; k < values.size(); ++k) {
    if (std::abs(values[spectral.mirror(k)] - std::conj(values[k])) > 1e-12 * scale) return false;
  }
  return true;
}

}  // namespace

SampledField finish_output(const Grid& grid, ComplexArray values, bool expect_real) {
  if (!expect_real) return {grid, std::move(values)};
  const double real_peak = values.real().abs().maxCoeff();
  const double imag_peak = values.imag().abs().maxCoeff();
  if (imag_peak > 1e-8 * real_peak) {
    std::ostringstream msg;
    msg << "imaginary residue " << imag_peak << " exceeds 1e-8 of the real magnitude " << real_peak;
    throw NumericalContractError(msg.str());
  }
  values.imag().setZero();
  return {grid, std::move(values)};
}

Reconstructor::Reconstructor(const Grid& grid, KernelSpec kernel, MollifierSpec mollifier)
    : spectral_(grid),
      kernel_(std::move(kernel)),
      mollifier_(std::move(mollifier)),
      gamma_hat_(kernel_.sample(spectral_)),
      radius_(frequency_radius(spectral_)),
      hermitian_(hermitian_on(spectral_, gamma_hat_)) {}

ComplexArray Reconstructor::symbol(double scale) const {
  if (!(scale > 0.0)) throw InvalidArgument("alpha * beta must be positive");
  ComplexArray out(spectral_.size());
  for (Index k = 0; k < out.size(); ++k) out[k] = symbol_value(gamma_hat_[k], mollifier_.profile(scale * radius_[k]));
  return out;
}

std::vector<ComplexArray> Reconstructor::level_symbols(double alpha, const BetaField& beta) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be positive");
  require_same_grid(beta.grid(), grid(), "beta field");
  std::vector<ComplexArray> symbols;
  symbols.reserve(beta.levels().size());
  for (const BetaLevel& level : beta.levels()) symbols.push_back(symbol(alpha * level.value));
  return symbols;
}

ComplexArray Reconstructor::apply_levels(const ComplexArray& g_hat, const std::vector<ComplexArray>& symbols,
                                         const BetaField& beta) const {
  ComplexArray out(grid().size());
  parallel_for(symbols.size(), [&](std::size_t l) {
    const ComplexArray h = detail::inverse_values(grid(), symbols[l] * g_hat);
    const BoolArray& members = beta.levels()[l].region.membership();
    for (Index k = 0; k < out.size(); ++k)
      if (members[k]) out[k] = h[k];
  });
  return out;
}

ComplexArray Reconstructor::apply_adjoint_levels(const ComplexArray& y, const std::vector<ComplexArray>& symbols,
                                                 const BetaField& beta) const {
  std::vector<ComplexArray> parts(symbols.size());
  parallel_for(symbols.size(), [&](std::size_t l) {
    const BoolArray& members = beta.levels()[l].region.membership();
    const ComplexArray masked = members.select(y, Complex(0.0, 0.0));
    parts[l] = detail::inverse_values(grid(), symbols[l].conjugate() * detail::forward_values(grid(), masked));
  });
  ComplexArray out = ComplexArray::Zero(grid().size());
  for (const auto& part : parts) out += part;
  return out;
}

SampledField Reconstructor::apply(const SampledField& g, double alpha, const BetaField& beta) const {
  require_same_grid(g.grid(), grid(), "reconstruct");
  require_finite(g);
  return apply_spectrum(forward_transform(g), g.is_real(), alpha, beta);
}

SampledField Reconstructor::apply_spectrum(const SpectralField& g_hat, bool real_data, double alpha,
                                           const BetaField& beta) const {
  if (!(g_hat.grid() == spectral_)) throw InvalidArgument("reconstruct: spectrum lives on another grid");
  return finish_output(grid(), apply_levels(g_hat.values(), level_symbols(alpha, beta), beta),
                       real_data && hermitian_);
}

SampledField reconstruct_fast(const SampledField& g, const ReconstructionParams& params) {
  return Reconstructor(g.grid(), params.kernel, params.mollifier).apply(g, params.alpha, params.beta);
}

SampledField reconstruct_oracle(const SampledField& g, const ReconstructionParams& params) {
  require_same_grid(g.grid(), params.beta.grid(), "reconstruct_oracle");
  return reconstruct_oracle(g, params.alpha, params.beta.values(), params.kernel, params.mollifier);
}

SampledField reconstruct_oracle(const SampledField& g, double alpha, const RealArray& beta_per_node,
                                const KernelSpec& kernel, const MollifierSpec& mollifier) {
  const Grid& grid = g.grid();
  if (grid.size() > kOracleMaxNodes) throw InvalidArgument("reconstruct_oracle is limited to 2^14 nodes");
  if (beta_per_node.size() != grid.size()) throw InvalidArgument("beta samples do not match the grid");
  if (!(alpha > 0.0) || (beta_per_node <= 0.0).any()) throw InvalidArgument("alpha and beta must be positive");
  require_finite(g);

  const SpectralField g_hat = forward_transform(g);
  const SpectralGrid& spectral = g_hat.grid();
  const Index n0 = grid.samples(0);
  const Index n1 = grid.samples(1);

  // e^{2 pi i x xi} factorizes over the axes.
  auto phase_table = [&](int axis) {
    const Index n = grid.samples(axis);
    Eigen::ArrayXXcd table(n, n);
    for (Index i = 0; i < n; ++i) {
      const double x = grid.dims() == 1 && axis == 1 ? 0.0 : grid.origin(axis) + static_cast<double>(i) * grid.spacing(axis);
      for (Index m = 0; m < n; ++m)
        table(i, m) = std::polar(1.0, 2.0 * std::numbers::pi * x * spectral.frequency(axis, m));
    }
    return table;
  };
  const Eigen::ArrayXXcd phase0 = phase_table(0);
  const Eigen::ArrayXXcd phase1 = phase_table(1);

  std::vector<Complex> gamma(static_cast<std::size_t>(spectral.size()));
  std::vector<double> radius(gamma.size());
  for (Index k = 0; k < spectral.size(); ++k) {
    gamma[static_cast<std::size_t>(k)] = kernel.fourier(spectral.node(k));
    radius[static_cast<std::size_t>(k)] = norm(spectral.node(k));
  }

  const double weight = spectral.cell_volume();
  ComplexArray out(grid.size());
  parallel_for(static_cast<std::size_t>(grid.size()), [&](std::size_t node) {
    const auto [i0, i1] = grid.unravel(static_cast<Index>(node));
    const double scale = alpha * beta_per_node[static_cast<Index>(node)];
    Complex sum(0.0, 0.0);
    for (Index m0 = 0; m0 < n0; ++m0) {
      for (Index m1 = 0; m1 < n1; ++m1) {
        const Index k = m0 * n1 + m1;
        const auto kk = static_cast<std::size_t>(k);
        const Complex p = symbol_value(gamma[kk], mollifier.profile(scale * radius[kk]));
        sum += phase0(i0, m0) * phase1(i1, m1) * p * g_hat.values()[k];
      }
    }
    out[static_cast<Index>(node)] = sum * weight;
  });
  return {grid, std::move(out)};
}

SampledField classical_filter(const SampledField& g, const KernelSpec& kernel, const MollifierSpec& mollifier,
                              double beta_scalar) {
  if (!(beta_scalar > 0.0)) throw InvalidArgument("beta must be positive");
  require_finite(g);
  const SpectralField g_hat = forward_transform(g);
  ComplexArray filtered(g_hat.values().size());
  for (Index k = 0; k < filtered.size(); ++k)
    filtered[k] = eval_symbol(kernel, mollifier, 1.0, beta_scalar, g_hat.grid().node(k)) * g_hat.values()[k];
  const bool hermitian = hermitian_on(g_hat.grid(), kernel.sample(g_hat.grid()));
  return finish_output(g.grid(), inverse_transform({g_hat.grid(), std::move(filtered)}).values(),
                       g.is_real() && hermitian);
}

SampledField convolve(const SampledField& f, const KernelSpec& kernel) {
  require_finite(f);
  const SpectralField f_hat = forward_transform(f);
  const ComplexArray gamma = kernel.sample(f_hat.grid());
  return finish_output(f.grid(), inverse_transform({f_hat.grid(), gamma * f_hat.values()}).values(),
                       f.is_real() && hermitian_on(f_hat.grid(), gamma));
}

}  // namespace molldeconv
