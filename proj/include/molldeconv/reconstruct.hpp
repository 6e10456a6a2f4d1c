#pragma once

#include "molldeconv/beta_field.hpp"
#include "molldeconv/kernels.hpp"

#include <vector>

namespace molldeconv {

struct ReconstructionParams {
  double alpha;
  BetaField beta;
  KernelSpec kernel;
  MollifierSpec mollifier;
};

/// Spectral state shared by every application of R_{alpha,beta} on one grid: gamma^ and |xi| are
/// sampled once, symbols per level on demand. Immutable, safe to share between threads.
class Reconstructor {
 public:
  Reconstructor(const Grid& grid, KernelSpec kernel, MollifierSpec mollifier);

  const Grid& grid() const { return spectral_.spatial(); }
  const SpectralGrid& spectral_grid() const { return spectral_; }
  const KernelSpec& kernel() const { return kernel_; }
  const MollifierSpec& mollifier() const { return mollifier_; }
  const ComplexArray& kernel_samples() const { return gamma_hat_; }
  /// True when gamma^(-xi) = conj gamma^(xi) on the lattice (Nyquist bins must be real),
  /// so real data gives real reconstructions.
  bool hermitian() const { return hermitian_; }

  /// conj(gamma^) Phi(scale |xi|) / (|gamma^|^2 + (1 - Phi(scale |xi|))^2) on every spectral node.
  ComplexArray symbol(double scale) const;
  /// symbol(alpha * beta_l) for each level of beta.
  std::vector<ComplexArray> level_symbols(double alpha, const BetaField& beta) const;

  /// Spatial values of R g given g^ (centered spectral layout); no realness handling.
  ComplexArray apply_levels(const ComplexArray& g_hat, const std::vector<ComplexArray>& symbols,
                            const BetaField& beta) const;
  /// Adjoint of g -> apply_levels(F g, ...) with respect to the plain node inner product.
  ComplexArray apply_adjoint_levels(const ComplexArray& y, const std::vector<ComplexArray>& symbols,
                                    const BetaField& beta) const;

  SampledField apply(const SampledField& g, double alpha, const BetaField& beta) const;
  /// Same as apply, starting from a cached forward transform of data whose realness is given.
  SampledField apply_spectrum(const SpectralField& g_hat, bool real_data, double alpha, const BetaField& beta) const;

 private:
  SpectralGrid spectral_;
  KernelSpec kernel_;
  MollifierSpec mollifier_;
  ComplexArray gamma_hat_;
  RealArray radius_;
  bool hermitian_;
};

/// L-level fast path: one filtered inverse transform per beta level, then each node takes the
/// value of its own level. Real data with a Hermitian kernel yields a real field; an imaginary
/// residue above 1e-8 of the real magnitude raises NumericalContractError.
SampledField reconstruct_fast(const SampledField& g, const ReconstructionParams& params);

/// Direct double sum over nodes and frequencies with beta evaluated per node. At most 2^14 nodes.
SampledField reconstruct_oracle(const SampledField& g, const ReconstructionParams& params);
SampledField reconstruct_oracle(const SampledField& g, double alpha, const RealArray& beta_per_node,
                                const KernelSpec& kernel, const MollifierSpec& mollifier);

/// Constant-resolution filter F^{-1}[conj(gamma^) phi^(beta xi) / (|gamma^|^2 + |1 - phi^(beta xi)|^2) g^].
SampledField classical_filter(const SampledField& g, const KernelSpec& kernel, const MollifierSpec& mollifier,
                              double beta_scalar);

/// Periodic convolution F^{-1}[gamma^ f^] with analytic gamma^.
SampledField convolve(const SampledField& f, const KernelSpec& kernel);

/// Realness policy shared by every operator: when expect_real, checks the imaginary residue and
/// drops it; otherwise returns the values unchanged.
SampledField finish_output(const Grid& grid, ComplexArray values, bool expect_real);

inline constexpr Index kOracleMaxNodes = Index{1} << 14;

}  // namespace molldeconv
