#include "helpers.hpp"

#include "molldeconv/error.hpp"
#include "molldeconv/reconstruct.hpp"
#include "molldeconv/transform.hpp"

#include <doctest.h>

using namespace molldeconv;
using namespace testing;

namespace {

KernelSpec identity_kernel() {
  return KernelSpec("identity", 0, [](const Coord&) { return Complex(1.0, 0.0); });
}

// Four-level field on any grid: quadrants (2D) or quarters (1D).
BetaField four_levels(const Grid& grid) {
  BoolArray masks[4];
  for (auto& m : masks) m = BoolArray::Constant(grid.size(), false);
  for (Index k = 0; k < grid.size(); ++k) {
    const auto [i0, i1] = grid.unravel(k);
    const int level = grid.dims() == 1 ? static_cast<int>(4 * i0 / grid.samples(0))
                                       : static_cast<int>(2 * (2 * i0 / grid.samples(0)) + 2 * i1 / grid.samples(1));
    masks[level][k] = true;
  }
  const double values[4] = {0.3, 1.0, 2.2, 5.0};
  std::vector<BetaLevel> levels;
  for (int l = 0; l < 4; ++l) levels.push_back({RegionMask::bitmap(grid, masks[l]), values[l]});
  return {grid, std::move(levels)};
}

}  // namespace

TEST_SUITE("reconstruct") {

TEST_CASE("zero data reconstructs to zero") {
  const Grid grid(64, 1.0 / 64.0);
  const ReconstructionParams params{0.1, constant_beta(grid, 1.0), gaussian_kernel_1d(0.1, 0.05),
                                    gaussian_mollifier(1)};
  const SampledField out = reconstruct_fast(SampledField::zeros(grid), params);
  CHECK(max_abs(out.values()) == 0.0);
}

TEST_CASE("fast path equals the dense oracle on 8-point grids for every level count") {
  const std::vector<Grid> grids = {Grid(8, 0.125, -0.5), Grid({8, 8}, {1.0, 1.0}, {-4.0, -4.0})};
  for (const Grid& grid : grids) {
    const KernelSpec kernel = grid.dims() == 1 ? gaussian_kernel_1d(0.1, 0.05) : gaussian_kernel_2d(0.8);
    const MollifierSpec mollifier = gaussian_mollifier(grid.dims());
    const SampledField g = SampledField::from_real(grid, random_real(grid.size(), 17));
    const std::vector<BetaField> fields = {
        constant_beta(grid, 1.3),
        two_region_beta(grid, RegionMask::disk(grid, grid.node(grid.size() / 2), 2.0 * grid.spacing(0)), 0.4, 3.0),
        four_levels(grid)};
    for (const BetaField& beta : fields) {
      const ReconstructionParams params{0.7, beta, kernel, mollifier};
      const SampledField fast = reconstruct_fast(g, params);
      const SampledField oracle = reconstruct_oracle(g, params);
      CHECK(max_abs(fast.values() - oracle.values()) <= 1e-10 * std::max(1.0, max_abs(oracle.values())));
    }
  }
}

TEST_CASE("constant beta reduces to the classical filter") {
  for (Index n : {16, 255, 1024}) {
    const Grid grid(n, 1.0 / static_cast<double>(n));
    const SampledField g = SampledField::from_real(grid, random_real(n, static_cast<std::uint64_t>(n)));
    const KernelSpec kernel = gaussian_kernel_1d(0.1, 0.05);
    const MollifierSpec mollifier = gaussian_mollifier(1);
    const SampledField fast = reconstruct_fast(g, {1e-3, constant_beta(grid, 0.27), kernel, mollifier});
    const SampledField classical = classical_filter(g, kernel, mollifier, 1e-3 * 0.27);
    CHECK(max_abs(fast.values() - classical.values()) <= 1e-12 * max_abs(classical.values()));
  }
  const Grid grid({32, 32}, {1.0, 1.0});
  const SampledField g = SampledField::from_real(grid, random_real(grid.size(), 2));
  const SampledField fast = reconstruct_fast(g, {1.0, constant_beta(grid, 2.5), gaussian_kernel_2d(2.0), gaussian_mollifier(2)});
  const SampledField classical = classical_filter(g, gaussian_kernel_2d(2.0), gaussian_mollifier(2), 2.5);
  CHECK(max_abs(fast.values() - classical.values()) <= 1e-12 * max_abs(classical.values()));
}

TEST_CASE("single-frequency data") {
  const Grid grid(16, 0.25, -2.0);
  const SpectralGrid spectral(grid);
  const Index m = 11;
  const Coord xi0 = spectral.node(m);
  ComplexArray G = ComplexArray::Zero(16);
  G[m] = Complex(0.3, -0.7);
  const SampledField g = inverse_transform({spectral, G});
  const KernelSpec kernel = sobolev_kernel(1.0);
  const MollifierSpec mollifier = gaussian_mollifier(1);
  const BetaField beta = two_region_beta(grid, RegionMask::rectangle(grid, {-1.0, 0.0}, {1.0, 0.0}), 0.5, 2.0);
  const SampledField out = reconstruct_oracle(g, {0.8, beta, kernel, mollifier});
  for (Index k = 0; k < 16; ++k) {
    const double x = grid.node(k)[0];
    const Complex expected = std::polar(1.0, 2.0 * kPi * x * xi0[0]) *
                             eval_symbol(kernel, mollifier, 0.8, beta.value_at(k), xi0) * G[m] * spectral.cell_volume();
    CHECK(std::abs(out.values()[k] - expected) <= 1e-14);
  }
}

TEST_CASE("classical filter limits and algebra") {
  const Grid grid(128, 1.0 / 128.0, -0.5);
  const KernelSpec kernel = gaussian_kernel_1d(1.0, 0.01);
  const MollifierSpec mollifier = gaussian_mollifier(1);
  const SampledField g = SampledField::from_real(grid, random_real(128, 8));

  // Tiny beta: phi^ ~ 1 on the band, so the filter is naive deconvolution.
  const SpectralField G = forward_transform(g);
  const ComplexArray naive = inverse_transform({G.grid(), G.values() / kernel.sample(G.grid())}).values();
  const SampledField tiny = classical_filter(g, kernel, mollifier, 1e-9);
  CHECK(max_abs(tiny.values() - naive) <= 1e-8 * max_abs(naive));

  // g = gamma * f: output is F^{-1}[|gamma^|^2 phi^ / (|gamma^|^2 + (1 - phi^)^2) f^].
  const SampledField f = SampledField::from_real(grid, random_real(128, 9));
  const SampledField blurred = convolve(f, kernel);
  const SampledField out = classical_filter(blurred, kernel, mollifier, 0.05);
  const SpectralField F = forward_transform(f);
  ComplexArray direct(128);
  for (Index k = 0; k < 128; ++k) {
    const Coord xi = F.grid().node(k);
    const double gh = std::abs(kernel.fourier(xi));
    const double phi = mollifier.fourier({0.05 * xi[0], 0.0});
    direct[k] = gh * gh * phi / (gh * gh + (1.0 - phi) * (1.0 - phi)) * F.values()[k];
  }
  const ComplexArray expected = inverse_transform({F.grid(), direct}).values();
  CHECK(max_abs(out.values() - expected) <= 1e-12 * max_abs(expected));

  // Linearity.
  const SampledField h = SampledField::from_real(grid, random_real(128, 10));
  const SampledField combo(grid, 2.5 * g.values() - 0.75 * h.values());
  const ComplexArray lhs = classical_filter(combo, kernel, mollifier, 0.05).values();
  const ComplexArray rhs = 2.5 * classical_filter(g, kernel, mollifier, 0.05).values() -
                           0.75 * classical_filter(h, kernel, mollifier, 0.05).values();
  CHECK(max_abs(lhs - rhs) <= 1e-12 * max_abs(rhs));
  CHECK_THROWS_AS(classical_filter(g, kernel, mollifier, 0.0), InvalidArgument);
}

TEST_CASE("linearity of the variable-resolution operator") {
  const Grid grid({48, 40}, {1.0, 1.0});
  const ReconstructionParams params{1.0, four_levels(grid), gaussian_kernel_2d(1.5), gaussian_mollifier(2)};
  const SampledField a = SampledField::from_real(grid, random_real(grid.size(), 1));
  const SampledField b = SampledField::from_real(grid, random_real(grid.size(), 2));
  const ComplexArray lhs = reconstruct_fast({grid, -1.5 * a.values() + 4.0 * b.values()}, params).values();
  const ComplexArray rhs = -1.5 * reconstruct_fast(a, params).values() + 4.0 * reconstruct_fast(b, params).values();
  CHECK(max_abs(lhs - rhs) <= 1e-12 * max_abs(rhs));
}

TEST_CASE("convolution") {
  const Grid line(64, 0.1, -3.2);
  const SampledField f = SampledField::from_real(line, random_real(64, 4));
  CHECK(max_abs(convolve(f, identity_kernel()).values() - f.values()) <= 1e-12 * max_abs(f.values()));

  // Unit-mass impulse through the sigma = 7 blur gives the sampled Gaussian.
  const Grid grid({128, 128}, {1.0, 1.0}, {-64.0, -64.0});
  RealArray impulse = RealArray::Zero(grid.size());
  impulse[grid.ravel(64, 64)] = 1.0;
  const KernelSpec blur = gaussian_kernel_2d(7.0);
  const SampledField out = convolve(SampledField::from_real(grid, impulse), blur);
  CHECK(out.is_real());
  CHECK(out.real().sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.real()[grid.ravel(64, 64)] == doctest::Approx(1.0 / (2.0 * kPi * 49.0)).epsilon(1e-12));
  double worst = 0.0;
  for (Index k = 0; k < grid.size(); ++k) worst = std::max(worst, std::abs(out.real()[k] - blur.spatial(grid.node(k))));
  CHECK(worst <= 1e-15);

  // Commutes with a one-cell translation.
  const Grid small({16, 16}, {1.0, 1.0});
  const RealArray u = random_real(small.size(), 6);
  RealArray shifted(small.size());
  for (Index k = 0; k < small.size(); ++k) {
    const auto [r, c] = small.unravel(k);
    shifted[small.ravel(r, (c + 1) % 16)] = u[k];
  }
  const RealArray a = convolve(SampledField::from_real(small, u), gaussian_kernel_2d(1.0)).real();
  const RealArray b = convolve(SampledField::from_real(small, shifted), gaussian_kernel_2d(1.0)).real();
  double diff = 0.0;
  for (Index k = 0; k < small.size(); ++k) {
    const auto [r, c] = small.unravel(k);
    diff = std::max(diff, std::abs(b[small.ravel(r, (c + 1) % 16)] - a[k]));
  }
  CHECK(diff <= 1e-10);
}

TEST_CASE("realness policy") {
  const Grid grid(32, 1.0 / 32.0);
  const SampledField g = SampledField::from_real(grid, random_real(32, 3));
  const SampledField out =
      reconstruct_fast(g, {0.5, constant_beta(grid, 1.0), gaussian_kernel_1d(0.1, 0.05), gaussian_mollifier(1)});
  CHECK(out.is_real());

  ComplexArray leaky = ComplexArray::Ones(4);
  leaky[2] = Complex(1.0, 1e-6);
  CHECK_THROWS_AS(finish_output(Grid(4, 1.0), leaky, true), NumericalContractError);
  CHECK_NOTHROW(finish_output(Grid(4, 1.0), leaky, false));
  leaky[2] = Complex(1.0, 1e-10);
  CHECK(finish_output(Grid(4, 1.0), leaky, true).is_real());

  // A kernel that is not Hermitian keeps complex output.
  const KernelSpec shift("shifted", 1, [](const Coord& xi) { return std::polar(1.0, -2.0 * kPi * 0.01 * xi[0]); });
  CHECK_FALSE(Reconstructor(grid, shift, gaussian_mollifier(1)).hermitian());
  const SampledField shifted = reconstruct_fast(g, {0.5, constant_beta(grid, 1.0), shift, gaussian_mollifier(1)});
  CHECK_FALSE(shifted.is_real());
}

TEST_CASE("input validation") {
  const Grid grid(16, 1.0);
  const ReconstructionParams params{1.0, constant_beta(grid, 1.0), sobolev_kernel(1.0), gaussian_mollifier(1)};
  RealArray bad = RealArray::Ones(16);
  bad[4] = NAN;
  CHECK_THROWS_AS(reconstruct_fast(SampledField::from_real(grid, bad), params), InvalidArgument);
  CHECK_THROWS_AS(reconstruct_fast(SampledField::zeros(Grid(17, 1.0)), params), InvalidArgument);
  CHECK_THROWS_AS(reconstruct_fast(SampledField::zeros(grid), {0.0, params.beta, params.kernel, params.mollifier}),
                  InvalidArgument);
  const Grid large({129, 128}, {1.0, 1.0});
  CHECK_THROWS_AS(reconstruct_oracle(SampledField::zeros(large), {1.0, constant_beta(large, 1.0), sobolev_kernel(1.0),
                                                                  gaussian_mollifier(2)}),
                  InvalidArgument);
}

TEST_CASE("adjoint agrees with the dense transpose") {
  const Grid grid({6, 5}, {1.0, 1.0});
  const Reconstructor rec(grid, gaussian_kernel_2d(0.7), gaussian_mollifier(2));
  const BetaField beta = four_levels(grid);
  const auto symbols = rec.level_symbols(0.9, beta);
  const Index n = grid.size();
  Eigen::MatrixXcd A(n, n);
  Eigen::MatrixXcd B(n, n);
  for (Index j = 0; j < n; ++j) {
    ComplexArray e = ComplexArray::Zero(n);
    e[j] = 1.0;
    A.col(j) = rec.apply_levels(detail::forward_values(grid, e), symbols, beta).matrix();
    B.col(j) = rec.apply_adjoint_levels(e, symbols, beta).matrix();
  }
  CHECK((B - A.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * A.cwiseAbs().maxCoeff());
}

TEST_CASE("attenuation is monotone in beta") {
  const MollifierSpec m = gaussian_mollifier(1);
  for (const KernelSpec& kernel : {gaussian_kernel_1d(0.1, 0.05), sobolev_kernel(1.0)}) {
    for (double xi : {0.5, 3.0, 20.0, 200.0}) {
      double previous = INFINITY;
      for (int i = 0; i <= 400; ++i) {
        const double beta = std::pow(10.0, -4.0 + 8.0 * i / 400.0);
        const double p = std::abs(eval_symbol(kernel, m, 1.0, beta, {xi, 0.0}));
        CHECK(p <= previous * (1.0 + 1e-12));
        previous = p;
      }
    }
  }
}

TEST_CASE("quantized smooth dip converges with the level count") {
  // Pulse-train data, plateau 1 with a smooth dip to 0.5 over the train.
  const Grid grid(1024, 1.0 / 1024.0);
  RealArray smooth(grid.size());
  RealArray f(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    const double x = grid.node(k)[0];
    smooth[k] = std::pow(0.5, std::exp(-std::pow((x - 0.5) / 0.12, 2)));
    const double u = std::fmod(std::abs(x - 0.5) + 1.0 / 128.0, 3.0 / 64.0);
    f[k] = std::abs(x - 0.5) < 0.1 && u < 1.0 / 64.0 ? 1.0 : 0.0;
  }
  const KernelSpec kernel = gaussian_kernel_1d(0.1, 0.05);
  const MollifierSpec mollifier = gaussian_mollifier(1);
  const SampledField g = convolve(SampledField::from_real(grid, f), kernel);
  const ComplexArray a = reconstruct_fast(g, {0.262, quantize_beta(grid, smooth, 8).field, kernel, mollifier}).values();
  const ComplexArray b = reconstruct_fast(g, {0.262, quantize_beta(grid, smooth, 64).field, kernel, mollifier}).values();
  CHECK((a - b).matrix().norm() <= 0.01 * b.matrix().norm());
}

}
