#include "molldeconv/transform.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

namespace molldeconv {

namespace {

// FFTW planning is not thread-safe, execution on a finished plan is. Plans are created once per
// shape with FFTW_UNALIGNED so they can run on any Eigen buffer through fftw_execute_dft.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(const Grid& grid, int sign) {
    const auto key = std::make_tuple(grid.dims(), grid.samples(0), grid.samples(1), sign);
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const auto n = static_cast<std::size_t>(grid.size());
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = grid.dims() == 1
                         ? fftw_plan_dft_1d(static_cast<int>(grid.samples(0)), in, out, sign, flags)
                         : fftw_plan_dft_2d(static_cast<int>(grid.samples(0)),
                                            static_cast<int>(grid.samples(1)), in, out, sign, flags);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, Index, Index, int>, fftw_plan> plans_;
};

void execute(const Grid& grid, int sign, const ComplexArray& in, ComplexArray& out) {
  fftw_plan plan = PlanCache::instance().get(grid, sign);
  // fftw_execute_dft does not write to its input for out-of-place complex plans.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data()));
  fftw_execute_dft(plan, src, reinterpret_cast<fftw_complex*>(out.data()));
}

// Per-axis origin phase exp(sign * 2 pi i * origin * xi_m), centered order.
Eigen::ArrayXcd origin_phase(const SpectralGrid& sg, int axis, double sign) {
  const Index n = sg.samples(axis);
  Eigen::ArrayXcd phase(n);
  const double origin = sg.spatial().origin(axis);
  for (Index m = 0; m < n; ++m) {
    const double angle = sign * 2.0 * std::numbers::pi * origin * sg.frequency(axis, m);
    phase[m] = origin == 0.0 ? Complex(1.0, 0.0) : std::polar(1.0, angle);
  }
  return phase;
}

// DFT bin holding centered position m along an axis.
inline Index dft_bin(Index m, Index offset, Index n) {
  const Index k = m - offset;
  return k < 0 ? k + n : k;
}

}  // namespace

namespace detail {

ComplexArray forward_values(const Grid& grid, const ComplexArray& u) {
  const SpectralGrid sg(grid);
  ComplexArray dft(grid.size());
  execute(grid, FFTW_FORWARD, u, dft);

  const Index n0 = grid.samples(0), n1 = grid.samples(1);
  const Index off0 = sg.zero_offset(0), off1 = sg.zero_offset(1);
  const auto phase0 = origin_phase(sg, 0, -1.0);
  const auto phase1 = grid.dims() == 2 ? origin_phase(sg, 1, -1.0) : Eigen::ArrayXcd::Ones(1).eval();
  const double weight = grid.cell_volume();

  ComplexArray out(grid.size());
  for (Index m0 = 0; m0 < n0; ++m0) {
    const Index k0 = dft_bin(m0, off0, n0);
    for (Index m1 = 0; m1 < n1; ++m1) {
      const Index k1 = dft_bin(m1, off1, n1);
      out[m0 * n1 + m1] = weight * phase0[m0] * phase1[m1] * dft[k0 * n1 + k1];
    }
  }
  return out;
}

ComplexArray inverse_values(const Grid& grid, const ComplexArray& U) {
  const SpectralGrid sg(grid);
  const Index n0 = grid.samples(0), n1 = grid.samples(1);
  const Index off0 = sg.zero_offset(0), off1 = sg.zero_offset(1);
  const auto phase0 = origin_phase(sg, 0, 1.0);
  const auto phase1 = grid.dims() == 2 ? origin_phase(sg, 1, 1.0) : Eigen::ArrayXcd::Ones(1).eval();

  ComplexArray bins(grid.size());
  for (Index m0 = 0; m0 < n0; ++m0) {
    const Index k0 = dft_bin(m0, off0, n0);
    for (Index m1 = 0; m1 < n1; ++m1) {
      const Index k1 = dft_bin(m1, off1, n1);
      bins[k0 * n1 + k1] = phase0[m0] * phase1[m1] * U[m0 * n1 + m1];
    }
  }
  ComplexArray out(grid.size());
  execute(grid, FFTW_BACKWARD, bins, out);
  out *= sg.cell_volume();
  return out;
}

}  // namespace detail

SpectralField forward_transform(const SampledField& u) {
  return {SpectralGrid(u.grid()), detail::forward_values(u.grid(), u.values())};
}

SampledField inverse_transform(const SpectralField& U) {
  const Grid& grid = U.grid().spatial();
  return {grid, detail::inverse_values(grid, U.values())};
}

}  // namespace molldeconv
