// Wall-clock comparison of the serial stencil, the OpenMP stencil and the FFT
// path on the discrete biweight taps, for a few grid sizes.
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "dipole/convolution.hpp"

using namespace dipole;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
  const Kernel k = Kernel::biweight(1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> val(0.0, 1.0);

  std::printf("threads %d, best of %d\n", omp_get_max_threads(), reps);
  std::printf("%8s %6s %10s %12s %12s %12s %10s %12s\n", "N", "m", "h", "serial_ms", "parallel_ms", "spectral_ms", "speedup", "max|par-ser|");
  for (double h : {1.0 / 32.0, 1.0 / 128.0}) {
    const Taps taps = make_taps(k, h);
    const std::span<const double> w(taps.weights);
    for (std::size_t n : {4096u, 32768u, 262144u}) {
      std::vector<double> padded(n + 2 * taps.m);
      for (auto& v : padded) v = val(rng);
      std::vector<double> a(n), b(n), c(n);
      const double ts = best_of(reps, [&] { stencil_serial(w, padded, a); });
      const double tp = best_of(reps, [&] { stencil_parallel(w, padded, b); });
      const double tf = best_of(reps, [&] { stencil_spectral(w, padded, c); });
      double diff = 0.0;
      for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
      std::printf("%8zu %6zu %10.6f %12.3f %12.3f %12.3f %10.2f %12.2e\n", n, taps.m, h, 1e3 * ts, 1e3 * tp, 1e3 * tf, ts / tp, diff);
    }
  }
  return 0;
}
