#include "dipole/convolution.hpp"

#include <fftw3.h>

#include <bit>
#include <complex>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace dipole {

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (!p) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

// the FFTW planner is not reentrant
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

void check_stencil_shapes(std::span<const double> w, std::span<const double> padded, std::span<double> out) {
  if (w.size() % 2 != 1 || padded.size() != out.size() + w.size() - 1) throw std::invalid_argument("stencil: inconsistent buffer sizes");
}

}  // namespace

void stencil_serial(std::span<const double> w, std::span<const double> padded, std::span<double> out) {
  check_stencil_shapes(w, padded, out);
  const std::size_t taps = w.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double sum = 0.0;
    for (std::size_t s = 0; s < taps; ++s) sum += w[s] * padded[i + s];
    out[i] = sum;
  }
}

void stencil_parallel(std::span<const double> w, std::span<const double> padded, std::span<double> out) {
  check_stencil_shapes(w, padded, out);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(out.size());
  const std::size_t taps = w.size();
  const double* wp = w.data();
  const double* pp = padded.data();
  double* op = out.data();
#pragma omp parallel for schedule(static) if (n > 2048)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* row = pp + i;
    double sum = 0.0;
#pragma omp simd reduction(+ : sum)
    for (std::size_t s = 0; s < taps; ++s) sum += wp[s] * row[s];
    op[i] = sum;
  }
}

void stencil_spectral(std::span<const double> w, std::span<const double> padded, std::span<double> out) {
  check_stencil_shapes(w, padded, out);
  const std::size_t n = out.size();
  const std::size_t two_m = w.size() - 1;
  const std::size_t size = std::bit_ceil(padded.size() + two_m);
  const std::size_t bins = size / 2 + 1;

  auto a = fftw_buffer<double>(size);
  auto b = fftw_buffer<double>(size);
  auto fa = fftw_buffer<fftw_complex>(bins);
  auto fb = fftw_buffer<fftw_complex>(bins);
  Plan forward_a, forward_b, backward;
  {
    std::lock_guard lock(planner_mutex());
    forward_a.reset(fftw_plan_dft_r2c_1d(static_cast<int>(size), a.get(), fa.get(), FFTW_ESTIMATE));
    forward_b.reset(fftw_plan_dft_r2c_1d(static_cast<int>(size), b.get(), fb.get(), FFTW_ESTIMATE));
    backward.reset(fftw_plan_dft_c2r_1d(static_cast<int>(size), fa.get(), a.get(), FFTW_ESTIMATE));
  }
  std::fill_n(a.get(), size, 0.0);
  std::fill_n(b.get(), size, 0.0);
  std::copy(padded.begin(), padded.end(), a.get());
  std::copy(w.begin(), w.end(), b.get());
  fftw_execute(forward_a.get());
  fftw_execute(forward_b.get());
  for (std::size_t k = 0; k < bins; ++k) {
    const std::complex<double> x(fa[k][0], fa[k][1]);
    const std::complex<double> y(fb[k][0], fb[k][1]);
    const auto z = x * y;
    fa[k][0] = z.real();
    fa[k][1] = z.imag();
  }
  fftw_execute(backward.get());
  // linear convolution index i + 2m holds the stencil output for node i (w is even)
  const double scale = 1.0 / static_cast<double>(size);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i + two_m] * scale;
}

std::vector<double> pad_for_convolution(const Field& u, std::size_t m) {
  const std::size_t n = u.size();
  std::vector<double> padded(n + 2 * m, 0.0);
  const bool linear = u.extension == Extension::linear_slope_one;
  for (std::size_t j = 0; j < n; ++j) {
    double w = u.grid.weight(j) / u.grid.h();
    // the right end is interior when the field continues past it
    if (linear && j + 1 == n) w = 1.0;
    padded[m + j] = w * u.values[j];
  }
  if (linear) {
    for (std::size_t g = 1; g <= m; ++g) {
      const double x = u.grid.x_max() + u.grid.h() * static_cast<double>(g);
      padded[m + n - 1 + g] = x + u.extension_offset;
    }
  }
  return padded;
}

Field convolve(const Taps& taps, const Field& u, ConvolutionMethod method) {
  if (std::abs(taps.h - u.grid.h()) > 1e-12 * taps.h) throw std::invalid_argument("convolve: grid spacing does not match the kernel taps");
  const auto padded = pad_for_convolution(u, taps.m);
  Field out(u.grid);
  switch (method) {
    case ConvolutionMethod::direct: stencil_parallel(taps.weights, padded, out.values); break;
    case ConvolutionMethod::direct_serial: stencil_serial(taps.weights, padded, out.values); break;
    case ConvolutionMethod::spectral: stencil_spectral(taps.weights, padded, out.values); break;
  }
  return out;
}

Field convolve(const Kernel& k, const Field& u, ConvolutionMethod method) {
  return convolve(make_taps(k, u.grid.h()), u, method);
}

Field apply_L(const Taps& taps, const Field& u, ConvolutionMethod method) {
  Field out = convolve(taps, u, method);
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] -= u.values[i];
  return out;
}

Field apply_L(const Kernel& k, const Field& u, ConvolutionMethod method) {
  return apply_L(make_taps(k, u.grid.h()), u, method);
}

}  // namespace dipole
