#pragma once

#include <span>
#include <vector>

#include "dipole/grid_field.hpp"
#include "dipole/kernel.hpp"

namespace dipole {

enum class ConvolutionMethod {
  direct,         // O(N m) stencil, OpenMP over output nodes
  direct_serial,  // same stencil, single-threaded reference
  spectral,       // zero-padded FFT, O(N log N)
};

/// Raw stencil: out[i] = sum_s w[s] padded[i + s], s = 0 .. 2m.
/// `padded` holds N + 2m entries, `out` holds N.
void stencil_serial(std::span<const double> w, std::span<const double> padded, std::span<double> out);
void stencil_parallel(std::span<const double> w, std::span<const double> padded, std::span<double> out);
void stencil_spectral(std::span<const double> w, std::span<const double> padded, std::span<double> out);

/// Quadrature-weighted input with m ghost values on each side, honouring the
/// field's extension rule on the right and zero on the left.
std::vector<double> pad_for_convolution(const Field& u, std::size_t m);

/// (J * u)(x_i) with the grid's quadrature weights.
Field convolve(const Taps& taps, const Field& u, ConvolutionMethod method = ConvolutionMethod::direct);
Field convolve(const Kernel& k, const Field& u, ConvolutionMethod method = ConvolutionMethod::direct);

/// L u = J * u - u.
Field apply_L(const Taps& taps, const Field& u, ConvolutionMethod method = ConvolutionMethod::direct);
Field apply_L(const Kernel& k, const Field& u, ConvolutionMethod method = ConvolutionMethod::direct);

}  // namespace dipole
