#pragma once

// Real-to-complex FFT helpers for periodic grids (backed by FFTW).

#include <complex>
#include <span>
#include <vector>

#include "dns/grid.hpp"

namespace dns::spectral {

using Complex = std::complex<double>;

/// Half-complex spectrum of a real periodic field: nkx = nx/2 + 1 columns (kx >= 0)
/// by ny rows, kx fastest.
struct Spectrum {
  int nkx = 0;
  int ny = 0;
  std::vector<Complex> data;

  Complex& at(int a, int b) { return data[static_cast<std::size_t>(b) * nkx + a]; }
  Complex at(int a, int b) const { return data[static_cast<std::size_t>(b) * nkx + a]; }
};

/// Wavenumbers used for first derivatives. The Nyquist entry is zero so that odd
/// derivative symbols map real fields to real fields; second derivatives use the
/// square of the same symbol, which keeps div(grad) equal to the Laplacian.
struct Wavenumbers {
  std::vector<double> kx;  // size nkx
  std::vector<double> ky;  // size ny
};

Wavenumbers derivative_wavenumbers(const GridSpec& spec);

Spectrum forward(const GridSpec& spec, std::span<const double> samples);
/// Normalized inverse transform.
std::vector<double> inverse(const GridSpec& spec, Spectrum spectrum);

}  // namespace dns::spectral
