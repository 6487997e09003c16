#pragma once

#include <complex>
#include <span>
#include <vector>

// Thin RAII layer over FFTW. Planning is serialized; execution is not.
namespace hydrofeat::detail {

/// Forward real-to-complex DFT; returns bins 0..n/2.
std::vector<std::complex<double>> real_fft(std::span<const double> input);

/// Inverse of real_fft for a length-n signal, unnormalized (FFTW convention).
std::vector<double> inverse_real_fft(std::span<const std::complex<double>> bins, std::size_t n);

} // namespace hydrofeat::detail
