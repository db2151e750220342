#pragma once

// Linear convolution of nonnegative sequences: a serial direct reference,
// an OpenMP direct kernel (bit-identical to the serial one), and single-threaded
// FFTW, so results do not depend on the thread count.

#include <cstddef>
#include <span>
#include <vector>

namespace stable_llt {

enum class ConvKernel { serial_direct, omp_direct, fft, automatic };

const char* kernel_name(ConvKernel k);

/// out[k] = sum_i a[i] b[k-i], size a.size() + b.size() - 1.
std::vector<double> convolve_serial(std::span<const double> a, std::span<const double> b);
std::vector<double> convolve_omp(std::span<const double> a, std::span<const double> b);
/// r2c/c2r with zero padding to a power of two >= a.size() + b.size() - 1.
std::vector<double> convolve_fft(std::span<const double> a, std::span<const double> b);

/// Kernel chosen by `automatic` for these operand sizes.
ConvKernel choose_kernel(std::size_t na, std::size_t nb);

struct Convolution {
  std::vector<double> values;
  double roundoff = 0.0;  ///< per-entry absolute roundoff bound
  ConvKernel used = ConvKernel::serial_direct;
};

/// Convolution plus a per-entry roundoff bound
/// eps (N |a|_2 |b|_2 + 8 log2(N) min(|a|_1 |b|_2, |a|_2 |b|_1)), N the transform
/// length (FFT) or the number of products per entry (direct).
Convolution convolve(std::span<const double> a, std::span<const double> b, ConvKernel kernel = ConvKernel::automatic);

}  // namespace stable_llt
