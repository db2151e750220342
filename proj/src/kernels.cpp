#include "stable_llt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>

#include <fftw3.h>

#include "stable_llt/error.hpp"

namespace stable_llt {

namespace {

std::mutex g_plan_mutex;

void check_operands(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("convolve: empty operand");
}

// Entry k summed in increasing i, so serial and parallel loops produce identical bits.
inline double gather(std::span<const double> a, std::span<const double> b, std::size_t k) {
  const std::size_t i0 = k + 1 > b.size() ? k + 1 - b.size() : 0;
  const std::size_t i1 = std::min(k, a.size() - 1);
  double s = 0.0;
  for (std::size_t i = i0; i <= i1; ++i) s += a[i] * b[k - i];
  return s;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

double norm1(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

double norm2(std::span<const double> v) {
  long double s = 0.0L;
  for (double x : v) s += static_cast<long double>(x) * x;
  return static_cast<double>(std::sqrt(s));
}

}  // namespace

const char* kernel_name(ConvKernel k) {
  switch (k) {
    case ConvKernel::serial_direct:
      return "serial_direct";
    case ConvKernel::omp_direct:
      return "omp_direct";
    case ConvKernel::fft:
      return "fft";
    case ConvKernel::automatic:
      return "automatic";
  }
  return "unknown";
}

std::vector<double> convolve_serial(std::span<const double> a, std::span<const double> b) {
  check_operands(a, b);
  std::vector<double> out(a.size() + b.size() - 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = gather(a, b, k);
  return out;
}

std::vector<double> convolve_omp(std::span<const double> a, std::span<const double> b) {
  check_operands(a, b);
  std::vector<double> out(a.size() + b.size() - 1);
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = gather(a, b, static_cast<std::size_t>(k));
  return out;
}

std::vector<double> convolve_fft(std::span<const double> a, std::span<const double> b) {
  check_operands(a, b);
  const std::size_t len = a.size() + b.size() - 1;
  std::size_t n = 1;
  while (n < len) n <<= 1;
  const std::size_t nc = n / 2 + 1;

  std::unique_ptr<double, FftwFree> ra(fftw_alloc_real(n));
  std::unique_ptr<double, FftwFree> rb(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> ca(fftw_alloc_complex(nc));
  std::unique_ptr<fftw_complex, FftwFree> cb(fftw_alloc_complex(nc));
  if (!ra || !rb || !ca || !cb) throw NumericalError("convolve_fft: allocation failed");

  fftw_plan pa, pb, pinv;
  {
    std::lock_guard lock(g_plan_mutex);
    const int ni = static_cast<int>(n);
    pa = fftw_plan_dft_r2c_1d(ni, ra.get(), ca.get(), FFTW_ESTIMATE);
    pb = fftw_plan_dft_r2c_1d(ni, rb.get(), cb.get(), FFTW_ESTIMATE);
    pinv = fftw_plan_dft_c2r_1d(ni, ca.get(), ra.get(), FFTW_ESTIMATE);
  }
  std::fill(ra.get(), ra.get() + n, 0.0);
  std::fill(rb.get(), rb.get() + n, 0.0);
  std::copy(a.begin(), a.end(), ra.get());
  std::copy(b.begin(), b.end(), rb.get());
  fftw_execute(pa);
  fftw_execute(pb);
  auto* za = reinterpret_cast<std::complex<double>*>(ca.get());
  const auto* zb = reinterpret_cast<const std::complex<double>*>(cb.get());
  for (std::size_t i = 0; i < nc; ++i) za[i] *= zb[i];
  fftw_execute(pinv);
  const double scale = 1.0 / static_cast<double>(n);
  std::vector<double> out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = ra.get()[i] * scale;
  {
    std::lock_guard lock(g_plan_mutex);
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(pinv);
  }
  return out;
}

ConvKernel choose_kernel(std::size_t na, std::size_t nb) {
  const std::size_t small = std::min(na, nb);
  if (small <= 48) return ConvKernel::omp_direct;
  if (static_cast<double>(na) * static_cast<double>(nb) <= 1 << 18) return ConvKernel::omp_direct;
  return ConvKernel::fft;
}

Convolution convolve(std::span<const double> a, std::span<const double> b, ConvKernel kernel) {
  check_operands(a, b);
  if (kernel == ConvKernel::automatic) kernel = choose_kernel(a.size(), b.size());
  Convolution c;
  c.used = kernel;
  double length = 0.0;
  switch (kernel) {
    case ConvKernel::serial_direct:
      c.values = convolve_serial(a, b);
      length = static_cast<double>(std::min(a.size(), b.size()));
      break;
    case ConvKernel::omp_direct:
      c.values = convolve_omp(a, b);
      length = static_cast<double>(std::min(a.size(), b.size()));
      break;
    case ConvKernel::fft:
    case ConvKernel::automatic: {
      c.values = convolve_fft(a, b);
      std::size_t n = 1;
      while (n < a.size() + b.size() - 1) n <<= 1;
      length = static_cast<double>(n);
      break;
    }
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double a1 = norm1(a), b1 = norm1(b), a2 = norm2(a), b2 = norm2(b);
  c.roundoff = eps * (length * a2 * b2 + 8.0 * std::log2(std::max(2.0, length)) * std::min(a1 * b2, a2 * b1));
  return c;
}

}  // namespace stable_llt
