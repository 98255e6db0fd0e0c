#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace attnpipe {

using cdouble = std::complex<double>;

std::size_t next_pow2(std::size_t n);

// In-place iterative Cooley-Tukey; size must be a power of two.
// The inverse transform includes the 1/n scaling.
void fft_pow2(std::vector<cdouble>& a, bool inverse);

// DFT of arbitrary length (radix-2 when possible, Bluestein otherwise).
std::vector<cdouble> dft(const std::vector<cdouble>& a, bool inverse);

// Linear convolution plan: fixed real kernel, fixed input length.
// Two real signals are packed into one complex transform per pass, which
// is exact because the kernel is real.
class RealConvolver {
 public:
  RealConvolver(const std::vector<double>& kernel, std::size_t signal_len);

  std::size_t output_len() const { return out_len_; }

  // y must have room for output_len() values.
  void convolve(const double* x, double* y) const;
  void convolve_pair(const double* x1, const double* x2, double* y1, double* y2) const;

 private:
  std::size_t signal_len_;
  std::size_t kernel_len_;
  std::size_t out_len_;
  std::size_t fft_len_;
  std::vector<cdouble> kernel_spectrum_;
};

}  // namespace attnpipe
