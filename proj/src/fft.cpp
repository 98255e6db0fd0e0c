#include "attnpipe/fft.hpp"

#include <cassert>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace attnpipe {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_pow2(std::vector<cdouble>& a, bool inverse) {
  const std::size_t n = a.size();
  assert((n & (n - 1)) == 0);
  if (n <= 1) return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const cdouble wlen = std::polar(1.0, ang);
    for (std::size_t i = 0; i < n; i += len) {
      cdouble w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const cdouble u = a[i + j];
        const cdouble v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (cdouble& x : a) x *= inv_n;
  }
}

namespace {

struct BluesteinPlan {
  std::size_t n = 0;
  std::size_t m = 0;                    // padded power-of-two length >= 2n-1
  std::vector<cdouble> chirp;           // e^{-i pi k^2 / n}
  std::vector<cdouble> kernel_spectrum; // FFT of wrapped conjugate chirp
};

std::shared_ptr<const BluesteinPlan> bluestein_plan(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const BluesteinPlan>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
  }

  auto plan = std::make_shared<BluesteinPlan>();
  plan->n = n;
  plan->m = next_pow2(2 * n - 1);
  plan->chirp.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the phase argument small for large n.
    const std::size_t k2 = (k * k) % (2 * n);
    plan->chirp[k] = std::polar(1.0, -M_PI * static_cast<double>(k2) / static_cast<double>(n));
  }
  std::vector<cdouble> b(plan->m, cdouble(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    const cdouble v = std::conj(plan->chirp[k]);
    b[k] = v;
    if (k > 0) b[plan->m - k] = v;
  }
  fft_pow2(b, false);
  plan->kernel_spectrum = std::move(b);

  std::lock_guard<std::mutex> lock(mu);
  auto [it, ok] = cache.emplace(n, plan);
  (void)ok;
  return it->second;
}

std::vector<cdouble> bluestein(const std::vector<cdouble>& x, bool inverse) {
  const std::size_t n = x.size();
  auto plan = bluestein_plan(n);

  std::vector<cdouble> a(plan->m, cdouble(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    const cdouble c = inverse ? std::conj(plan->chirp[k]) : plan->chirp[k];
    a[k] = x[k] * c;
  }
  fft_pow2(a, false);
  if (inverse) {
    // conj of the forward kernel spectrum corresponds to the conjugate chirp
    for (std::size_t k = 0; k < plan->m; ++k)
      a[k] *= std::conj(plan->kernel_spectrum[k]);
  } else {
    for (std::size_t k = 0; k < plan->m; ++k) a[k] *= plan->kernel_spectrum[k];
  }
  fft_pow2(a, true);

  std::vector<cdouble> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const cdouble c = inverse ? std::conj(plan->chirp[k]) : plan->chirp[k];
    out[k] = a[k] * c;
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (cdouble& v : out) v *= inv_n;
  }
  return out;
}

}  // namespace

std::vector<cdouble> dft(const std::vector<cdouble>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0) return {};
  if ((n & (n - 1)) == 0) {
    std::vector<cdouble> out = a;
    fft_pow2(out, inverse);
    return out;
  }
  return bluestein(a, inverse);
}

RealConvolver::RealConvolver(const std::vector<double>& kernel, std::size_t signal_len)
    : signal_len_(signal_len),
      kernel_len_(kernel.size()),
      out_len_(signal_len + kernel.size() - 1),
      fft_len_(next_pow2(out_len_)) {
  std::vector<cdouble> k(fft_len_, cdouble(0.0, 0.0));
  for (std::size_t i = 0; i < kernel_len_; ++i) k[i] = cdouble(kernel[i], 0.0);
  fft_pow2(k, false);
  kernel_spectrum_ = std::move(k);
}

void RealConvolver::convolve_pair(const double* x1, const double* x2, double* y1,
                                  double* y2) const {
  std::vector<cdouble> buf(fft_len_, cdouble(0.0, 0.0));
  for (std::size_t i = 0; i < signal_len_; ++i) buf[i] = cdouble(x1[i], x2[i]);
  fft_pow2(buf, false);
  for (std::size_t i = 0; i < fft_len_; ++i) buf[i] *= kernel_spectrum_[i];
  fft_pow2(buf, true);
  for (std::size_t i = 0; i < out_len_; ++i) {
    y1[i] = buf[i].real();
    y2[i] = buf[i].imag();
  }
}

void RealConvolver::convolve(const double* x, double* y) const {
  std::vector<double> scratch(out_len_);
  std::vector<double> zeros(signal_len_, 0.0);
  convolve_pair(x, zeros.data(), y, scratch.data());
}

}  // namespace attnpipe
