#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "attnpipe/data_model.hpp"
#include "attnpipe/fft.hpp"
#include "attnpipe/linalg.hpp"

namespace attnpipe {

enum class FilterKind { Bandpass, Bandstop };

// Linear-phase FIR kernel (odd length, symmetric taps).
struct FilterKernel {
  std::vector<double> coefficients;
  double fs = 0.0;
  FilterKind kind = FilterKind::Bandpass;
  double lo = 0.0;
  double hi = 0.0;

  std::size_t taps() const { return coefficients.size(); }
};

struct BandDefinition {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

// Theta/Alpha/Beta/Gamma split used for both the filter bank and the
// spectral feature analysis.
const std::vector<BandDefinition>& default_bands();

struct PsdEstimate {
  std::vector<double> freqs;  // Hz, strictly increasing
  std::vector<double> power;  // density, microvolts^2 per Hz
};

// Hamming-windowed sinc design; tap count is the smallest odd integer
// >= 3.3 * fs / transition.
FilterKernel design_fir(FilterKind kind, double lo, double hi, double fs,
                        double transition = 2.0);

// Forward-backward filtering collapsed into one pass with the doubled kernel
// (squared magnitude response, zero net phase). Edges are handled by
// reflection padding of tap-count samples; inputs shorter than taps+1 raise
// TooShort. A cascade shares one padding pass across all kernels.
class ZeroPhaseFilter {
 public:
  ZeroPhaseFilter(const std::vector<FilterKernel>& cascade, std::size_t n_samples);
  ZeroPhaseFilter(const FilterKernel& kernel, std::size_t n_samples);

  std::size_t n_samples() const { return n_samples_; }

  // channels x samples in, same shape out.
  Matrix apply(const Matrix& eeg) const;

 private:
  std::size_t n_samples_ = 0;
  std::size_t pad_ = 0;
  std::vector<double> doubled_kernel_;
  RealConvolver convolver_;

  void filter_pair(const double* a, const double* b, double* out_a, double* out_b) const;
};

Recording filter_zero_phase(const FilterKernel& kernel, const Recording& rec);

// Serial reference path using direct convolution; kept for tests and the
// kernel benchmarks.
Recording filter_zero_phase_direct(const FilterKernel& kernel, const Recording& rec);
Matrix zero_phase_direct(const FilterKernel& kernel, const Matrix& eeg);

Recording rereference_average(const Recording& rec);
Matrix rereference_average(const Matrix& eeg);

Recording interpolate_channels(const Recording& rec, const std::set<std::string>& bad,
                               const ElectrodeMontage& montage);

PsdEstimate welch_psd(std::span<const double> samples, double fs, std::size_t seg_len,
                      double overlap_frac = 0.5);

double band_power(const PsdEstimate& psd, const BandDefinition& band);

// Offline preprocessing: 3-45 Hz bandpass, 49-51 Hz notch, bad-channel
// interpolation, average re-reference. The same function is applied to
// buffered 3 s windows by the streaming classifier.
Recording preprocess(const Recording& rec, const ElectrodeMontage& montage,
                     const std::set<std::string>& bad);
Matrix preprocess_window(const Matrix& eeg, double fs, const ElectrodeMontage& montage,
                         const std::set<std::string>& bad);

}  // namespace attnpipe
