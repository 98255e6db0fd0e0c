#include "attnpipe/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "attnpipe/error.hpp"

namespace attnpipe {

const std::vector<BandDefinition>& default_bands() {
  static const std::vector<BandDefinition> bands = {
      {"Theta", 4.0, 8.0}, {"Alpha", 8.0, 14.0}, {"Beta", 14.0, 30.0}, {"Gamma", 30.0, 45.0}};
  return bands;
}

FilterKernel design_fir(FilterKind kind, double lo, double hi, double fs, double transition) {
  if (!(lo > 0.0) || !(lo < hi) || !(hi < fs / 2.0))
    throw Error(ErrorCode::InvalidBand,
                "need 0 < lo < hi < fs/2, got [" + std::to_string(lo) + ", " + std::to_string(hi) +
                    "] at fs " + std::to_string(fs));
  if (!(transition > 0.0)) throw Error(ErrorCode::InvalidBand, "transition width must be positive");

  std::size_t taps = static_cast<std::size_t>(std::ceil(3.3 * fs / transition));
  if (taps % 2 == 0) ++taps;
  const std::size_t half = (taps - 1) / 2;

  // Build one side and mirror so the symmetry holds bitwise.
  std::vector<double> h(taps, 0.0);
  for (std::size_t d = 0; d <= half; ++d) {
    double ideal;
    if (d == 0) {
      ideal = 2.0 * (hi - lo) / fs;
    } else {
      const double x = static_cast<double>(d);
      ideal = (std::sin(2.0 * M_PI * hi * x / fs) - std::sin(2.0 * M_PI * lo * x / fs)) /
              (M_PI * x);
    }
    const double w =
        0.54 + 0.46 * std::cos(M_PI * static_cast<double>(d) / static_cast<double>(half));
    const double v = ideal * w;
    h[half + d] = v;
    h[half - d] = v;
  }
  if (kind == FilterKind::Bandstop) {
    for (double& v : h) v = -v;
    h[half] += 1.0;
  }

  FilterKernel k;
  k.coefficients = std::move(h);
  k.fs = fs;
  k.kind = kind;
  k.lo = lo;
  k.hi = hi;
  return k;
}

namespace {

std::vector<double> convolve_full_direct(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ai = a[i];
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += ai * b[j];
  }
  return out;
}

std::vector<double> doubled_cascade_kernel(const std::vector<FilterKernel>& cascade) {
  std::vector<double> g = {1.0};
  for (const auto& k : cascade) {
    g = convolve_full_direct(g, k.coefficients);
    g = convolve_full_direct(g, k.coefficients);
  }
  return g;
}

std::size_t cascade_pad(const std::vector<FilterKernel>& cascade) {
  std::size_t pad = 0;
  for (const auto& k : cascade) pad += k.taps();
  return pad;
}

void reflect_pad(const double* x, std::size_t n, std::size_t pad, std::vector<double>& out) {
  out.resize(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) out[i] = x[pad - i];
  std::copy(x, x + n, out.begin() + static_cast<std::ptrdiff_t>(pad));
  for (std::size_t i = 0; i < pad; ++i) out[pad + n + i] = x[n - 2 - i];
}

}  // namespace

ZeroPhaseFilter::ZeroPhaseFilter(const std::vector<FilterKernel>& cascade, std::size_t n_samples)
    : n_samples_(n_samples),
      pad_(cascade_pad(cascade)),
      doubled_kernel_(doubled_cascade_kernel(cascade)),
      convolver_(doubled_kernel_, n_samples + 2 * cascade_pad(cascade)) {
  if (cascade.empty()) throw Error(ErrorCode::InvalidBand, "empty filter cascade");
  if (n_samples_ <= pad_)
    throw Error(ErrorCode::TooShort, "need more than " + std::to_string(pad_) +
                                         " samples, got " + std::to_string(n_samples_));
}

ZeroPhaseFilter::ZeroPhaseFilter(const FilterKernel& kernel, std::size_t n_samples)
    : ZeroPhaseFilter(std::vector<FilterKernel>{kernel}, n_samples) {}

void ZeroPhaseFilter::filter_pair(const double* a, const double* b, double* out_a,
                                  double* out_b) const {
  std::vector<double> pa, pb;
  reflect_pad(a, n_samples_, pad_, pa);
  reflect_pad(b, n_samples_, pad_, pb);
  std::vector<double> ya(convolver_.output_len()), yb(convolver_.output_len());
  convolver_.convolve_pair(pa.data(), pb.data(), ya.data(), yb.data());
  // doubled kernel center = (len-1)/2; padded sample i sits at offset pad
  const std::size_t shift = pad_ + (doubled_kernel_.size() - 1) / 2;
  std::copy(ya.begin() + static_cast<std::ptrdiff_t>(shift),
            ya.begin() + static_cast<std::ptrdiff_t>(shift + n_samples_), out_a);
  std::copy(yb.begin() + static_cast<std::ptrdiff_t>(shift),
            yb.begin() + static_cast<std::ptrdiff_t>(shift + n_samples_), out_b);
}

Matrix ZeroPhaseFilter::apply(const Matrix& eeg) const {
  if (eeg.cols != n_samples_)
    throw Error(ErrorCode::DimensionMismatch, "filter planned for a different sample count");
  Matrix out(eeg.rows, eeg.cols);
  const std::ptrdiff_t n_pairs = static_cast<std::ptrdiff_t>((eeg.rows + 1) / 2);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n_pairs; ++p) {
    const std::size_t c0 = static_cast<std::size_t>(2 * p);
    const std::size_t c1 = std::min(c0 + 1, eeg.rows - 1);
    if (c1 > c0) {
      filter_pair(eeg.row(c0), eeg.row(c1), out.row(c0), out.row(c1));
    } else {
      std::vector<double> zeros(n_samples_, 0.0), scratch(n_samples_);
      filter_pair(eeg.row(c0), zeros.data(), out.row(c0), scratch.data());
    }
  }
  return out;
}

Recording filter_zero_phase(const FilterKernel& kernel, const Recording& rec) {
  ZeroPhaseFilter f(kernel, rec.n_samples());
  Recording out = rec;
  out.samples = f.apply(rec.samples);
  return out;
}

Matrix zero_phase_direct(const FilterKernel& kernel, const Matrix& eeg) {
  const std::size_t n = eeg.cols;
  const std::size_t pad = kernel.taps();
  if (n <= pad) throw Error(ErrorCode::TooShort, "input shorter than kernel padding");
  const std::vector<double> g =
      convolve_full_direct(kernel.coefficients, kernel.coefficients);
  const std::size_t center = (g.size() - 1) / 2;
  Matrix out(eeg.rows, eeg.cols);
  std::vector<double> padded;
  for (std::size_t c = 0; c < eeg.rows; ++c) {
    reflect_pad(eeg.row(c), n, pad, padded);
    for (std::size_t i = 0; i < n; ++i) {
      // y[i] = sum_k padded[i + pad + center - k] * g[k]
      double acc = 0.0;
      const std::size_t base = i + pad + center;
      for (std::size_t k = 0; k < g.size(); ++k) acc += padded[base - k] * g[k];
      out(c, i) = acc;
    }
  }
  return out;
}

Recording filter_zero_phase_direct(const FilterKernel& kernel, const Recording& rec) {
  Recording out = rec;
  out.samples = zero_phase_direct(kernel, rec.samples);
  return out;
}

Matrix rereference_average(const Matrix& eeg) {
  Matrix out = eeg;
  for (std::size_t t = 0; t < eeg.cols; ++t) {
    double mean = 0.0;
    for (std::size_t c = 0; c < eeg.rows; ++c) mean += eeg(c, t);
    mean /= static_cast<double>(eeg.rows);
    for (std::size_t c = 0; c < eeg.rows; ++c) out(c, t) -= mean;
  }
  return out;
}

Recording rereference_average(const Recording& rec) {
  Recording out = rec;
  out.samples = rereference_average(rec.samples);
  return out;
}

namespace {

double great_circle(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

}  // namespace

Recording interpolate_channels(const Recording& rec, const std::set<std::string>& bad,
                               const ElectrodeMontage& montage) {
  for (const auto& label : bad) {
    if (!montage.index_of(label))
      throw Error(ErrorCode::InvariantViolation, "bad channel '" + label + "' not in montage");
  }
  std::vector<std::size_t> good;
  std::vector<std::size_t> bad_idx;
  for (std::size_t c = 0; c < montage.size(); ++c) {
    if (bad.count(montage.names[c]))
      bad_idx.push_back(c);
    else
      good.push_back(c);
  }
  if (good.size() < 4)
    throw Error(ErrorCode::TooFewGoodChannels,
                "need at least 4 good channels, have " + std::to_string(good.size()));

  Recording out = rec;
  for (std::size_t b : bad_idx) {
    std::vector<std::pair<double, std::size_t>> by_distance;
    for (std::size_t g : good)
      by_distance.emplace_back(great_circle(montage.positions[b], montage.positions[g]), g);
    std::sort(by_distance.begin(), by_distance.end());

    if (by_distance.front().first < 1e-12) {
      // coincident electrode: copy it
      const std::size_t src = by_distance.front().second;
      std::copy(rec.samples.row(src), rec.samples.row(src) + rec.n_samples(),
                out.samples.row(b));
      continue;
    }

    const std::size_t k = std::min<std::size_t>(4, by_distance.size());
    std::vector<double> weights(k);
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      weights[i] = 1.0 / (by_distance[i].first * by_distance[i].first);
      weight_sum += weights[i];
    }
    double* dst = out.samples.row(b);
    std::fill(dst, dst + rec.n_samples(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      const double w = weights[i] / weight_sum;
      const double* src = rec.samples.row(by_distance[i].second);
      for (std::size_t t = 0; t < rec.n_samples(); ++t) dst[t] += w * src[t];
    }
  }
  return out;
}

PsdEstimate welch_psd(std::span<const double> samples, double fs, std::size_t seg_len,
                      double overlap_frac) {
  if (samples.size() < seg_len || seg_len < 2)
    throw Error(ErrorCode::TooShort, "series shorter than one segment");
  if (overlap_frac < 0.0 || overlap_frac >= 1.0)
    throw Error(ErrorCode::InvalidBand, "overlap fraction must be in [0,1)");

  const std::size_t hop =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(
                                   static_cast<double>(seg_len) * (1.0 - overlap_frac))));
  const std::size_t n_segments = 1 + (samples.size() - seg_len) / hop;

  std::vector<double> window(seg_len);
  double win_power = 0.0;
  for (std::size_t i = 0; i < seg_len; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                       static_cast<double>(seg_len - 1));
    win_power += window[i] * window[i];
  }

  const std::size_t n_bins = seg_len / 2 + 1;
  std::vector<double> acc(n_bins, 0.0);

  // Two windowed segments ride one complex transform; the spectra separate
  // exactly because both inputs are real.
  std::vector<cdouble> buf(seg_len);
  for (std::size_t s = 0; s < n_segments; s += 2) {
    const double* a = samples.data() + s * hop;
    const bool paired = (s + 1) < n_segments;
    const double* b = paired ? samples.data() + (s + 1) * hop : nullptr;
    for (std::size_t i = 0; i < seg_len; ++i)
      buf[i] = cdouble(window[i] * a[i], paired ? window[i] * b[i] : 0.0);
    const std::vector<cdouble> z = dft(buf, false);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const cdouble zk = z[k];
      const cdouble zn = std::conj(z[(seg_len - k) % seg_len]);
      const cdouble ak = 0.5 * (zk + zn);
      const cdouble bk = cdouble(0.0, -0.5) * (zk - zn);
      acc[k] += std::norm(ak);
      if (paired) acc[k] += std::norm(bk);
    }
  }

  PsdEstimate psd;
  psd.freqs.resize(n_bins);
  psd.power.resize(n_bins);
  const double df = fs / static_cast<double>(seg_len);
  const double scale = 1.0 / (fs * win_power * static_cast<double>(n_segments));
  for (std::size_t k = 0; k < n_bins; ++k) {
    psd.freqs[k] = df * static_cast<double>(k);
    double p = acc[k] * scale;
    const bool is_nyquist = (seg_len % 2 == 0) && (k == n_bins - 1);
    if (k != 0 && !is_nyquist) p *= 2.0;  // one-sided
    psd.power[k] = p;
  }
  return psd;
}

double band_power(const PsdEstimate& psd, const BandDefinition& band) {
  if (psd.freqs.size() < 2)
    throw Error(ErrorCode::BandOutOfRange, "psd grid too small");
  if (band.lo < psd.freqs.front() || band.hi > psd.freqs.back() || band.lo >= band.hi)
    throw Error(ErrorCode::BandOutOfRange,
                band.name + " [" + std::to_string(band.lo) + ", " + std::to_string(band.hi) +
                    "] outside psd range");

  auto interp = [&](double f) {
    const auto it = std::lower_bound(psd.freqs.begin(), psd.freqs.end(), f);
    std::size_t hi_idx = static_cast<std::size_t>(it - psd.freqs.begin());
    if (hi_idx == 0) return psd.power.front();
    if (hi_idx >= psd.freqs.size()) return psd.power.back();
    const std::size_t lo_idx = hi_idx - 1;
    const double t = (f - psd.freqs[lo_idx]) / (psd.freqs[hi_idx] - psd.freqs[lo_idx]);
    return psd.power[lo_idx] * (1.0 - t) + psd.power[hi_idx] * t;
  };

  double integral = 0.0;
  double prev_f = band.lo;
  double prev_p = interp(band.lo);
  for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
    const double f = psd.freqs[k];
    if (f <= band.lo) continue;
    if (f >= band.hi) break;
    integral += 0.5 * (prev_p + psd.power[k]) * (f - prev_f);
    prev_f = f;
    prev_p = psd.power[k];
  }
  integral += 0.5 * (prev_p + interp(band.hi)) * (band.hi - prev_f);
  return std::max(0.0, integral);
}

Recording preprocess(const Recording& rec, const ElectrodeMontage& montage,
                     const std::set<std::string>& bad) {
  const FilterKernel bp = design_fir(FilterKind::Bandpass, 3.0, 45.0, rec.fs);
  const FilterKernel notch = design_fir(FilterKind::Bandstop, 49.0, 51.0, rec.fs);
  Recording out = rec;
  if (rec.n_samples() > bp.taps() + notch.taps()) {
    // long recordings: one padding pass shared by both kernels
    ZeroPhaseFilter cascade({bp, notch}, rec.n_samples());
    out.samples = cascade.apply(rec.samples);
  } else {
    // buffered windows are too short for the combined padding
    out = filter_zero_phase(bp, out);
    out = filter_zero_phase(notch, out);
  }
  out = interpolate_channels(out, bad, montage);
  out.samples = rereference_average(out.samples);
  return out;
}

Matrix preprocess_window(const Matrix& eeg, double fs, const ElectrodeMontage& montage,
                         const std::set<std::string>& bad) {
  Recording rec;
  rec.samples = eeg;
  rec.fs = fs;
  return preprocess(rec, montage, bad).samples;
}

}  // namespace attnpipe
