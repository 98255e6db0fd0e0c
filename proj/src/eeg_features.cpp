#include "attnpipe/eeg_features.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "attnpipe/error.hpp"

namespace attnpipe {

namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr double kCompositeRidge = 1e-8;

Matrix raw_covariance(const Matrix& eeg) {
  const std::size_t d = eeg.rows;
  const std::size_t n = eeg.cols;
  Matrix cov(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const double* xi = eeg.row(i);
    for (std::size_t j = i; j < d; ++j) {
      const double* xj = eeg.row(j);
      double s = 0.0;
      for (std::size_t t = 0; t < n; ++t) s += xi[t] * xj[t];
      const double v = s / static_cast<double>(n);
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return cov;
}

// Solve L^T X = B for lower-triangular L.
Matrix back_substitute_transposed(const Matrix& lower, const Matrix& b) {
  const std::size_t n = lower.rows;
  Matrix x(n, b.cols);
  for (std::size_t j = 0; j < b.cols; ++j) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = b(ii, j);
      for (std::size_t k = ii + 1; k < n; ++k) s -= lower(k, ii) * x(k, j);
      x(ii, j) = s / lower(ii, ii);
    }
  }
  return x;
}

void fix_sign(double* filter, std::size_t d) {
  std::size_t argmax = 0;
  for (std::size_t i = 1; i < d; ++i)
    if (std::abs(filter[i]) > std::abs(filter[argmax])) argmax = i;
  if (filter[argmax] < 0.0)
    for (std::size_t i = 0; i < d; ++i) filter[i] = -filter[i];
}

}  // namespace

Matrix epoch_covariance(const Matrix& eeg) {
  if (eeg.cols <= eeg.rows)
    throw Error(ErrorCode::DegenerateEpoch, "need more samples than channels");
  Matrix cov = raw_covariance(eeg);
  const double tr = trace(cov);
  if (!(tr > 0.0))
    throw Error(ErrorCode::DegenerateEpoch, "epoch has zero variance");
  for (double& v : cov.data) v /= tr;
  return cov;
}

CspFilters fit_csp(const Matrix& c1, const Matrix& c2, int m_pairs) {
  if (c1.rows != c1.cols || c2.rows != c2.cols || c1.rows != c2.rows)
    throw Error(ErrorCode::DimensionMismatch, "covariances must be square and equal size");
  const std::size_t d = c1.rows;
  if (m_pairs < 1 || static_cast<std::size_t>(2 * m_pairs) > d)
    throw Error(ErrorCode::DimensionMismatch, "need 2*m_pairs <= channel count");

  Matrix composite = add(c1, c2);
  for (std::size_t i = 0; i < d; ++i) composite(i, i) += kCompositeRidge;

  Matrix lower;
  if (!cholesky(composite, lower))
    throw Error(ErrorCode::SingularComposite, "composite covariance is not positive definite");

  // whiten: B = L^{-1} C1 L^{-T}, symmetric
  Matrix b = forward_substitute(lower, c1);
  b = forward_substitute(lower, transpose(b));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const double v = 0.5 * (b(i, j) + b(j, i));
      b(i, j) = v;
      b(j, i) = v;
    }

  EigenDecomposition eig = jacobi_eigen_sym(b);
  sort_eigen_desc(eig);
  Matrix w_full = back_substitute_transposed(lower, eig.vectors);

  CspFilters out;
  out.projection = Matrix(static_cast<std::size_t>(2 * m_pairs), d);
  out.eigenvalues.resize(static_cast<std::size_t>(2 * m_pairs));
  for (int k = 0; k < 2 * m_pairs; ++k) {
    const std::size_t col =
        k < m_pairs ? static_cast<std::size_t>(k) : d - static_cast<std::size_t>(2 * m_pairs - k);
    out.eigenvalues[static_cast<std::size_t>(k)] =
        std::clamp(eig.values[col], 0.0, 1.0);
    for (std::size_t i = 0; i < d; ++i)
      out.projection(static_cast<std::size_t>(k), i) = w_full(i, col);
    fix_sign(out.projection.row(static_cast<std::size_t>(k)), d);
  }
  return out;
}

std::vector<WindowBandCovs> band_covariances(const std::vector<EpochWindow>& windows,
                                             const std::vector<BandDefinition>& bands) {
  std::vector<WindowBandCovs> covs(windows.size());
  if (windows.empty()) return covs;

  const double fs = windows.front().fs;
  const std::size_t n = windows.front().eeg.cols;
  std::vector<ZeroPhaseFilter> filters;
  filters.reserve(bands.size());
  for (const auto& band : bands)
    filters.emplace_back(design_fir(FilterKind::Bandpass, band.lo, band.hi, fs), n);

  const std::ptrdiff_t n_windows = static_cast<std::ptrdiff_t>(windows.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n_windows; ++i) {
    const auto& w = windows[static_cast<std::size_t>(i)];
    if (w.eeg.cols != n || w.fs != fs)
      throw Error(ErrorCode::DimensionMismatch, "windows disagree in shape or rate");
    WindowBandCovs& entry = covs[static_cast<std::size_t>(i)];
    entry.band_cov.reserve(bands.size());
    for (const auto& f : filters) entry.band_cov.push_back(raw_covariance(f.apply(w.eeg)));
  }
  return covs;
}

FbcspModel fit_fbcsp_from_covs(const std::vector<WindowBandCovs>& covs,
                               const std::vector<Condition>& labels,
                               const std::vector<BandDefinition>& bands, int m_pairs,
                               double fs, const std::vector<std::string>& channels) {
  if (covs.size() != labels.size())
    throw Error(ErrorCode::DimensionMismatch, "covariance and label counts differ");
  std::size_t n_real = 0, n_virtual = 0;
  for (Condition c : labels) (c == Condition::Real ? n_real : n_virtual)++;
  if (n_real == 0 || n_virtual == 0)
    throw Error(ErrorCode::SingleClassTraining, "training data must contain both conditions");

  FbcspModel model;
  model.bands = bands;
  model.m_pairs = m_pairs;
  model.fs = fs;
  model.channels = channels;

  const std::size_t d = covs.front().band_cov.front().rows;
  for (std::size_t bi = 0; bi < bands.size(); ++bi) {
    Matrix mean_real(d, d), mean_virtual(d, d);
    for (std::size_t i = 0; i < covs.size(); ++i) {
      const Matrix& raw = covs[i].band_cov[bi];
      const double tr = trace(raw);
      if (!(tr > 0.0)) throw Error(ErrorCode::DegenerateEpoch, "window with zero band variance");
      Matrix& dst = labels[i] == Condition::Real ? mean_real : mean_virtual;
      for (std::size_t k = 0; k < raw.data.size(); ++k) dst.data[k] += raw.data[k] / tr;
    }
    for (double& v : mean_real.data) v /= static_cast<double>(n_real);
    for (double& v : mean_virtual.data) v /= static_cast<double>(n_virtual);

    model.per_band.push_back(fit_csp(mean_real, mean_virtual, m_pairs));
    for (int k = 0; k < 2 * m_pairs; ++k)
      model.feature_names.push_back(bands[bi].name + "/csp" + std::to_string(k));
  }
  return model;
}

FbcspModel fit_fbcsp(const std::vector<EpochWindow>& train,
                     const std::vector<BandDefinition>& bands, int m_pairs) {
  if (train.empty())
    throw Error(ErrorCode::SingleClassTraining, "no training windows");
  std::vector<Condition> labels;
  labels.reserve(train.size());
  for (const auto& w : train) labels.push_back(w.condition);
  const auto covs = band_covariances(train, bands);
  return fit_fbcsp_from_covs(covs, labels, bands, m_pairs, train.front().fs, {});
}

FeatureVector fbcsp_features_from_covs(const FbcspModel& model, const WindowBandCovs& covs) {
  if (covs.band_cov.size() != model.bands.size())
    throw Error(ErrorCode::DimensionMismatch, "band count mismatch");
  FeatureVector f;
  f.names = model.feature_names;
  f.values.reserve(model.feature_names.size());
  for (std::size_t bi = 0; bi < model.bands.size(); ++bi) {
    const Matrix& cov = covs.band_cov[bi];
    const Matrix& proj = model.per_band[bi].projection;
    if (cov.rows != proj.cols)
      throw Error(ErrorCode::DimensionMismatch, "channel count mismatch");
    for (std::size_t k = 0; k < proj.rows; ++k) {
      const double* w = proj.row(k);
      double quad = 0.0;
      for (std::size_t i = 0; i < cov.rows; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < cov.cols; ++j) dot += cov(i, j) * w[j];
        quad += w[i] * dot;
      }
      f.values.push_back(std::log(std::max(quad, 0.0) + kVarianceFloor));
    }
  }
  return f;
}

FeatureVector fbcsp_features(const FbcspModel& model, const EpochWindow& window) {
  FeatureVector f;
  f.names = model.feature_names;
  f.values.reserve(model.feature_names.size());
  for (std::size_t bi = 0; bi < model.bands.size(); ++bi) {
    const auto& band = model.bands[bi];
    ZeroPhaseFilter filt(design_fir(FilterKind::Bandpass, band.lo, band.hi, window.fs),
                         window.eeg.cols);
    const Matrix filtered = filt.apply(window.eeg);
    const Matrix& proj = model.per_band[bi].projection;
    if (filtered.rows != proj.cols)
      throw Error(ErrorCode::DimensionMismatch, "channel count mismatch");
    for (std::size_t k = 0; k < proj.rows; ++k) {
      const double* w = proj.row(k);
      double energy = 0.0;
      for (std::size_t t = 0; t < filtered.cols; ++t) {
        double v = 0.0;
        for (std::size_t c = 0; c < filtered.rows; ++c) v += w[c] * filtered(c, t);
        energy += v * v;
      }
      const double variance = energy / static_cast<double>(filtered.cols);
      f.values.push_back(std::log(variance + kVarianceFloor));
    }
  }
  return f;
}

std::string fbcsp_to_json(const FbcspModel& model) {
  nlohmann::json j;
  j["m_pairs"] = model.m_pairs;
  j["fs"] = model.fs;
  j["channels"] = model.channels;
  j["feature_names"] = model.feature_names;
  j["bands"] = nlohmann::json::array();
  for (std::size_t bi = 0; bi < model.bands.size(); ++bi) {
    nlohmann::json jb;
    jb["name"] = model.bands[bi].name;
    jb["lo"] = model.bands[bi].lo;
    jb["hi"] = model.bands[bi].hi;
    jb["eigenvalues"] = model.per_band[bi].eigenvalues;
    jb["rows"] = model.per_band[bi].projection.rows;
    jb["cols"] = model.per_band[bi].projection.cols;
    jb["projection"] = model.per_band[bi].projection.data;  // row-major
    j["bands"].push_back(jb);
  }
  return j.dump(2);
}

FbcspModel fbcsp_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  FbcspModel model;
  model.m_pairs = j.at("m_pairs").get<int>();
  model.fs = j.at("fs").get<double>();
  model.channels = j.at("channels").get<std::vector<std::string>>();
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  for (const auto& jb : j.at("bands")) {
    BandDefinition band{jb.at("name").get<std::string>(), jb.at("lo").get<double>(),
                        jb.at("hi").get<double>()};
    CspFilters filt;
    filt.eigenvalues = jb.at("eigenvalues").get<std::vector<double>>();
    filt.projection.rows = jb.at("rows").get<std::size_t>();
    filt.projection.cols = jb.at("cols").get<std::size_t>();
    filt.projection.data = jb.at("projection").get<std::vector<double>>();
    model.bands.push_back(band);
    model.per_band.push_back(std::move(filt));
  }
  return model;
}

}  // namespace attnpipe
