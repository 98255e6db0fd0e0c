#pragma once

#include <string>
#include <vector>

#include "attnpipe/epoching.hpp"
#include "attnpipe/linalg.hpp"
#include "attnpipe/signal.hpp"

namespace attnpipe {

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;
};

struct CspFilters {
  Matrix projection;               // (2*m_pairs) x channels, rows are filters
  std::vector<double> eigenvalues; // descending, in [0,1]
};

struct FbcspModel {
  std::vector<BandDefinition> bands;
  std::vector<CspFilters> per_band;
  int m_pairs = 3;
  std::vector<std::string> feature_names;  // "<band>/csp<i>"
  double fs = 500.0;
  std::vector<std::string> channels;
};

// Trace-normalized second-moment matrix of one epoch (bandpassed input is
// zero-mean, so no mean removal happens here).
Matrix epoch_covariance(const Matrix& eeg);

// Generalized eigenproblem C1 w = lambda (C1 + C2) w with a 1e-8 ridge on
// the composite; keeps the m_pairs largest and m_pairs smallest filters.
CspFilters fit_csp(const Matrix& c1, const Matrix& c2, int m_pairs);

FbcspModel fit_fbcsp(const std::vector<EpochWindow>& train,
                     const std::vector<BandDefinition>& bands, int m_pairs);

FeatureVector fbcsp_features(const FbcspModel& model, const EpochWindow& window);

// ----- reduced route -------------------------------------------------------
// Per-band raw covariances are all the classifier stages need; computing
// them once per window keeps repeated splits cheap.

struct WindowBandCovs {
  std::vector<Matrix> band_cov;  // raw (unnormalized-trace) covariance per band
};

std::vector<WindowBandCovs> band_covariances(const std::vector<EpochWindow>& windows,
                                             const std::vector<BandDefinition>& bands);

FbcspModel fit_fbcsp_from_covs(const std::vector<WindowBandCovs>& covs,
                               const std::vector<Condition>& labels,
                               const std::vector<BandDefinition>& bands, int m_pairs,
                               double fs, const std::vector<std::string>& channels);

FeatureVector fbcsp_features_from_covs(const FbcspModel& model, const WindowBandCovs& covs);

std::string fbcsp_to_json(const FbcspModel& model);
FbcspModel fbcsp_from_json(const std::string& text);

}  // namespace attnpipe
