#pragma once

// Vendi score: exp of the Shannon entropy of the eigenvalues of K/m for an
// m x m positive semi-definite similarity kernel with unit diagonal.

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cure/embed.hpp"
#include "cure/error.hpp"

namespace cure {

inline constexpr double kPsdTolerance = 1e-8;

/// Entropy is computed on the eigenvalues of K / m. Eigenvalues in
/// [-1e-8, 0) are clipped to zero; anything more negative is Error(NonPsd).
inline double vendi_score(const Eigen::MatrixXd& kernel) {
  const auto m = kernel.rows();
  if (m == 0 || kernel.cols() != m) fail(ErrorKind::InvalidArgument, "vendi_score needs a non-empty square kernel");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kernel / double(m), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorKind::NonPsd, "eigen-decomposition did not converge");
  double entropy = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    double lambda = es.eigenvalues()(i);
    if (lambda < -kPsdTolerance) {
      fail(ErrorKind::NonPsd, "kernel eigenvalue " + std::to_string(lambda) + " below tolerance");
    }
    if (lambda > 0) entropy -= lambda * std::log(lambda);
  }
  return std::exp(entropy);
}

/// Cosine kernel over unit-norm rows.
inline Eigen::MatrixXd cosine_kernel(const Matrix& rows) {
  Eigen::MatrixXd x = rows.cast<double>();
  return x * x.transpose();
}

inline double vendi_score(const EmbeddingSet& s) {
  if (s.empty()) fail(ErrorKind::EmptySet, "vendi_score on an empty set");
  return vendi_score(cosine_kernel(s.rows()));
}

enum class VendiKernel {
  ASSIGNED_COSINE,  ///< cosine between centroids of each seed's assigned artifact
  ATTRIBUTE,        ///< 1 when the assigned artifacts share the selected attribute, else 0
  SEED_COSINE,      ///< cosine between the category-prompt seed embeddings themselves
};

struct VendiInput {
  /// Embeddings of the category-only prompt, one row per seed.
  const EmbeddingSet* category_images = nullptr;
  /// Candidate artifacts in the category and their per-artifact embeddings.
  std::vector<std::string> artifact_names;
  std::vector<const EmbeddingSet*> artifact_images;
  /// Attribute value per artifact (e.g. region or continent), used by ATTRIBUTE.
  std::vector<std::string> artifact_attribute;
  /// Optional per-seed quality scores for qVS.
  std::optional<std::vector<double>> quality;
  VendiKernel kernel = VendiKernel::ASSIGNED_COSINE;
};

struct VendiResult {
  double vs = 0;
  double vs_normalized = 0;  ///< vs / m, in (0, 1]
  std::optional<double> qvs;
  std::vector<std::size_t> assignment;  ///< artifact index per seed
  std::size_t seeds = 0;
};

/// Nearest artifact per category seed by mean cosine to the artifact's seeds.
/// Ties resolve to the lowest artifact index.
inline std::vector<std::size_t> assign_nearest(const EmbeddingSet& category_images,
                                               const std::vector<const EmbeddingSet*>& artifact_images) {
  if (artifact_images.empty()) fail(ErrorKind::MissingEmbedding, "no artifact embedding sets for assignment");
  std::vector<Eigen::VectorXd> sums;
  std::vector<double> counts;
  for (const auto* s : artifact_images) {
    if (!s || s->empty()) fail(ErrorKind::MissingEmbedding, "empty artifact embedding set in assignment");
    if (s->dim() != category_images.dim()) fail(ErrorKind::DimensionMismatch, "assignment dims differ");
    sums.push_back(s->rows().cast<double>().colwise().sum().transpose());
    counts.push_back(double(s->size()));
  }
  std::vector<std::size_t> out(category_images.size());
  for (std::size_t j = 0; j < category_images.size(); ++j) {
    Eigen::VectorXd x = category_images.rows().row(Eigen::Index(j)).cast<double>().transpose();
    std::size_t best = 0;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < sums.size(); ++n) {
      double sim = x.dot(sums[n]) / counts[n];
      if (sim > best_sim) {
        best_sim = sim;
        best = n;
      }
    }
    out[j] = best;
  }
  return out;
}

inline VendiResult score_vendi(const VendiInput& in) {
  if (!in.category_images || in.category_images->empty()) {
    fail(ErrorKind::MissingEmbedding, "score_vendi: missing category-prompt embeddings");
  }
  if (in.artifact_images.size() != in.artifact_names.size()) {
    fail(ErrorKind::InvalidArgument, "score_vendi: artifact names and sets differ in length");
  }
  const auto& cat = *in.category_images;
  const std::size_t m = cat.size();

  VendiResult r;
  r.seeds = m;
  Eigen::MatrixXd K(m, m);
  if (in.kernel == VendiKernel::SEED_COSINE) {
    K = cosine_kernel(cat.rows());
    if (!in.artifact_images.empty()) r.assignment = assign_nearest(cat, in.artifact_images);
  } else {
    r.assignment = assign_nearest(cat, in.artifact_images);
    if (in.kernel == VendiKernel::ATTRIBUTE) {
      if (in.artifact_attribute.size() != in.artifact_images.size()) {
        fail(ErrorKind::InvalidArgument, "score_vendi: attribute kernel needs one attribute per artifact");
      }
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < m; ++k) {
          K(Eigen::Index(j), Eigen::Index(k)) =
              in.artifact_attribute[r.assignment[j]] == in.artifact_attribute[r.assignment[k]] ? 1.0 : 0.0;
        }
      }
    } else {
      std::vector<Eigen::VectorXd> centroid;
      for (const auto* s : in.artifact_images) {
        Eigen::VectorXd c = s->rows().cast<double>().colwise().sum().transpose();
        double n = c.norm();
        if (n == 0) fail(ErrorKind::InvalidArgument, "artifact centroid is zero; cosine undefined");
        centroid.push_back(c / n);
      }
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < m; ++k) {
          K(Eigen::Index(j), Eigen::Index(k)) = centroid[r.assignment[j]].dot(centroid[r.assignment[k]]);
        }
      }
    }
  }

  r.vs = vendi_score(K);
  r.vs_normalized = r.vs / double(m);
  if (in.quality) {
    if (in.quality->size() != m) fail(ErrorKind::InvalidArgument, "score_vendi: one quality score per seed required");
    double q = 0;
    for (double v : *in.quality) {
      if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "non-finite quality score");
      q += v;
    }
    r.qvs = (q / double(m)) * r.vs;
  }
  return r;
}

}  // namespace cure
