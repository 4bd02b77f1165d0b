// Scorers on hand-made embeddings, no files involved.

#include <iostream>

#include "cure/analysis.hpp"
#include "cure/scorers.hpp"
#include "cure/vendi.hpp"

using namespace cure;

int main() {
  auto set = [](std::vector<std::vector<float>> rows) { return EmbeddingSet::from_rows(rows); };

  auto generated = set({{1, 0, 0}, {0.9f, 0.1f, 0}});
  auto ground_truth = set({{1, 0.1f, 0}, {0.8f, 0.2f, 0.1f}, {1, 0, 0.2f}, {0.9f, 0, 0}});
  auto category = set({{0, 1, 0}, {0.2f, 1, 0}, {0, 0.8f, 0.3f}});

  std::cout << "GT similarity        " << score_gt(generated, ground_truth) << '\n';
  std::cout << "PS similarity        " << score_ps(generated, category) << '\n';
  std::cout << "PS divergence (NC)   " << score_ps_divergence(0.62, 0.55) << '\n';

  auto orthogonal = set({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  std::cout << "Vendi (3 orthogonal) " << vendi_score(orthogonal) << '\n';
  std::cout << "Vendi (3 identical)  " << vendi_score(set({{1, 0, 0}, {1, 0, 0}, {1, 0, 0}})) << '\n';

  std::vector<double> scores = {0.31, 0.52, 0.48, 0.77, 0.66};
  std::vector<double> gold = {1.7, 3.0, 2.3, 4.7, 4.0};
  auto rho = spearman_rho(scores, gold);
  std::cout << "Spearman rho         " << (rho ? std::to_string(*rho) : "undefined") << '\n';
}
