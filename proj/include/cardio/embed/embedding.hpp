#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cardio::embed {

enum class RowRole { Case, Center };
enum class Method { Pca, Tsne };

struct Embedding {
  Eigen::MatrixXd coords;  // rows x 2
  std::vector<RowRole> roles;
  Method method = Method::Pca;
  // t-SNE only.
  double kl = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
};

/// CSV `id,role,dim1,dim2,cluster`. The cluster column is omitted when
/// `clusters` is empty. Throws ValidationError on length mismatch.
void write_embedding_csv(std::ostream& out, const Embedding& embedding, const std::vector<std::string>& ids,
                         const std::vector<std::size_t>& clusters = {});

}  // namespace cardio::embed
