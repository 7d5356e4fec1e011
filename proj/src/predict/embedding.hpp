#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "core/vocabulary.hpp"
#include "predict/predictor.hpp"

namespace lap::predict {

enum class EmbeddingKind { ActionLookup, CaptionBagOfWords, VisualPassthrough };

/// Signed feature hashing of a token bag into `dim` buckets, L2-normalised.
/// Every token lands in several buckets so that short phrases rarely cancel.
/// Empty input gives the zero vector.
Eigen::VectorXd hashed_bag_of_words(const core::Tokens& tokens, int dim);

class EmbeddingProvider {
 public:
  /// Lookup table built by hashing each action's description.
  static EmbeddingProvider action_lookup(const core::ActionVocabulary& vocab, int dim = 32);
  /// Lookup table given explicitly, one column per action.
  static EmbeddingProvider action_lookup(Eigen::MatrixXd table);
  static EmbeddingProvider caption_bag_of_words(int dim = 32);
  static EmbeddingProvider visual_passthrough(int dim);
  /// Fixed random linear map in_dim -> out_dim.
  static EmbeddingProvider visual_projection(int in_dim, int out_dim, std::uint64_t seed);

  EmbeddingKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Eigen::MatrixXd& table() const { return table_; }
  const std::optional<Eigen::MatrixXd>& projection() const { return projection_; }

 private:
  EmbeddingKind kind_ = EmbeddingKind::ActionLookup;
  int dim_ = 0;
  Eigen::MatrixXd table_;  // dim x |A|
  std::optional<Eigen::MatrixXd> projection_;
};

/// Action(i) -> table column i; Unknown -> zero vector.
Eigen::VectorXd embed_prediction(const Prediction& prediction, const EmbeddingProvider& provider);

/// Embeds the caption with the least NLL (first one on ties).
Eigen::VectorXd embed_caption(std::span<const ScoredCaption> captions, const EmbeddingProvider& provider);
int least_nll_index(std::span<const ScoredCaption> captions);

Eigen::VectorXd embed_visual(const Eigen::VectorXd& features, const EmbeddingProvider& provider);

/// `dim=<d>` header, then `<id>,<v1>,...,<vd>` per action.
void save_embedding_table(const std::filesystem::path& path, const Eigen::MatrixXd& table);
Eigen::MatrixXd load_embedding_table(const std::filesystem::path& path);

}  // namespace lap::predict
