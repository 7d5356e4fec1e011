#include "predict/embedding.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace lap::predict {

namespace {
constexpr int kHashProbes = 4;
}

Eigen::VectorXd hashed_bag_of_words(const core::Tokens& tokens, int dim) {
  require(dim >= 1, ErrorCode::InvalidArgument, "embedding dim must be >= 1");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  for (const auto& token : tokens) {
    std::uint64_t h = fnv1a64(token);
    for (int probe = 0; probe < kHashProbes; ++probe) {
      h = splitmix64(h);
      const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim));
      v[bucket] += (h >> 63) ? -1.0 : 1.0;
    }
  }
  const double norm = v.norm();
  return norm > 0.0 ? Eigen::VectorXd(v / norm) : v;
}

EmbeddingProvider EmbeddingProvider::action_lookup(const core::ActionVocabulary& vocab, int dim) {
  Eigen::MatrixXd table(dim, vocab.num_actions());
  for (const auto& a : vocab.actions()) table.col(a.id) = hashed_bag_of_words(a.description, dim);
  return action_lookup(std::move(table));
}

EmbeddingProvider EmbeddingProvider::action_lookup(Eigen::MatrixXd table) {
  require(table.rows() >= 1 && table.cols() >= 1, ErrorCode::InvalidArgument, "embedding table is empty");
  EmbeddingProvider p;
  p.kind_ = EmbeddingKind::ActionLookup;
  p.dim_ = static_cast<int>(table.rows());
  p.table_ = std::move(table);
  return p;
}

EmbeddingProvider EmbeddingProvider::caption_bag_of_words(int dim) {
  require(dim >= 1, ErrorCode::InvalidArgument, "embedding dim must be >= 1");
  EmbeddingProvider p;
  p.kind_ = EmbeddingKind::CaptionBagOfWords;
  p.dim_ = dim;
  return p;
}

EmbeddingProvider EmbeddingProvider::visual_passthrough(int dim) {
  require(dim >= 1, ErrorCode::InvalidArgument, "embedding dim must be >= 1");
  EmbeddingProvider p;
  p.kind_ = EmbeddingKind::VisualPassthrough;
  p.dim_ = dim;
  return p;
}

EmbeddingProvider EmbeddingProvider::visual_projection(int in_dim, int out_dim, std::uint64_t seed) {
  require(in_dim >= 1 && out_dim >= 1, ErrorCode::InvalidArgument, "projection dims must be >= 1");
  EmbeddingProvider p = visual_passthrough(out_dim);
  Rng rng = make_rng(seed, "visual-projection");
  Eigen::MatrixXd m(out_dim, in_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(out_dim));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = scale * standard_normal(rng);
  }
  p.projection_ = std::move(m);
  return p;
}

Eigen::VectorXd embed_prediction(const Prediction& prediction, const EmbeddingProvider& provider) {
  require(provider.kind() == EmbeddingKind::ActionLookup, ErrorCode::InvalidArgument,
          "embed_prediction needs an action lookup provider");
  if (prediction.is_unknown()) return Eigen::VectorXd::Zero(provider.dim());
  const int id = *prediction.action;
  require(id >= 0 && id < provider.table().cols(), ErrorCode::InvalidArgument,
          "embedding table does not cover action " + std::to_string(id));
  return provider.table().col(id);
}

int least_nll_index(std::span<const ScoredCaption> captions) {
  require(!captions.empty(), ErrorCode::InvalidArgument, "no captions to embed");
  int best = 0;
  for (std::size_t i = 1; i < captions.size(); ++i) {
    if (captions[i].nll < captions[static_cast<std::size_t>(best)].nll) best = static_cast<int>(i);
  }
  return best;
}

Eigen::VectorXd embed_caption(std::span<const ScoredCaption> captions, const EmbeddingProvider& provider) {
  require(provider.kind() == EmbeddingKind::CaptionBagOfWords, ErrorCode::InvalidArgument,
          "embed_caption needs a caption bag-of-words provider");
  return hashed_bag_of_words(captions[static_cast<std::size_t>(least_nll_index(captions))].tokens, provider.dim());
}

Eigen::VectorXd embed_visual(const Eigen::VectorXd& features, const EmbeddingProvider& provider) {
  require(provider.kind() == EmbeddingKind::VisualPassthrough, ErrorCode::InvalidArgument,
          "embed_visual needs a visual provider");
  if (provider.projection()) {
    require(features.size() == provider.projection()->cols(), ErrorCode::InvalidArgument,
            "visual feature dimension does not match the projection input");
    return *provider.projection() * features;
  }
  require(features.size() == provider.dim(), ErrorCode::InvalidArgument,
          "visual feature dimension " + std::to_string(features.size()) + " does not match provider dim " +
              std::to_string(provider.dim()) + " and no projection is configured");
  return features;
}

void save_embedding_table(const std::filesystem::path& path, const Eigen::MatrixXd& table) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot write " + path.string());
  out << "dim=" << table.rows() << '\n';
  char buf[40];
  for (Eigen::Index a = 0; a < table.cols(); ++a) {
    out << a;
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
      std::snprintf(buf, sizeof(buf), ",%.17g", table(i, a));
      out << buf;
    }
    out << '\n';
  }
}

Eigen::MatrixXd load_embedding_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line.rfind("dim=", 0) == 0, ErrorCode::Parse,
          path.string() + ": missing dim= header");
  const int dim = std::stoi(line.substr(4));
  require(dim >= 1, ErrorCode::Parse, path.string() + ": bad dim");
  std::vector<std::vector<double>> cols;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    std::getline(fields, field, ',');
    require(std::stoi(field) == static_cast<int>(cols.size()), ErrorCode::Parse,
            path.string() + ":" + std::to_string(line_no) + ": ids must be dense and ordered");
    std::vector<double> col;
    while (std::getline(fields, field, ',')) col.push_back(std::stod(field));
    require(static_cast<int>(col.size()) == dim, ErrorCode::Parse,
            path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) + " values");
    cols.push_back(std::move(col));
  }
  Eigen::MatrixXd table(dim, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < cols.size(); ++a) {
    table.col(static_cast<Eigen::Index>(a)) = Eigen::Map<const Eigen::VectorXd>(cols[a].data(), dim);
  }
  return table;
}

}  // namespace lap::predict
