#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lap::pipeline {

struct LatentProjection {
  Eigen::MatrixXd coords;      // n x 2
  Eigen::MatrixXd components;  // dim x 2, zero column when the rank is short
  Eigen::Vector2d variance;    // variance along each component
};

/// Mean-centred PCA to two components. Each component's largest-magnitude
/// loading is made positive. Needs at least 3 vectors of equal dimension.
LatentProjection project_latent(const std::vector<Eigen::VectorXd>& vectors);

/// Mean silhouette over points whose cluster has another member; 0 when no
/// point qualifies or only one cluster exists.
double silhouette_score(const Eigen::MatrixXd& points, const std::vector<int>& labels);

/// `x,y,label` per point.
void write_latent_csv(const std::filesystem::path& path, const Eigen::MatrixXd& coords,
                      const std::vector<int>& labels);

struct ScatterPanel {
  std::string title;
  Eigen::MatrixXd coords;
  std::vector<int> labels;
};

/// Side-by-side scatter plots, one colour per label.
void write_latent_svg(const std::filesystem::path& path, const std::vector<ScatterPanel>& panels);

}  // namespace lap::pipeline
