#include "pipeline/latent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "common/error.hpp"

namespace lap::pipeline {

LatentProjection project_latent(const std::vector<Eigen::VectorXd>& vectors) {
  require(vectors.size() >= 3, ErrorCode::InvalidArgument, "project_latent needs at least 3 vectors");
  const Eigen::Index dim = vectors.front().size();
  require(dim >= 1, ErrorCode::InvalidArgument, "project_latent: empty vectors");
  const auto n = static_cast<Eigen::Index>(vectors.size());
  Eigen::MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& v = vectors[static_cast<std::size_t>(i)];
    require(v.size() == dim, ErrorCode::InvalidArgument, "project_latent: vectors differ in dimension");
    x.row(i) = v.transpose();
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  LatentProjection out;
  out.components = Eigen::MatrixXd::Zero(dim, 2);
  out.variance.setZero();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double scale = s.size() > 0 ? s[0] : 0.0;
  const double tol = std::max(1e-12, scale * 1e-10 * static_cast<double>(std::max(n, dim)));
  for (int c = 0; c < 2 && c < s.size(); ++c) {
    if (s[c] <= tol) break;  // rank-deficient: leave the zero column
    Eigen::VectorXd axis = svd.matrixV().col(c);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < axis.size(); ++i) {
      if (std::abs(axis[i]) > std::abs(axis[arg]) + 1e-12) arg = i;
    }
    if (axis[arg] < 0) axis = -axis;
    out.components.col(c) = axis;
    out.variance[c] = s[c] * s[c] / static_cast<double>(n > 1 ? n - 1 : 1);
  }
  out.coords = x * out.components;
  return out;
}

double silhouette_score(const Eigen::MatrixXd& points, const std::vector<int>& labels) {
  const auto n = static_cast<std::size_t>(points.rows());
  require(labels.size() == n, ErrorCode::InvalidArgument, "silhouette_score: label count mismatch");
  std::map<int, int> sizes;
  for (int l : labels) ++sizes[l];
  if (sizes.size() < 2) return 0.0;
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[labels[i]] < 2) continue;
    std::map<int, double> sum;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[labels[j]] += (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm();
    }
    const double a = sum[labels[i]] / (sizes[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, s] : sum) {
      if (label != labels[i]) b = std::min(b, s / sizes[label]);
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
    ++counted;
  }
  return counted ? total / static_cast<double>(counted) : 0.0;
}

void write_latent_csv(const std::filesystem::path& path, const Eigen::MatrixXd& coords,
                      const std::vector<int>& labels) {
  require(static_cast<std::size_t>(coords.rows()) == labels.size(), ErrorCode::InvalidArgument,
          "write_latent_csv: label count mismatch");
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot write " + path.string());
  out << "x,y,label\n";
  char buf[96];
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%d\n", coords(i, 0), coords(i, 1), labels[static_cast<std::size_t>(i)]);
    out << buf;
  }
}

void write_latent_svg(const std::filesystem::path& path, const std::vector<ScatterPanel>& panels) {
  constexpr double kPanel = 320.0, kPad = 24.0;
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot write " + path.string());
  const double width = kPanel * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n", width,
                kPanel + kPad);
  out << buf;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& panel = panels[p];
    const double x0 = kPanel * static_cast<double>(p);
    double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0;
    if (panel.coords.rows() > 0) {
      lo_x = panel.coords.col(0).minCoeff();
      hi_x = panel.coords.col(0).maxCoeff();
      lo_y = panel.coords.col(1).minCoeff();
      hi_y = panel.coords.col(1).maxCoeff();
    }
    const double sx = hi_x > lo_x ? (kPanel - 2 * kPad) / (hi_x - lo_x) : 0.0;
    const double sy = hi_y > lo_y ? (kPanel - 2 * kPad) / (hi_y - lo_y) : 0.0;
    std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"16\" font-size=\"13\">%s</text>\n", x0 + kPad,
                  panel.title.c_str());
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"#999\"/>\n",
                  x0 + kPad / 2, kPad, kPanel - kPad, kPanel - kPad);
    out << buf;
    for (Eigen::Index i = 0; i < panel.coords.rows(); ++i) {
      const double cx = x0 + kPad + (panel.coords(i, 0) - lo_x) * sx + (sx == 0 ? (kPanel - 2 * kPad) / 2 : 0);
      const double cy = kPad + (kPanel - 2 * kPad) - (panel.coords(i, 1) - lo_y) * sy -
                        (sy == 0 ? (kPanel - 2 * kPad) / 2 : 0) + kPad / 2;
      const int label = panel.labels[static_cast<std::size_t>(i)];
      std::snprintf(buf, sizeof(buf), "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\" fill-opacity=\"0.7\"/>\n",
                    cx, cy, palette[static_cast<std::size_t>(((label % 10) + 10) % 10)]);
      out << buf;
    }
  }
  out << "</svg>\n";
}

}  // namespace lap::pipeline
