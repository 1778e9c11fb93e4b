#pragma once

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "camlight/flow.hpp"
#include "camlight/geometry.hpp"
#include "camlight/image.hpp"

namespace camlight {

// Returned by psnr when the inputs are identical.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

// Peak 1. The video form pools the squared error over every frame.
double psnr(const Frame& a, const Frame& b);
double psnr(const Video& a, const Video& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

// Gray = 0.299 R + 0.587 G + 0.114 B.
Plane<double> luminance(const Frame& frame);

// Mean SSIM over all window positions fully inside the image (11x11
// Gaussian, sigma 1.5, dynamic range 1). Video SSIM averages frames.
double ssim(const Frame& a, const Frame& b);
double ssim(const Video& a, const Video& b);

// Mean endpoint error over pixels valid in both fields, pooled over frames.
double motion_preservation(const std::vector<FlowField>& predicted, const std::vector<FlowField>& reference);

enum class NearestBackend { kd_tree, brute_force };

struct ChamferResult {
  double a_to_b = 0.0;
  double b_to_a = 0.0;
  double symmetric = 0.0;  // (a_to_b + b_to_a) / 2
};

using Points = std::vector<Eigen::Vector3d>;

Points positions(const PointCloud& cloud);

// For each query, the squared distance to its nearest reference point.
std::vector<double> nearest_squared(const Points& queries, const Points& reference, NearestBackend backend,
                                    int workers = 1);

// Mean (not squared) nearest-neighbor distances; both backends agree bit
// for bit.
ChamferResult chamfer(const Points& a, const Points& b, NearestBackend backend = NearestBackend::kd_tree,
                      int workers = 1);
ChamferResult chamfer(const PointCloud& a, const PointCloud& b, NearestBackend backend = NearestBackend::kd_tree,
                      int workers = 1);

struct ChamferStats {
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
};

ChamferStats chamfer_stats(std::span<const double> values);

struct VideoMetrics {
  std::string name;
  std::optional<double> psnr;
  std::optional<double> ssim;
  std::optional<double> motion_preservation;
  std::vector<double> chamfer_per_frame;
  // Externally computed scores (FID, CLIP, ...) merged into the same table.
  std::map<std::string, double> external;
};

struct MetricReport {
  std::vector<VideoMetrics> videos;

  // Means of the per-video values; chamfer stats pool every video's frames.
  VideoMetrics aggregate() const;
  std::optional<ChamferStats> chamfer() const;

  // +inf PSNR is written as the string "inf".
  std::string to_json() const;
  // One row per video plus a mean row; columns aligned.
  std::string to_table() const;
};

}  // namespace camlight
