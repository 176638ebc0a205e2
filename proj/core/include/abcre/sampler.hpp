#pragma once

// Rejection ABC: acceptance regions, the accept/reject loop and particle
// estimators.

#include "abcre/models.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace abcre {

enum class Geometry { ball, ellipse, metric };

const char* to_string(Geometry g) noexcept;

// {tau : (tau - c)^T A^-1 (tau - c) <= 1}. Ball and ellipse are the
// diagonal cases A = eps^2 I and A = diag(eps_i^2). Boundary points belong
// to the region.
class AcceptanceRegion {
 public:
  // Empty region; contains() rejects every statistic with dimension_mismatch.
  AcceptanceRegion() = default;

  static AcceptanceRegion ball(const SmallVec& center, double radius);
  static AcceptanceRegion ellipse(const SmallVec& center, const SmallVec& semi_axes);
  static AcceptanceRegion metric(const SmallVec& center, const Eigen::MatrixXd& a);

  Geometry geometry() const noexcept { return geometry_; }
  const SmallVec& center() const noexcept { return center_; }
  std::size_t dim() const noexcept { return center_.size(); }
  // Semi-axes for ball and ellipse.
  const SmallVec& semi_axes() const noexcept { return axes_; }
  // Lower-triangular L with A = L L^T; the region is center + L (unit ball).
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }

  bool contains(std::span<const double> tau) const;

 private:
  AcceptanceRegion retag(Geometry g) &&;

  Geometry geometry_ = Geometry::ball;
  SmallVec center_;
  SmallVec axes_;
  Eigen::MatrixXd factor_;
};

struct AbcRun {
  std::vector<Theta> particles;
  std::vector<std::int64_t> rejections_per_particle;
  std::int64_t total_proposals = 0;
  std::uint64_t seed = 0;
  AcceptanceRegion region;
  int n = 0;
  // False when the proposal budget ran out before K acceptances.
  bool complete = true;

  std::size_t accepted() const noexcept { return particles.size(); }
  // Mean rejections per accepted particle.
  double mean_rejections() const;
};

inline constexpr std::int64_t kDefaultMaxProposals = 1'000'000'000;

// Draws theta from the prior and the statistic from sample_stat until K
// statistics land in the region. One mt19937_64 stream seeded with seed.
AbcRun run_abc(const Params& prior, int n, const AcceptanceRegion& region, std::size_t k,
               std::uint64_t seed, std::int64_t max_proposals = kDefaultMaxProposals);

struct Observable {
  std::string name;
  std::function<double(const Theta&)> h;

  static Observable mean_mu();
  static Observable variance_sigma2();
  static Observable precision_lambda();
  static Observable rate_theta();
  static Observable custom(std::string name, std::function<double(const Theta&)> h);
};

struct Estimate {
  double value = 0.0;
  // Particle standard deviation and standard error; empty when K < 2.
  std::optional<double> sd;
  std::optional<double> std_error;
};

Estimate estimate(const AbcRun& run, const Observable& observable);

}  // namespace abcre
