#ifndef DBARW_LATTICE_HPP
#define DBARW_LATTICE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dbarw/error.hpp"

namespace dbarw {

using Site = std::int64_t;

enum class Sign : int { minus = -1, plus = 1 };

constexpr int value(Sign s) noexcept { return static_cast<int>(s); }
constexpr Sign opposite(Sign s) noexcept { return s == Sign::plus ? Sign::minus : Sign::plus; }

struct Particle {
  Site position = 0;
  Sign sign = Sign::plus;

  friend bool operator==(const Particle&, const Particle&) = default;
};

/// Finite alternating-sign particle configuration with an odd number of
/// particles.  Immutable once constructed; every instance is valid.
class Configuration {
 public:
  /// Sorts by position and validates oddness, alternation and distinctness.
  static Configuration from_particles(std::vector<Particle> particles);
  static Configuration singleton(Site at, Sign sign = Sign::plus);

  std::span<const Particle> particles() const noexcept { return particles_; }
  const Particle& operator[](std::size_t i) const noexcept { return particles_[i]; }
  std::size_t count() const noexcept { return particles_.size(); }
  bool is_singleton() const noexcept { return particles_.size() == 1; }

  /// Sum of signs; equals the sign of the leftmost and the rightmost particle.
  int charge() const noexcept { return value(particles_.front().sign); }
  Site left() const noexcept { return particles_.front().position; }
  Site right() const noexcept { return particles_.back().position; }
  std::int64_t width() const noexcept { return right() - left() + 1; }

  std::optional<std::size_t> index_of(Site site) const noexcept;
  std::optional<Sign> sign_at(Site site) const noexcept;
  bool occupied(Site site) const noexcept { return index_of(site).has_value(); }
  /// Number of particles with position in the closed range [lo, hi].
  std::size_t count_in(Site lo, Site hi) const noexcept;

  Configuration translated(Site offset) const;

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  explicit Configuration(std::vector<Particle> particles) : particles_(std::move(particles)) {}

  std::vector<Particle> particles_;
};

/// {0,1}-valued profile on the half-integer lattice.  Half-integer site m+1/2
/// is addressed by its left integer neighbour m ("cell m").  The value flips
/// exactly across each entry of flips().
class HeightFunction {
 public:
  static HeightFunction from_flips(int left_limit, std::vector<Site> flips);

  int left_limit() const noexcept { return left_limit_; }
  int right_limit() const noexcept { return 1 - left_limit_; }
  std::span<const Site> flips() const noexcept { return flips_; }
  /// Height at the half-integer site cell + 1/2.
  int at(Site cell) const noexcept;

  friend bool operator==(const HeightFunction&, const HeightFunction&) = default;

 private:
  HeightFunction(int left_limit, std::vector<Site> flips)
      : left_limit_(left_limit), flips_(std::move(flips)) {}

  int left_limit_ = 0;
  std::vector<Site> flips_;
};

HeightFunction to_height(const Configuration& config);
Configuration to_interface(const HeightFunction& height);

/// (1 + charge) / 2: the height value that counts as "wrongly placed" on the left.
inline int kappa(const Configuration& config) noexcept { return (1 + config.charge()) / 2; }

/// Number of inversions of the height profile relative to the Heaviside
/// profile of the same charge.
std::int64_t f_cd(const Configuration& config);

/// Configuration as seen from its leftmost particle (leftmost at offset 0).
class AnchoredConfiguration {
 public:
  explicit AnchoredConfiguration(const Configuration& config)
      : shape_(config.translated(-config.left())), offset_(config.left()) {}

  const Configuration& shape() const noexcept { return shape_; }
  Site offset() const noexcept { return offset_; }

  friend bool operator==(const AnchoredConfiguration& a, const AnchoredConfiguration& b) {
    return a.shape_ == b.shape_;
  }

 private:
  Configuration shape_;
  Site offset_;
};

enum class Direction { left, right };

Configuration apply_rw(const Configuration& config, Site site, Direction direction);
Configuration apply_branch(const Configuration& config, Site site);
/// Branching to distance range >= 2; requires every site strictly between
/// site - range and site + range, other than site itself, to be empty.
Configuration apply_long_branch(const Configuration& config, Site site, int range);
bool careful_condition(const Configuration& config, Site site, int range) noexcept;

std::string to_string(const Configuration& config);

}  // namespace dbarw

#endif  // DBARW_LATTICE_HPP
