#include "dbarw/lattice.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace dbarw {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::EvenCount: return "EvenCount";
    case Errc::NonAlternating: return "NonAlternating";
    case Errc::DuplicatePosition: return "DuplicatePosition";
    case Errc::InvalidSign: return "InvalidSign";
    case Errc::EmptySite: return "EmptySite";
    case Errc::InteriorOccupied: return "InteriorOccupied";
    case Errc::InvalidRange: return "InvalidRange";
    case Errc::Overflow: return "Overflow";
    case Errc::UnknownFamily: return "UnknownFamily";
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::NoTransitions: return "NoTransitions";
    case Errc::EventBudgetExceeded: return "EventBudgetExceeded";
    case Errc::DominationViolated: return "DominationViolated";
    case Errc::ConstantsInvalid: return "ConstantsInvalid";
    case Errc::ConfigParse: return "ConfigParse";
    case Errc::ModelInvalid: return "ModelInvalid";
  }
  return "Unknown";
}

namespace {

Site checked_add(Site a, Site b) {
  Site out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error(Errc::Overflow, "lattice position overflow");
  }
  return out;
}

// Adds signed unit charges to a configuration.  Every resulting site value
// must lie in {-1, 0, +1}; zeros are annihilated pairs.
Configuration apply_deltas(const Configuration& config,
                           std::initializer_list<std::pair<Site, int>> deltas) {
  std::map<Site, int> values;
  for (const auto& p : config.particles()) values[p.position] = value(p.sign);
  for (const auto& [site, d] : deltas) values[site] += d;
  std::vector<Particle> out;
  out.reserve(values.size());
  for (const auto& [site, v] : values) {
    if (v == 0) continue;
    if (v != 1 && v != -1) {
      throw Error(Errc::NonAlternating, "transition produced site value " + std::to_string(v));
    }
    out.push_back({site, v > 0 ? Sign::plus : Sign::minus});
  }
  return Configuration::from_particles(std::move(out));
}

const Particle& occupant(const Configuration& config, Site site) {
  auto idx = config.index_of(site);
  if (!idx) throw Error(Errc::EmptySite, "no particle at site " + std::to_string(site));
  return config[*idx];
}

}  // namespace

Configuration Configuration::from_particles(std::vector<Particle> particles) {
  for (const auto& p : particles) {
    if (p.sign != Sign::plus && p.sign != Sign::minus) {
      throw Error(Errc::InvalidSign, "particle signs must be +1 or -1");
    }
  }
  if (particles.size() % 2 == 0) {
    throw Error(Errc::EvenCount, "particle count " + std::to_string(particles.size()) + " is even");
  }
  std::sort(particles.begin(), particles.end(),
            [](const Particle& a, const Particle& b) { return a.position < b.position; });
  for (std::size_t i = 1; i < particles.size(); ++i) {
    if (particles[i].position == particles[i - 1].position) {
      throw Error(Errc::DuplicatePosition,
                  "two particles at site " + std::to_string(particles[i].position));
    }
    if (particles[i].sign == particles[i - 1].sign) {
      throw Error(Errc::NonAlternating, "consecutive particles at " +
                                            std::to_string(particles[i - 1].position) + " and " +
                                            std::to_string(particles[i].position) +
                                            " have the same sign");
    }
  }
  return Configuration(std::move(particles));
}

Configuration Configuration::singleton(Site at, Sign sign) {
  return Configuration({Particle{at, sign}});
}

std::optional<std::size_t> Configuration::index_of(Site site) const noexcept {
  auto it = std::lower_bound(particles_.begin(), particles_.end(), site,
                             [](const Particle& p, Site s) { return p.position < s; });
  if (it == particles_.end() || it->position != site) return std::nullopt;
  return static_cast<std::size_t>(it - particles_.begin());
}

std::optional<Sign> Configuration::sign_at(Site site) const noexcept {
  auto idx = index_of(site);
  if (!idx) return std::nullopt;
  return particles_[*idx].sign;
}

std::size_t Configuration::count_in(Site lo, Site hi) const noexcept {
  if (hi < lo) return 0;
  auto cmp = [](const Particle& p, Site s) { return p.position < s; };
  auto first = std::lower_bound(particles_.begin(), particles_.end(), lo, cmp);
  auto last = std::upper_bound(particles_.begin(), particles_.end(), hi,
                               [](Site s, const Particle& p) { return s < p.position; });
  return static_cast<std::size_t>(last - first);
}

Configuration Configuration::translated(Site offset) const {
  std::vector<Particle> out(particles_);
  for (auto& p : out) p.position = checked_add(p.position, offset);
  return Configuration(std::move(out));
}

HeightFunction HeightFunction::from_flips(int left_limit, std::vector<Site> flips) {
  if (left_limit != 0 && left_limit != 1) {
    throw Error(Errc::InvalidSign, "height left limit must be 0 or 1");
  }
  if (flips.size() % 2 == 0) {
    throw Error(Errc::EvenCount, "height function needs an odd number of flips");
  }
  for (std::size_t i = 1; i < flips.size(); ++i) {
    if (flips[i] <= flips[i - 1]) {
      throw Error(Errc::DuplicatePosition, "height flips must be strictly increasing");
    }
  }
  return HeightFunction(left_limit, std::move(flips));
}

int HeightFunction::at(Site cell) const noexcept {
  // Flips at sites <= cell lie to the left of cell + 1/2.
  auto n = std::upper_bound(flips_.begin(), flips_.end(), cell) - flips_.begin();
  return (left_limit_ + static_cast<int>(n % 2)) % 2;
}

HeightFunction to_height(const Configuration& config) {
  std::vector<Site> flips;
  flips.reserve(config.count());
  for (const auto& p : config.particles()) flips.push_back(p.position);
  return HeightFunction::from_flips((1 - config.charge()) / 2, std::move(flips));
}

Configuration to_interface(const HeightFunction& height) {
  std::vector<Particle> out;
  out.reserve(height.flips().size());
  // A 0 -> 1 rise is a positive particle, a 1 -> 0 fall a negative one.
  int current = height.left_limit();
  for (Site s : height.flips()) {
    out.push_back({s, current == 0 ? Sign::plus : Sign::minus});
    current = 1 - current;
  }
  return Configuration::from_particles(std::move(out));
}

std::int64_t f_cd(const Configuration& config) {
  // Segment s (between particles s-1 and s) carries the value kappa when s is
  // odd.  Each kappa segment pairs with every later (1 - kappa) segment.
  std::int64_t kappa_cells_so_far = 0;
  std::int64_t total = 0;
  const auto ps = config.particles();
  for (std::size_t s = 1; s < ps.size(); ++s) {
    std::int64_t len = ps[s].position - ps[s - 1].position;
    if (s % 2 == 1) {
      kappa_cells_so_far += len;
    } else {
      total += kappa_cells_so_far * len;
    }
  }
  return total;
}

Configuration apply_rw(const Configuration& config, Site site, Direction direction) {
  const Particle& p = occupant(config, site);
  Site dest = checked_add(site, direction == Direction::right ? 1 : -1);
  int v = value(p.sign);
  return apply_deltas(config, {{site, -v}, {dest, v}});
}

Configuration apply_branch(const Configuration& config, Site site) {
  const Particle& p = occupant(config, site);
  int v = value(p.sign);
  return apply_deltas(config,
                      {{checked_add(site, -1), v}, {site, -2 * v}, {checked_add(site, 1), v}});
}

bool careful_condition(const Configuration& config, Site site, int range) noexcept {
  if (range < 1) return false;
  return config.count_in(site - range + 1, site - 1) == 0 &&
         config.count_in(site + 1, site + range - 1) == 0;
}

Configuration apply_long_branch(const Configuration& config, Site site, int range) {
  if (range < 2) {
    throw Error(Errc::InvalidRange, "long-range branching needs range >= 2, got " +
                                        std::to_string(range));
  }
  const Particle& p = occupant(config, site);
  Site lo = checked_add(site, -range);
  Site hi = checked_add(site, range);
  if (!careful_condition(config, site, range)) {
    throw Error(Errc::InteriorOccupied, "sites strictly between " + std::to_string(lo) + " and " +
                                            std::to_string(hi) + " are not empty");
  }
  int v = value(p.sign);
  return apply_deltas(config, {{lo, v}, {site, -2 * v}, {hi, v}});
}

std::string to_string(const Configuration& config) {
  std::ostringstream os;
  os << '[';
  bool first = true;
  for (const auto& p : config.particles()) {
    if (!first) os << ',';
    first = false;
    os << '[' << p.position << ',' << value(p.sign) << ']';
  }
  os << ']';
  return os.str();
}

}  // namespace dbarw
