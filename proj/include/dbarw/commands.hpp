#ifndef DBARW_COMMANDS_HPP
#define DBARW_COMMANDS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "dbarw/error.hpp"

namespace dbarw {

struct CliOptions {
  std::string command;
  std::string config;
  unsigned jobs = 1;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
  std::optional<std::int64_t> width;
  std::optional<double> K;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int check_failed = 1;
inline constexpr int config_parse = 2;
inline constexpr int model_invalid = 3;
inline constexpr int event_budget = 4;
inline constexpr int domination = 5;
inline constexpr int other = 6;
}  // namespace exit_code

int exit_code_for(Errc code) noexcept;

/// Runs one subcommand; messages go to out / err.  Never throws.
int run_command(const CliOptions& opt, std::ostream& out, std::ostream& err);

/// Runs fn(0..n-1) on up to `jobs` threads.  The exception of the lowest
/// failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace dbarw

#endif  // DBARW_COMMANDS_HPP
