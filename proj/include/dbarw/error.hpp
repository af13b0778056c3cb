#ifndef DBARW_ERROR_HPP
#define DBARW_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace dbarw {

enum class Errc {
  // lattice
  EvenCount,
  NonAlternating,
  DuplicatePosition,
  InvalidSign,
  EmptySite,
  InteriorOccupied,
  InvalidRange,
  Overflow,
  // rates
  UnknownFamily,
  InvalidParameter,
  // engine / dominators / diagnostics
  NoTransitions,
  EventBudgetExceeded,
  DominationViolated,
  ConstantsInvalid,
  // configuration
  ConfigParse,
  ModelInvalid,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dbarw

#endif  // DBARW_ERROR_HPP
