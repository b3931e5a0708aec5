#pragma once

#include <stdexcept>
#include <string>

namespace vlsynth {

// Base of every error thrown by the library. `kind()` is a stable
// machine-readable tag used in CLI error reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define VLSYNTH_DEFINE_ERROR(Name)                                      \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(#Name, what) {}      \
  };

VLSYNTH_DEFINE_ERROR(InvalidCombination)
VLSYNTH_DEFINE_ERROR(SemanticError)
VLSYNTH_DEFINE_ERROR(DomainError)
VLSYNTH_DEFINE_ERROR(PreconditionError)
VLSYNTH_DEFINE_ERROR(ProviderError)
VLSYNTH_DEFINE_ERROR(DimensionMismatch)
VLSYNTH_DEFINE_ERROR(MissingScore)
VLSYNTH_DEFINE_ERROR(RenderError)
VLSYNTH_DEFINE_ERROR(RejectedGroup)
VLSYNTH_DEFINE_ERROR(InsufficientRelatives)
VLSYNTH_DEFINE_ERROR(DuplicateOption)
VLSYNTH_DEFINE_ERROR(MissingPanel)
VLSYNTH_DEFINE_ERROR(InsufficientPool)
VLSYNTH_DEFINE_ERROR(InconsistentState)
VLSYNTH_DEFINE_ERROR(UnboundVariable)
VLSYNTH_DEFINE_ERROR(MissingTag)
VLSYNTH_DEFINE_ERROR(MalformedBullets)
VLSYNTH_DEFINE_ERROR(ConfigError)
VLSYNTH_DEFINE_ERROR(IoError)
VLSYNTH_DEFINE_ERROR(StageError)
VLSYNTH_DEFINE_ERROR(IslandEmptied)

#undef VLSYNTH_DEFINE_ERROR

}  // namespace vlsynth
