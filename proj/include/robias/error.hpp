#pragma once

#include <stdexcept>
#include <string>

namespace robias {

// Base of every error thrown by the library. `kind()` is a short stable tag
// used in CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define ROBIAS_DEFINE_ERROR(Name, tag)                                   \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& message) : Error(tag, message) {}   \
  }

ROBIAS_DEFINE_ERROR(ArgumentError, "argument");
ROBIAS_DEFINE_ERROR(SchemaError, "schema");
ROBIAS_DEFINE_ERROR(ParseError, "parse");
ROBIAS_DEFINE_ERROR(LabelError, "label");
ROBIAS_DEFINE_ERROR(IoError, "io");
ROBIAS_DEFINE_ERROR(StratificationError, "stratification");
ROBIAS_DEFINE_ERROR(TrainingError, "training");
ROBIAS_DEFINE_ERROR(ProbeError, "probe");
ROBIAS_DEFINE_ERROR(BiasError, "bias");
ROBIAS_DEFINE_ERROR(GenerationError, "generation");
ROBIAS_DEFINE_ERROR(NeighborError, "neighbor");
ROBIAS_DEFINE_ERROR(InfeasibleError, "infeasible");
ROBIAS_DEFINE_ERROR(ConfigError, "config");

#undef ROBIAS_DEFINE_ERROR

}  // namespace robias
