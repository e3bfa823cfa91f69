#ifndef MEDSCHED_DOMAIN_HPP
#define MEDSCHED_DOMAIN_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "medsched/model.hpp"

namespace medsched {

/// Invalid instance or schedule; `field` is a path such as patients[3].durations.
class InstanceError : public std::runtime_error {
 public:
  InstanceError(std::string field, const std::string& msg)
      : std::runtime_error(field.empty() ? msg : field + ": " + msg), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct VerifyReport {
  std::vector<std::string> violations;
  ObjectiveVector objective;

  bool ok() const { return violations.empty(); }
};

enum class ProblemKind { Cts, Ors, Poac };

const char* kind_tag(ProblemKind k);

}  // namespace medsched

#endif  // MEDSCHED_DOMAIN_HPP
