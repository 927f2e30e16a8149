#include "vignette/policy.hpp"

#include <fmt/format.h>

#include "vignette/error.hpp"

namespace vignette {

std::string to_string(PolicyKind kind) {
  return kind == PolicyKind::capacity_pressure ? "capacity_pressure" : "popularity_decay";
}

std::string to_string(PolicyAction action) {
  return action == PolicyAction::vignette_transcode ? "vignette_transcode" : "vignette_squeeze";
}

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "capacity_pressure") return PolicyKind::capacity_pressure;
  if (name == "popularity_decay") return PolicyKind::popularity_decay;
  fail(fmt::format("unknown policy kind '{}'", name));
}

PolicyAction parse_policy_action(const std::string& name) {
  if (name == "vignette_transcode") return PolicyAction::vignette_transcode;
  if (name == "vignette_squeeze") return PolicyAction::vignette_squeeze;
  fail(fmt::format("unknown policy action '{}'", name));
}

void validate_policy(const Policy& policy) {
  require(policy.threshold > 0, "policy threshold must be positive");
  if (policy.action == PolicyAction::vignette_squeeze) {
    require(policy.squeeze_target_kbps > 0, "squeeze policies need a positive target bitrate");
  }
}

}  // namespace vignette
