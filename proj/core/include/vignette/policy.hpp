#pragma once

#include <string>

namespace vignette {

enum class PolicyKind { capacity_pressure, popularity_decay };
enum class PolicyAction { vignette_transcode, vignette_squeeze };

/// Compression trigger. capacity_pressure fires when the library's total
/// size passes `threshold` (bytes); popularity_decay fires per video whose
/// popularity drops below `threshold` (views).
struct Policy {
  PolicyKind kind = PolicyKind::capacity_pressure;
  double threshold = 0;
  PolicyAction action = PolicyAction::vignette_transcode;
  int squeeze_target_kbps = 0;  // required when action is vignette_squeeze

  bool operator==(const Policy&) const = default;
};

std::string to_string(PolicyKind kind);
std::string to_string(PolicyAction action);
PolicyKind parse_policy_kind(const std::string& name);
PolicyAction parse_policy_action(const std::string& name);

/// Threshold must be positive; squeeze actions need a positive target.
void validate_policy(const Policy& policy);

}  // namespace vignette
