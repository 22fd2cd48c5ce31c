#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lofi {

// Fault-indicating description categories.
enum class FidSubtype { ErrorMessage, MissingComponent, AbnormalBehavior, WrongStatus };
// Fault-indicating parameter categories.
enum class FipSubtype { Address, ComponentId, ParameterName };

std::string_view to_string(FidSubtype s) noexcept;
std::string_view to_string(FipSubtype s) noexcept;
// Throw InputError for labels outside the closed vocabularies.
FidSubtype parse_fid_subtype(std::string_view s);
FipSubtype parse_fip_subtype(std::string_view s);

struct SpanCandidate {
  std::size_t i = 0;  // start token index
  std::size_t j = 0;  // end token index, inclusive
  double score = 0.0;
  std::string text;
};

struct FaultInfo {
  std::string fid;
  std::optional<std::string> fip;
  std::optional<FidSubtype> fid_subtype;
  std::optional<FipSubtype> fip_subtype;
  std::vector<SpanCandidate> fid_spans;
  std::vector<SpanCandidate> fip_spans;
};

}  // namespace lofi
