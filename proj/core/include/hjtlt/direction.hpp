#pragma once

#include <string>

namespace hjtlt {

// Approximation direction of a computed set relative to the set it stands
// for: Under/Over-approximation, Exact, or Invalid (no containment either
// way). Mirrors the E/O/U/I alphabet with I as the absorbing element.
enum class ApproxDirection { Exact, Over, Under, Invalid };

constexpr ApproxDirection negate(ApproxDirection d) {
  switch (d) {
    case ApproxDirection::Over: return ApproxDirection::Under;
    case ApproxDirection::Under: return ApproxDirection::Over;
    default: return d;  // Exact is self-dual, Invalid absorbs
  }
}

constexpr const char* to_string(ApproxDirection d) {
  switch (d) {
    case ApproxDirection::Exact: return "E";
    case ApproxDirection::Over: return "O";
    case ApproxDirection::Under: return "U";
    default: return "I";
  }
}

inline ApproxDirection direction_from_string(const std::string& s) {
  if (s == "E" || s == "exact") return ApproxDirection::Exact;
  if (s == "O" || s == "over") return ApproxDirection::Over;
  if (s == "U" || s == "under") return ApproxDirection::Under;
  return ApproxDirection::Invalid;
}

}  // namespace hjtlt
