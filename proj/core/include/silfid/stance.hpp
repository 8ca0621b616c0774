#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace silfid {

/// Five-level ordinal stance. The integer level runs from -2 (Reject) to +2
/// (Accept); ordering by level is ordering by endorsement strength.
class StanceCode {
 public:
  static constexpr int kMinLevel = -2;
  static constexpr int kMaxLevel = 2;

  /// Throws StanceCodingError when level is outside [-2, 2].
  explicit StanceCode(int level);

  static StanceCode reject() { return StanceCode(-2); }
  static StanceCode lean_against() { return StanceCode(-1); }
  static StanceCode agnostic() { return StanceCode(0); }
  static StanceCode lean_toward() { return StanceCode(1); }
  static StanceCode accept() { return StanceCode(2); }

  [[nodiscard]] int level() const noexcept { return level_; }

  /// Canonical survey label: "Accept", "Lean toward", "Agnostic",
  /// "Lean against", "Reject".
  [[nodiscard]] std::string_view label() const noexcept;

  /// Label as written in model-facing answers ("Lean towards" spelling).
  [[nodiscard]] std::string_view response_label() const noexcept;

  friend auto operator<=>(const StanceCode&, const StanceCode&) = default;

 private:
  int level_;
};

/// All five codes in ascending level order.
inline constexpr std::array<int, 5> kAllStanceLevels{-2, -1, 0, 1, 2};

/// Maps a stance label onto its code. Case-insensitive, tolerant of surrounding
/// and repeated whitespace; "Lean toward"/"Lean towards" are synonyms.
/// Throws StanceCodingError naming the offending string.
StanceCode code_stance(std::string_view label);

/// Non-throwing variant of code_stance.
std::optional<StanceCode> try_code_stance(std::string_view label) noexcept;

/// Affine map level -> (level + 2) / 4 onto the unit interval.
inline double normalize_code(StanceCode code) noexcept {
  return (code.level() + 2) / 4.0;
}

/// Nearest ordinal level for a unit-interval value (0.5 -> Agnostic).
StanceCode nearest_stance(double unit_value);

}  // namespace silfid
