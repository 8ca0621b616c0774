#include "silfid/stance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "silfid/error.hpp"
#include "text_util.hpp"

namespace silfid {

StanceCode::StanceCode(int level) : level_(level) {
  if (level < kMinLevel || level > kMaxLevel) {
    throw StanceCodingError("stance level out of range: " + std::to_string(level));
  }
}

std::string_view StanceCode::label() const noexcept {
  switch (level_) {
    case -2: return "Reject";
    case -1: return "Lean against";
    case 0: return "Agnostic";
    case 1: return "Lean toward";
    default: return "Accept";
  }
}

std::string_view StanceCode::response_label() const noexcept {
  return level_ == 1 ? std::string_view("Lean towards") : label();
}

std::optional<StanceCode> try_code_stance(std::string_view label) noexcept {
  const std::string key = detail::fold(label);
  if (key == "accept") return StanceCode::accept();
  if (key == "lean toward" || key == "lean towards") return StanceCode::lean_toward();
  if (key == "agnostic") return StanceCode::agnostic();
  if (key == "lean against") return StanceCode::lean_against();
  if (key == "reject") return StanceCode::reject();
  return std::nullopt;
}

StanceCode code_stance(std::string_view label) {
  if (auto code = try_code_stance(label)) return *code;
  throw StanceCodingError("unknown stance label: \"" + std::string(label) + "\"");
}

StanceCode nearest_stance(double unit_value) {
  if (!(unit_value >= 0.0 && unit_value <= 1.0)) {
    throw StanceCodingError("value outside [0,1]: " + std::to_string(unit_value));
  }
  return StanceCode(static_cast<int>(std::lround(unit_value * 4.0)) - 2);
}

}  // namespace silfid
