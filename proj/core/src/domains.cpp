#include <json.hpp>
#include <sstream>

#include "silfid/io.hpp"
#include "text_util.hpp"

namespace silfid::io {

namespace detail {
extern const std::string_view kBundledDomainAssignments;
}

const std::vector<DomainAssignment>& bundled_domain_assignments() {
  static const std::vector<DomainAssignment> table = [] {
    std::vector<DomainAssignment> out;
    std::istringstream in{std::string(detail::kBundledDomainAssignments)};
    std::string line;
    while (std::getline(in, line)) {
      if (silfid::detail::trim(line).empty()) continue;
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("question_id").get<std::string>(), j.at("domain").get<std::string>()});
    }
    return out;
  }();
  return table;
}

std::optional<std::string> bundled_domain(std::string_view question_id) {
  // Catalog ids may carry a position suffix ("god: theism"); match on the stem.
  std::string key = silfid::detail::fold(question_id);
  if (auto colon = key.find(':'); colon != std::string::npos) {
    key = std::string(silfid::detail::trim(std::string_view(key).substr(0, colon)));
  }
  for (const auto& a : bundled_domain_assignments()) {
    if (a.question_id == key) return a.domain;
  }
  return std::nullopt;
}

}  // namespace silfid::io
