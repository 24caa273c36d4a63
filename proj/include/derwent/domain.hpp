#pragma once

#include <optional>
#include <string_view>

namespace derwent {

enum class Domain { Source, Auxiliary, Target };

std::string_view to_string(Domain d);
// Single-letter tag S/A/T used in compact dumps.
char domain_tag(Domain d);
// Accepts the long names ("source"), capitalised ("Source") and tags ("S").
std::optional<Domain> parse_domain(std::string_view text);

}  // namespace derwent
