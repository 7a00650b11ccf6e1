#include "changeminer/origin_classifier.hpp"

#include "python_names.hpp"

#include <algorithm>
#include <stdexcept>

namespace changeminer {

std::string_view to_string(Origin o) {
  switch (o) {
  case Origin::Builtin:
    return "Builtin";
  case Origin::StdLib:
    return "StdLib";
  case Origin::External:
    return "External";
  case Origin::ProjectLocal:
    return "ProjectLocal";
  case Origin::Unknown:
    break;
  }
  return "Unknown";
}

std::string_view to_string(StructuralCategory c) {
  switch (c) {
  case StructuralCategory::BUILT:
    return "BUILT";
  case StructuralCategory::STAND:
    return "STAND";
  case StructuralCategory::EXT:
    return "EXT";
  case StructuralCategory::ORIG:
    return "ORIG";
  case StructuralCategory::MOV:
    return "MOV";
  case StructuralCategory::UNKNOWN:
    break;
  }
  return "UNKNOWN";
}

StructuralCategory category_from_string(std::string_view s) {
  for (auto c : {StructuralCategory::BUILT, StructuralCategory::STAND, StructuralCategory::EXT,
                 StructuralCategory::ORIG, StructuralCategory::MOV, StructuralCategory::UNKNOWN})
    if (to_string(c) == s)
      return c;
  throw std::invalid_argument("unknown category: " + std::string(s));
}

bool is_builtin_name(std::string_view name) {
  // Comprehensions produce synthetic "generator" calls.
  return name == "generator" ||
         std::binary_search(detail::kBuiltinNames.begin(), detail::kBuiltinNames.end(), name);
}

bool is_stdlib_module(std::string_view name) {
  return std::binary_search(detail::kStdlibModules.begin(), detail::kStdlibModules.end(), name);
}

Origin call_origin(std::string_view callee, const std::set<std::string> &project_modules,
                   const ImportTable *imports) {
  if (callee.substr(0, 2) == "?.")
    return Origin::Builtin;
  std::string resolved(callee);
  if (imports && resolved.find('.') == std::string::npos) {
    if (auto it = imports->aliases.find(resolved); it != imports->aliases.end())
      resolved = it->second;
    else if (auto def = imports->module_defs.find(resolved); def != imports->module_defs.end())
      resolved = def->second;
  }
  auto dot = resolved.find('.');
  if (dot == std::string::npos)
    return is_builtin_name(resolved) ? Origin::Builtin : Origin::Unknown;
  std::string root = resolved.substr(0, dot);
  if (is_stdlib_module(root))
    return Origin::StdLib;
  if (project_modules.count(root))
    return Origin::ProjectLocal;
  return Origin::External;
}

std::string root_module(std::string_view callee) {
  if (callee.substr(0, 2) == "?.")
    return "builtins";
  auto dot = callee.find('.');
  if (dot == std::string_view::npos)
    return is_builtin_name(callee) ? "builtins" : std::string(callee);
  return std::string(callee.substr(0, dot));
}

CallOrigin describe_call(std::string_view callee, const std::set<std::string> &project_modules) {
  return CallOrigin{call_origin(callee, project_modules), root_module(callee)};
}

StructuralCategory structural_category(const std::vector<CallOrigin> &before,
                                       const std::vector<CallOrigin> &after) {
  if (before.empty() && after.empty())
    return StructuralCategory::UNKNOWN;
  auto any_unknown = [](const std::vector<CallOrigin> &v) {
    return std::any_of(v.begin(), v.end(), [](const CallOrigin &c) { return c.origin == Origin::Unknown; });
  };
  if (any_unknown(before) || any_unknown(after))
    return StructuralCategory::UNKNOWN;
  auto origins = [](const std::vector<CallOrigin> &v) {
    std::vector<Origin> out;
    for (const auto &c : v)
      out.push_back(c.origin);
    std::sort(out.begin(), out.end());
    return out;
  };
  auto roots = [](const std::vector<CallOrigin> &v) {
    std::vector<std::string> out;
    for (const auto &c : v)
      out.push_back(c.root);
    std::sort(out.begin(), out.end());
    return out;
  };
  if (origins(before) != origins(after) || roots(before) != roots(after))
    return StructuralCategory::MOV;
  std::vector<Origin> present = origins(before);
  auto has = [&](Origin o) { return std::find(present.begin(), present.end(), o) != present.end(); };
  if (has(Origin::ProjectLocal))
    return StructuralCategory::ORIG;
  if (has(Origin::External))
    return StructuralCategory::EXT;
  if (has(Origin::StdLib))
    return StructuralCategory::STAND;
  return StructuralCategory::BUILT;
}

StructuralCategory classify_pattern(const PatternGraph &p, const std::set<std::string> &project_modules) {
  std::vector<CallOrigin> before, after;
  for (auto [b, a] : p.call_pairs()) {
    const PatternNode &nb = p.nodes[static_cast<size_t>(b)];
    const PatternNode &na = p.nodes[static_cast<size_t>(a)];
    if (!nb.changed && !na.changed)
      continue;
    before.push_back(describe_call(nb.label, project_modules));
    after.push_back(describe_call(na.label, project_modules));
  }
  if (before.empty() && after.empty())
    for (const auto &n : p.nodes)
      if (n.changed && n.is_call())
        (n.version == Version::Before ? before : after).push_back(describe_call(n.label, project_modules));
  return structural_category(before, after);
}

} // namespace changeminer
