#pragma once

#include "changeminer/pattern_miner.hpp"
#include "changeminer/source_frontend.hpp"

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace changeminer {

enum class Origin { Builtin, StdLib, External, ProjectLocal, Unknown };
enum class StructuralCategory { BUILT, STAND, EXT, ORIG, MOV, UNKNOWN };

std::string_view to_string(Origin o);
std::string_view to_string(StructuralCategory c);
StructuralCategory category_from_string(std::string_view s);

bool is_builtin_name(std::string_view name);
bool is_stdlib_module(std::string_view name);

/// Origin of a resolved callee label. Receiver methods ("?.m") count as
/// built-in. A bare name is looked up in `imports` first when given.
Origin call_origin(std::string_view callee, const std::set<std::string> &project_modules,
                   const ImportTable *imports = nullptr);

/// Top-level module of a callee; "builtins" for built-in names and receiver
/// methods.
std::string root_module(std::string_view callee);

struct CallOrigin {
  Origin origin = Origin::Unknown;
  std::string root;
};

CallOrigin describe_call(std::string_view callee, const std::set<std::string> &project_modules);

/// MOV when the Before and After origin multisets (or root modules) differ;
/// otherwise the shared origin's category. Mixed but balanced origins pick
/// the least built-in one (ORIG, EXT, STAND, BUILT).
StructuralCategory structural_category(const std::vector<CallOrigin> &before,
                                       const std::vector<CallOrigin> &after);

/// Classifies by the changed calls of the pattern's mapped call pairs, or by
/// all changed calls when no call pair contains a changed node.
StructuralCategory classify_pattern(const PatternGraph &p, const std::set<std::string> &project_modules);

} // namespace changeminer
