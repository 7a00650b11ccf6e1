#pragma once

#include "changeminer/ast.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace changeminer {

/// Decodes raw bytes as UTF-8, substituting U+FFFD for invalid sequences.
/// Also strips a leading BOM and normalizes line endings to '\n'.
std::string decode_source(std::string_view bytes);

/// Parses Python 3 source into a NormalizedAst rooted at a Module node.
/// Comments and layout do not affect the resulting tree.
NormalizedAst parse_source(std::string_view text);

/// Class context of a method, used to resolve `self.m()` calls.
struct ClassContext {
  std::string qualified_name;       // e.g. "pkg.mod.C"
  std::vector<std::string> bases;   // dotted base expressions as written
  std::set<std::string> methods;    // names of methods defined in the class body
};

struct FunctionUnit {
  std::string qualified_name;
  std::string name;
  std::vector<std::string> params;
  /// Subtree rooted at the FunctionDef node, with nested function and class
  /// definitions removed (they form their own units).
  NormalizedAst body;
  bool supported = true;
  std::string unsupported_reason;
  Span span;
  /// Set when the function is defined directly inside a class body.
  std::optional<ClassContext> enclosing_class;
};

/// One unit per function or method definition, including nested ones.
/// Later duplicates of a qualified name get "#2", "#3", ... suffixes.
std::vector<FunctionUnit> extract_functions(const NormalizedAst &module,
                                            const std::string &module_path);

struct ImportTable {
  std::map<std::string, std::string> aliases; // local name -> dotted path
  std::vector<std::string> star_imports;
  /// Top-level functions and classes of the module itself, name -> dotted
  /// path. Filled by `add_module_definitions`; consulted after `aliases`.
  std::map<std::string, std::string> module_defs;

  friend bool operator==(const ImportTable &, const ImportTable &) = default;
};

/// Collects `import M [as A]` and `from M import N [as A] | *` anywhere in
/// the module. Relative imports are resolved against `module_path` when it
/// is given.
ImportTable build_import_table(const NormalizedAst &module, const std::string &module_path = "");

/// Records top-level `def`/`class` names of the module in `table.module_defs`.
void add_module_definitions(ImportTable &table, const NormalizedAst &module,
                            const std::string &module_path);

/// "pkg/sub/mod.py" -> "pkg.sub.mod"; "pkg/__init__.py" -> "pkg".
std::string module_path_for_file(std::string_view file_path);

} // namespace changeminer
