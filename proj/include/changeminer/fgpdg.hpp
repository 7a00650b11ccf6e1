#pragma once

#include "changeminer/ast.hpp"
#include "changeminer/source_frontend.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace changeminer {

enum class NodeKind : std::uint8_t { Data, Operation, Control };
enum class EdgeKind : std::uint8_t { Control, Data };
enum class Version : std::uint8_t { None, Before, After };

std::string_view to_string(NodeKind k);
std::string_view to_string(EdgeKind k);
std::string_view to_string(Version v);
NodeKind node_kind_from_string(std::string_view s);
EdgeKind edge_kind_from_string(std::string_view s);
Version version_from_string(std::string_view s);

/// Node of a fine-grained program dependence graph.
///
/// Subkinds: Data {var, literal, constant}; Operation {call, binop, unaryop,
/// compare, subscript, attribute}; Control {if, for, while, try, with}.
struct FgNode {
  int id = 0;
  NodeKind kind = NodeKind::Data;
  std::string subkind;
  std::string label;         // "var" for variables
  std::string concrete_name; // identifier of a variable, empty otherwise
  Span span;
  Version version = Version::None;
  int ast_node = -1;         // generating node in the function body AST

  friend bool operator==(const FgNode &, const FgNode &) = default;
};

/// Data labels: def, ref, para, recv, cond, qual. Control labels: then, else, body.
struct FgEdge {
  int src = 0;
  int dst = 0;
  EdgeKind kind = EdgeKind::Data;
  std::string label;

  friend bool operator==(const FgEdge &, const FgEdge &) = default;
};

struct Fgpdg {
  std::string function;
  std::vector<FgNode> nodes; // nodes[i].id == i
  std::vector<FgEdge> edges;

  friend bool operator==(const Fgpdg &, const Fgpdg &) = default;
};

class UnsupportedConstruct : public std::runtime_error {
public:
  UnsupportedConstruct(Span span, const std::string &what)
      : std::runtime_error("unsupported construct: " + what), span_(span) {}
  const Span &span() const { return span_; }

private:
  Span span_;
};

/// Method-resolution context: the name bound to the instance (usually
/// "self") and the enclosing class.
struct CallScope {
  std::string self_name;
  const ClassContext *cls = nullptr;
};

/// Label for the callee of the Call node `call_id` in `ast`: a dotted path
/// when the qualifier chain resolves through `imports`, the bare name for
/// plain unresolved names, and "?.<method>" otherwise.
std::string resolve_callee(const NormalizedAst &ast, int call_id, const ImportTable &imports,
                           const CallScope *scope = nullptr);
/// Same, for a tree whose root is the Call node.
std::string resolve_callee(const NormalizedAst &call_subtree, const ImportTable &imports);

/// Throws UnsupportedConstruct when the unit contains yield, finally or match.
Fgpdg build_fgpdg(const FunctionUnit &unit, const ImportTable &imports);

} // namespace changeminer
