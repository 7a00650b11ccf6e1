#pragma once

// Small random generator of syntactically valid Python functions, used by
// property tests.

#include <random>
#include <string>
#include <vector>

namespace testsupport {

class RandomPython {
public:
  explicit RandomPython(unsigned seed) : rng_(seed) {}

  std::string function(const std::string &name = "f", int statements = 6) {
    std::string out = "def " + name + "(a, b, items):\n";
    for (int i = 0; i < statements; ++i)
      out += statement(1, 2);
    return out;
  }

  std::string module(int functions = 2) {
    std::string out = "import os\nimport copy\nfrom random import choice\n\n";
    for (int i = 0; i < functions; ++i)
      out += function("fn" + std::to_string(i), 3 + pick(5)) + "\n";
    return out;
  }

private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  template <class T> const T &one_of(const std::vector<T> &v) {
    return v[static_cast<size_t>(pick(static_cast<int>(v.size())))];
  }

  std::string var() { return one_of<std::string>({"a", "b", "x", "y", "items", "data"}); }

  std::string atom() {
    switch (pick(4)) {
    case 0:
      return std::to_string(pick(3));
    case 1:
      return "'s" + std::to_string(pick(2)) + "'";
    default:
      return var();
    }
  }

  std::string expression(int depth) {
    if (depth <= 0)
      return atom();
    switch (pick(8)) {
    case 0:
      return expression(depth - 1) + " " + one_of<std::string>({"+", "-", "*"}) + " " +
             expression(depth - 1);
    case 1:
      return var() + "." + one_of<std::string>({"copy", "add", "get", "append"}) + "(" +
             expression(depth - 1) + ")";
    case 2:
      return one_of<std::string>({"len", "set", "str", "copy.deepcopy", "os.path.exists",
                                  "choice"}) +
             "(" + expression(depth - 1) + ")";
    case 3:
      return "[" + expression(depth - 1) + ", " + atom() + "]";
    case 4:
      return var() + "[" + expression(depth - 1) + "]";
    case 5:
      return expression(depth - 1) + " " + one_of<std::string>({"<", "==", "in"}) + " " + atom();
    default:
      return atom();
    }
  }

  std::string statement(int indent, int depth) {
    std::string pad(static_cast<size_t>(indent) * 4, ' ');
    int kind = depth > 0 ? pick(7) : pick(3);
    switch (kind) {
    case 0:
      return pad + var() + " = " + expression(2) + "\n";
    case 1:
      return pad + expression(2) + "\n";
    case 2:
      return pad + var() + " += " + expression(1) + "\n";
    case 3:
      return pad + "if " + expression(1) + ":\n" + block(indent + 1, depth - 1) +
             (pick(2) ? pad + "else:\n" + block(indent + 1, depth - 1) : "");
    case 4:
      return pad + "for " + var() + " in " + expression(1) + ":\n" + block(indent + 1, depth - 1);
    case 5:
      return pad + "while " + expression(1) + ":\n" + block(indent + 1, depth - 1);
    default:
      return pad + "try:\n" + block(indent + 1, depth - 1) + pad + "except ValueError:\n" +
             block(indent + 1, depth - 1);
    }
  }

  std::string block(int indent, int depth) {
    std::string out;
    int n = 1 + pick(3);
    for (int i = 0; i < n; ++i)
      out += statement(indent, depth);
    return out;
  }

  std::mt19937 rng_;
};

} // namespace testsupport
