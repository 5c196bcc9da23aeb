#pragma once

#include "intcond/expr.hpp"

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fixtures {

struct ExprCase {
  std::string scope;  // "t" or "xN"
  std::string source;

  [[nodiscard]] intcond::expr::Scope parse_scope() const {
    if (scope == "t") return intcond::expr::Scope::phi();
    return intcond::expr::Scope::field(std::stoi(scope.substr(1)));
  }
};

inline std::vector<ExprCase> expressions() {
  std::ifstream in(std::string(INTCOND_FIXTURES) + "/expressions.txt");
  if (!in) throw std::runtime_error("cannot open expressions.txt");
  std::vector<ExprCase> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    const auto sp = line.find(' ');
    out.push_back({line.substr(0, sp), line.substr(sp + 1)});
  }
  return out;
}

/// parse -> to_string -> parse gives the same tree; empty string on success.
inline std::string round_trip_error(const ExprCase& c) {
  using namespace intcond::expr;
  try {
    const auto a = parse(c.source, c.parse_scope());
    const std::string text = to_string(*a);
    const auto b = parse(text, c.parse_scope());
    if (!equal(*a, *b)) return "tree changed: '" + c.source + "' -> '" + text + "'";
    if (to_string(*b) != text) return "text not stable: '" + text + "'";
    return {};
  } catch (const std::exception& e) {
    return "'" + c.source + "': " + e.what();
  }
}

}  // namespace fixtures
