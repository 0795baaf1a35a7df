#pragma once

#include <optional>
#include <string>
#include <vector>

// Minimal XML reader for the hand-description subset: elements, attributes,
// comments and declarations. No entities, CDATA or text content.

namespace dg::xml {

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<Element> children;
  int line = 0;

  const std::string* attr(const std::string& key) const {
    for (const auto& [k, v] : attrs)
      if (k == key) return &v;
    return nullptr;
  }
  std::string require_attr(const std::string& key, const std::string& context) const;
  const Element* child(const std::string& tag) const {
    for (const auto& c : children)
      if (c.name == tag) return &c;
    return nullptr;
  }
};

// Parses a document and returns its root element. Throws std::runtime_error
// with "<source>:<line>: ..." diagnostics.
Element parse(const std::string& text, const std::string& source);

}  // namespace dg::xml
