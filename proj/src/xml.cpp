#include "xml.hpp"

#include <cctype>
#include <stdexcept>

namespace dg::xml {

namespace {

struct Cursor {
  const std::string& s;
  const std::string& source;
  std::size_t pos = 0;
  int line = 1;

  bool eof() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
  char get() {
    char c = s[pos++];
    if (c == '\n') ++line;
    return c;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error(source + ":" + std::to_string(line) + ": " + msg);
  }
  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) get();
  }
  bool consume(const std::string& lit) {
    if (s.compare(pos, lit.size(), lit) != 0) return false;
    for (std::size_t i = 0; i < lit.size(); ++i) get();
    return true;
  }
  void skip_until(const std::string& lit) {
    while (!eof()) {
      if (s.compare(pos, lit.size(), lit) == 0) {
        for (std::size_t i = 0; i < lit.size(); ++i) get();
        return;
      }
      get();
    }
    fail("unterminated construct, expected '" + lit + "'");
  }
};

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' || c == '.';
}

std::string read_name(Cursor& c) {
  std::string out;
  while (!c.eof() && name_char(c.peek())) out.push_back(c.get());
  if (out.empty()) c.fail("expected a name");
  return out;
}

Element parse_element(Cursor& c);

void parse_attrs(Cursor& c, Element& e) {
  for (;;) {
    c.skip_ws();
    if (c.eof()) c.fail("unterminated tag <" + e.name + ">");
    char ch = c.peek();
    if (ch == '>' || ch == '/') return;
    std::string key = read_name(c);
    c.skip_ws();
    if (c.eof() || c.get() != '=') c.fail("expected '=' after attribute '" + key + "'");
    c.skip_ws();
    if (c.eof()) c.fail("expected attribute value");
    char quote = c.get();
    if (quote != '"' && quote != '\'') c.fail("attribute value must be quoted");
    std::string val;
    while (!c.eof() && c.peek() != quote) val.push_back(c.get());
    if (c.eof()) c.fail("unterminated attribute value");
    c.get();  // closing quote
    e.attrs.emplace_back(std::move(key), std::move(val));
  }
}

// positioned right after '<'
Element parse_element(Cursor& c) {
  Element e;
  e.line = c.line;
  e.name = read_name(c);
  parse_attrs(c, e);
  if (c.consume("/>")) return e;
  if (!c.consume(">")) c.fail("malformed tag <" + e.name + ">");
  for (;;) {
    c.skip_ws();
    if (c.eof()) c.fail("missing </" + e.name + ">");
    if (c.peek() != '<') {
      c.get();  // stray text is ignored
      continue;
    }
    c.get();  // '<'
    if (c.consume("!--")) {
      c.skip_until("-->");
      continue;
    }
    if (c.consume("/")) {
      std::string closing = read_name(c);
      if (closing != e.name)
        c.fail("mismatched closing tag </" + closing + ">, expected </" + e.name + ">");
      c.skip_ws();
      if (!c.consume(">")) c.fail("malformed closing tag");
      return e;
    }
    e.children.push_back(parse_element(c));
  }
}

}  // namespace

std::string Element::require_attr(const std::string& key, const std::string& context) const {
  const std::string* v = attr(key);
  if (!v)
    throw std::runtime_error(context + ": <" + name + "> (line " + std::to_string(line) +
                             ") is missing attribute '" + key + "'");
  return *v;
}

Element parse(const std::string& text, const std::string& source) {
  Cursor c{text, source};
  for (;;) {
    c.skip_ws();
    if (c.eof()) c.fail("no root element");
    if (c.peek() != '<') c.fail("expected '<'");
    c.get();
    if (c.consume("?")) {
      c.skip_until("?>");
      continue;
    }
    if (c.consume("!--")) {
      c.skip_until("-->");
      continue;
    }
    return parse_element(c);
  }
}

}  // namespace dg::xml
