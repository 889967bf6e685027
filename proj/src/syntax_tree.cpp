// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#include "dstl/syntax_tree.hpp"

#include <functional>
#include <sstream>

namespace dstl {

bool operator==(const Token& a, const Token& b) {
  return a.kind == b.kind && a.text == b.text;
}

void Node::add_token(std::string slot, Token t) {
  Child c;
  c.slot = std::move(slot);
  c.value = std::move(t);
  children.push_back(std::move(c));
}

void Node::add_node(std::string slot, std::unique_ptr<Node> n) {
  n->parent = this;
  Child c;
  c.slot = std::move(slot);
  c.value = std::move(n);
  children.push_back(std::move(c));
}

std::vector<const Node*> Node::nodes_in_slot(const std::string& slot) const {
  std::vector<const Node*> out;
  for (const auto& c : children)
    if (c.is_node() && c.slot == slot) out.push_back(&c.node());
  return out;
}

const Token* Node::token_in_slot(const std::string& slot) const {
  for (const auto& c : children)
    if (!c.is_node() && c.slot == slot) return &c.token();
  return nullptr;
}

Token* Node::token_in_slot(const std::string& slot) {
  for (auto& c : children)
    if (!c.is_node() && c.slot == slot) return &std::get<1>(c.value);
  return nullptr;
}

std::unique_ptr<Node> Node::clone() const {
  auto out = std::make_unique<Node>();
  out->id = id;
  out->type = type;
  out->alt = alt;
  out->keyword_flags = keyword_flags;
  out->span = span;
  for (const auto& c : children) {
    if (c.is_node())
      out->add_node(c.slot, c.node().clone());
    else
      out->add_token(c.slot, c.token());
  }
  return out;
}

bool deep_equal(const Node& a, const Node& b) {
  if (a.type != b.type || a.alt != b.alt) return false;
  if (a.keyword_flags != b.keyword_flags) return false;
  if (a.children.size() != b.children.size()) return false;
  for (size_t i = 0; i < a.children.size(); ++i) {
    const auto& ca = a.children[i];
    const auto& cb = b.children[i];
    if (ca.slot != cb.slot || ca.is_node() != cb.is_node()) return false;
    if (ca.is_node()) {
      if (!deep_equal(ca.node(), cb.node())) return false;
    } else {
      if (!(ca.token() == cb.token())) return false;
    }
  }
  return true;
}

SyntaxTree::SyntaxTree(std::unique_ptr<Node> root, int next_id)
    : root_(std::move(root)), next_id_(next_id) {
  refresh_parents();
}

SyntaxTree SyntaxTree::clone() const {
  SyntaxTree out;
  if (root_) out.root_ = root_->clone();
  out.next_id_ = next_id_;
  out.refresh_parents();
  return out;
}

namespace {

Node* find_in(Node* n, int id) {
  if (!n) return nullptr;
  if (n->id == id) return n;
  for (auto& c : n->children) {
    if (!c.is_node()) continue;
    if (Node* hit = find_in(&c.node(), id)) return hit;
  }
  return nullptr;
}

}  // namespace

Node* SyntaxTree::find(int id) { return find_in(root_.get(), id); }
const Node* SyntaxTree::find(int id) const {
  return find_in(const_cast<Node*>(root_.get()), id);
}

std::map<int, int> SyntaxTree::document_order() const {
  std::map<int, int> order;
  int next = 0;
  std::function<void(const Node&)> walk = [&](const Node& n) {
    order[n.id] = next++;
    for (const auto& c : n.children)
      if (c.is_node()) walk(c.node());
  };
  if (root_) walk(*root_);
  return order;
}

void SyntaxTree::refresh_parents() {
  std::function<void(Node&)> walk = [&](Node& n) {
    for (auto& c : n.children) {
      if (!c.is_node()) continue;
      c.node().parent = &n;
      walk(c.node());
    }
  };
  if (root_) {
    root_->parent = nullptr;
    walk(*root_);
  }
}

int SyntaxTree::node_count() const {
  int count = 0;
  std::function<void(const Node&)> walk = [&](const Node& n) {
    ++count;
    for (const auto& c : n.children)
      if (c.is_node()) walk(c.node());
  };
  if (root_) walk(*root_);
  return count;
}

std::vector<Token> token_stream(const Node& node) {
  std::vector<Token> out;
  std::function<void(const Node&)> walk = [&](const Node& n) {
    for (const auto& c : n.children) {
      if (c.is_node())
        walk(c.node());
      else
        out.push_back(c.token());
    }
  };
  walk(node);
  return out;
}

bool token_equal(const Node& a, const Node& b) {
  return token_stream(a) == token_stream(b);
}

namespace {

std::string escape_string_token(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string render_token(const Token& t) {
  if (t.kind == Token::Kind::String) return "\"" + escape_string_token(t.text) + "\"";
  return t.text;
}

bool no_space_before(const std::string& t) {
  return t == ";" || t == "," || t == ")" || t == ".";
}
bool no_space_after(const std::string& t) { return t == "(" || t == "."; }

}  // namespace

std::string unparse(const Node& node) {
  std::vector<Token> toks = token_stream(node);
  std::string out;
  int indent = 0;
  bool at_line_start = true;
  std::string last;
  auto newline = [&] {
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
    at_line_start = true;
  };
  for (const auto& t : toks) {
    std::string text = render_token(t);
    if (text == "}") {
      if (!at_line_start) newline();
      indent = std::max(0, indent - 1);
    }
    if (at_line_start) {
      for (int i = 0; i < indent; ++i) out += "  ";
    } else if (!no_space_before(text) && !no_space_after(last)) {
      out += " ";
    }
    out += text;
    at_line_start = false;
    last = text;
    if (text == "{") {
      ++indent;
      newline();
    } else if (text == "}" || text == ";") {
      newline();
    }
  }
  if (!at_line_start) newline();
  return out;
}

std::string unparse(const SyntaxTree& tree) {
  if (tree.empty()) return "";
  return unparse(tree.root());
}

std::string dump_tree(const Node& node) {
  std::ostringstream out;
  std::function<void(const Node&, int)> walk = [&](const Node& n, int depth) {
    for (int i = 0; i < depth; ++i) out << "  ";
    out << n.type << "[" << n.alt << "] @" << n.span.begin << ".." << n.span.end << "\n";
    for (const auto& c : n.children)
      if (c.is_node()) walk(c.node(), depth + 1);
  };
  walk(node, 0);
  return out.str();
}

}  // namespace dstl
