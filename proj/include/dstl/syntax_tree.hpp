// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "dstl/source.hpp"

namespace dstl {

struct Token {
  enum class Kind { Name, Keyword, Symbol, SchemaVar, String };
  Kind kind = Kind::Name;
  std::string text;  // String tokens hold the unescaped value
  Span span;
};

bool operator==(const Token& a, const Token& b);

/// A typed concrete-syntax node. Children keep the full ordered token
/// sequence, so unparsing is a plain traversal. Optional-keyword presence is
/// additionally indexed in keyword_flags (every optional keyword of the
/// node's production has an entry).
class Node {
public:
  struct Child {
    std::string slot;
    std::variant<std::unique_ptr<Node>, Token> value;

    bool is_node() const { return value.index() == 0; }
    const Node& node() const { return *std::get<0>(value); }
    Node& node() { return *std::get<0>(value); }
    const Token& token() const { return std::get<1>(value); }
  };

  int id = 0;
  std::string type;
  int alt = 0;
  std::vector<Child> children;
  std::map<std::string, bool> keyword_flags;
  Span span;
  Node* parent = nullptr;

  void add_token(std::string slot, Token t);
  void add_node(std::string slot, std::unique_ptr<Node> n);

  /// Children that are nodes in the given slot, in order.
  std::vector<const Node*> nodes_in_slot(const std::string& slot) const;
  /// The token child with the given slot key, or nullptr.
  const Token* token_in_slot(const std::string& slot) const;
  Token* token_in_slot(const std::string& slot);

  std::unique_ptr<Node> clone() const;  // keeps ids
};

/// Structural equality ignoring ids, spans and parent links.
bool deep_equal(const Node& a, const Node& b);

class SyntaxTree {
public:
  SyntaxTree() = default;
  SyntaxTree(std::unique_ptr<Node> root, int next_id);

  const Node& root() const { return *root_; }
  Node& root() { return *root_; }
  bool empty() const { return root_ == nullptr; }

  int fresh_id() { return next_id_++; }
  int next_id() const { return next_id_; }

  SyntaxTree clone() const;

  /// Finds a node by id (preorder walk), or nullptr.
  Node* find(int id);
  const Node* find(int id) const;

  /// Preorder document index per node id.
  std::map<int, int> document_order() const;

  /// Re-establishes parent pointers after structural edits.
  void refresh_parents();

  /// Number of nodes in the tree.
  int node_count() const;

private:
  std::unique_ptr<Node> root_;
  int next_id_ = 0;
};

/// Canonical pretty-print: tokens space-separated, '{'/'}' open and close
/// 2-space indented blocks, ';' ends a line.
std::string unparse(const Node& node);
std::string unparse(const SyntaxTree& tree);

/// Ordered token sequence of a subtree.
std::vector<Token> token_stream(const Node& node);

/// Token-level equivalence of two subtrees (kinds and texts).
bool token_equal(const Node& a, const Node& b);

/// Indented node dump, one node per line: type[alt] @begin..end
std::string dump_tree(const Node& node);

}  // namespace dstl
