// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <vector>

#include "dstl/grammar.hpp"
#include "dstl/syntax_tree.hpp"

namespace dstl::align {

/// Maps child indices of a node onto the grammar elements that produced
/// (or would accept) them.
struct Assignment {
  std::map<int, const RhsExpr*> elem_of;
};

/// Decides whether one child can be consumed by one grammar element.
struct Matcher {
  virtual ~Matcher() = default;
  virtual bool terminal(const Node::Child& c, const std::string& text) const = 0;
  virtual bool keyword(const Node::Child& c, const std::string& kw) const = 0;
  virtual bool ref(const Node::Child& c, const RhsExpr& r) const = 0;
};

/// Aligns children[begin..end) against one alternative sequence.
/// Candidate consumptions are explored greedily (longest first, earliest
/// group alternative first), the same policy the parser uses.
std::optional<Assignment> align_children(const RhsExpr& alt_seq,
                                         const std::vector<Node::Child>& children,
                                         size_t begin, size_t end, const Matcher& m);

/// DFS ordinal of every element below body, for position comparisons.
std::map<const RhsExpr*, int> element_order(const RhsExpr& body);

}  // namespace dstl::align
