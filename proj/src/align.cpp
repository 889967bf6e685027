// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#include "align.hpp"

#include <functional>

namespace dstl::align {

namespace {

struct Cand {
  size_t end;
  std::map<int, const RhsExpr*> asg;
};

struct Aligner {
  const std::vector<Node::Child>& children;
  size_t limit;
  const Matcher& m;

  std::vector<Cand> ends_of_elem(const RhsExpr& e, size_t ki);

  std::vector<Cand> ends_of_seq(const std::vector<RhsExpr>& elems, size_t from, size_t ki) {
    std::vector<Cand> cands = {{ki, {}}};
    for (size_t i = from; i < elems.size(); ++i) {
      std::vector<Cand> next;
      std::set<size_t> seen;
      for (const auto& c : cands) {
        for (auto& opt : ends_of_elem(elems[i], c.end)) {
          if (!seen.insert(opt.end).second) continue;
          Cand merged{opt.end, c.asg};
          merged.asg.insert(opt.asg.begin(), opt.asg.end());
          next.push_back(std::move(merged));
        }
      }
      cands = std::move(next);
      if (cands.empty()) break;
    }
    return cands;
  }

  std::vector<Cand> base_ends(const RhsExpr& e, size_t ki) {
    if (e.kind == RhsExpr::Kind::NontermRef) {
      if (ki < limit && m.ref(children[ki], e)) return {{ki + 1, {{static_cast<int>(ki), &e}}}};
      return {};
    }
    // group: alternatives in declaration order
    std::vector<Cand> out;
    std::set<size_t> seen;
    for (const auto& alt : e.children.front().children) {
      for (auto& c : ends_of_seq(alt.children, 0, ki))
        if (seen.insert(c.end).second) out.push_back(std::move(c));
    }
    return out;
  }

  std::vector<Cand> star_closure(const RhsExpr& e, size_t ki) {
    // longest-first: extend before accepting the current position; each
    // position is expanded once (the first arrival is the greediest path)
    std::vector<Cand> out;
    std::set<size_t> visited;
    std::function<void(size_t, const std::map<int, const RhsExpr*>&)> go =
        [&](size_t pos, const std::map<int, const RhsExpr*>& acc) {
          if (!visited.insert(pos).second) return;
          for (auto& b : base_ends(e, pos)) {
            if (b.end == pos) continue;
            auto merged = acc;
            merged.insert(b.asg.begin(), b.asg.end());
            go(b.end, merged);
          }
          out.push_back({pos, acc});
        };
    go(ki, {});
    return out;
  }
};

std::vector<Cand> Aligner::ends_of_elem(const RhsExpr& e, size_t ki) {
  switch (e.kind) {
    case RhsExpr::Kind::Terminal:
      if (ki < limit && m.terminal(children[ki], e.text))
        return {{ki + 1, {{static_cast<int>(ki), &e}}}};
      return {};
    case RhsExpr::Kind::OptionalKeyword: {
      std::vector<Cand> out;
      if (ki < limit && m.keyword(children[ki], e.text))
        out.push_back({ki + 1, {{static_cast<int>(ki), &e}}});
      out.push_back({ki, {}});
      return out;
    }
    case RhsExpr::Kind::NontermRef:
    case RhsExpr::Kind::Group: {
      switch (e.card) {
        case Card::One:
          return base_ends(e, ki);
        case Card::Opt: {
          auto out = base_ends(e, ki);
          bool has_empty = false;
          for (const auto& c : out) has_empty = has_empty || c.end == ki;
          if (!has_empty) out.push_back({ki, {}});
          return out;
        }
        case Card::Star:
          return star_closure(e, ki);
        case Card::Plus: {
          std::vector<Cand> out;
          std::set<size_t> seen;
          for (auto& b : base_ends(e, ki)) {
            for (auto& tail : star_closure(e, b.end)) {
              if (!seen.insert(tail.end).second) continue;
              Cand merged{tail.end, b.asg};
              merged.asg.insert(tail.asg.begin(), tail.asg.end());
              out.push_back(std::move(merged));
            }
          }
          return out;
        }
      }
      return {};
    }
    default:
      return {};
  }
}

}  // namespace

std::optional<Assignment> align_children(const RhsExpr& alt_seq,
                                         const std::vector<Node::Child>& children,
                                         size_t begin, size_t end, const Matcher& m) {
  Aligner a{children, end, m};
  for (auto& c : a.ends_of_seq(alt_seq.children, 0, begin))
    if (c.end == end) {
      Assignment out;
      out.elem_of = std::move(c.asg);
      return out;
    }
  return std::nullopt;
}

std::map<const RhsExpr*, int> element_order(const RhsExpr& body) {
  std::map<const RhsExpr*, int> out;
  int next = 0;
  std::function<void(const RhsExpr&)> walk = [&](const RhsExpr& e) {
    out[&e] = next++;
    for (const auto& c : e.children) walk(c);
  };
  walk(body);
  return out;
}

}  // namespace dstl::align
