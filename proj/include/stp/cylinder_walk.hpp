#pragma once

// Depth-first traversal of F^1 ∪ ... ∪ F^n that grows words on the left:
// the children of w are j·w, whose cylinder is phi_j(phi_w(base)). Every node
// costs one branch evaluation, independent of its depth.

#include <algorithm>
#include <future>
#include <span>
#include <thread>
#include <vector>

#include "stp/markov_ifs.hpp"

namespace stp {

struct CylinderNode {
  int depth = 0;
  Symbol first = 0;      // leftmost symbol of the word
  Interval interval;     // phi_w(base)
  Interval log_deriv;    // range of log|phi_w'| over base
};

// `extend(payload, j)` returns the payload of j·w given that of w;
// `visit(node, payload)` is called for every word of length 1..max_depth.
template <class Payload, class Extend, class Visit>
void walk_children(const BranchFamily& family, std::span<const Symbol> subset, int max_depth,
                   const CylinderNode& node, const Payload& payload, Extend& extend, Visit& visit) {
  for (Symbol j : subset) {
    CylinderNode child{node.depth + 1, j, clamp_unit(family.image(j, node.interval)),
                       node.log_deriv + family.log_abs_deriv(j, node.interval)};
    const Payload p = extend(payload, j);
    visit(child, p);
    if (child.depth < max_depth) walk_children(family, subset, max_depth, child, p, extend, visit);
  }
}

// Walks the subtree of words whose last symbol is `last` (i.e. w = ...·last).
template <class Payload, class Extend, class Visit>
void walk_suffix_tree(const BranchFamily& family, std::span<const Symbol> subset, int max_depth,
                      const Interval& base, Symbol last, const Payload& root, Extend extend,
                      Visit visit) {
  CylinderNode node{1, last, clamp_unit(family.image(last, base)), family.log_abs_deriv(last, base)};
  const Payload p = extend(root, last);
  visit(node, p);
  if (max_depth > 1) walk_children(family, subset, max_depth, node, p, extend, visit);
}

// fn(last) for every symbol of `subset`, in subset order. With `threaded`
// the symbols are dealt round-robin to worker threads; results are
// positionally identical either way.
template <class Fn>
auto map_last_symbols(std::span<const Symbol> subset, bool threaded, Fn fn) {
  using R = decltype(fn(Symbol{}));
  std::vector<R> out(subset.size());
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (!threaded || hw == 1 || subset.size() < 2) {
    for (std::size_t k = 0; k < subset.size(); ++k) out[k] = fn(subset[k]);
    return out;
  }
  const std::size_t workers = std::min(hw, subset.size());
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t k = w; k < subset.size(); k += workers) out[k] = fn(subset[k]);
    }));
  for (auto& j : jobs) j.get();
  return out;
}

}  // namespace stp
