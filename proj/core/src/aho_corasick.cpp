#include "factrace/aho_corasick.hpp"

#include <algorithm>
#include <map>
#include <queue>

namespace factrace {

AhoCorasick::AhoCorasick(const std::vector<std::string>& patterns)
    : pattern_count_(patterns.size()) {
  // Build a pointer-free trie with ordered children first, then flatten.
  struct BuildNode {
    std::map<unsigned char, std::uint32_t> children;
    std::vector<PatternId> outputs;
  };
  std::vector<BuildNode> trie(1);
  for (PatternId id = 0; id < patterns.size(); ++id) {
    const auto& p = patterns[id];
    if (p.empty()) continue;
    std::uint32_t cur = 0;
    for (unsigned char c : p) {
      auto it = trie[cur].children.find(c);
      if (it == trie[cur].children.end()) {
        auto next = static_cast<std::uint32_t>(trie.size());
        trie[cur].children.emplace(c, next);
        trie.emplace_back();
        cur = next;
      } else {
        cur = it->second;
      }
    }
    trie[cur].outputs.push_back(id);
  }

  nodes_.resize(trie.size());
  for (std::uint32_t n = 0; n < trie.size(); ++n) {
    auto& node = nodes_[n];
    node.edge_begin = static_cast<std::uint32_t>(edges_.size());
    for (const auto& [c, target] : trie[n].children) edges_.push_back({c, target});
    node.edge_end = static_cast<std::uint32_t>(edges_.size());
    node.out_begin = static_cast<std::uint32_t>(outputs_.size());
    outputs_.insert(outputs_.end(), trie[n].outputs.begin(), trie[n].outputs.end());
    node.out_end = static_cast<std::uint32_t>(outputs_.size());
    node.terminal = !trie[n].outputs.empty();
  }

  // Breadth-first failure links; the root table doubles as its full goto.
  std::fill(std::begin(root_), std::end(root_), 0u);
  std::queue<std::uint32_t> queue;
  for (std::uint32_t e = nodes_[0].edge_begin; e < nodes_[0].edge_end; ++e) {
    root_[edges_[e].byte] = edges_[e].target;
    nodes_[edges_[e].target].fail = 0;
    queue.push(edges_[e].target);
  }
  while (!queue.empty()) {
    std::uint32_t u = queue.front();
    queue.pop();
    for (std::uint32_t e = nodes_[u].edge_begin; e < nodes_[u].edge_end; ++e) {
      std::uint32_t v = edges_[e].target;
      unsigned char c = edges_[e].byte;
      nodes_[v].fail = step(nodes_[u].fail, c);
      std::uint32_t f = nodes_[v].fail;
      nodes_[v].dict_link = nodes_[f].terminal ? f : nodes_[f].dict_link;
      queue.push(v);
    }
  }
  if (nodes_.empty()) nodes_.emplace_back();
}

std::uint32_t AhoCorasick::goto_edge(std::uint32_t state, unsigned char c) const {
  const Node& n = nodes_[state];
  auto first = edges_.begin() + n.edge_begin;
  auto last = edges_.begin() + n.edge_end;
  auto it = std::lower_bound(first, last, c, [](const Edge& e, unsigned char b) { return e.byte < b; });
  if (it != last && it->byte == c) return it->target;
  return kNone;
}

std::vector<AhoCorasick::PatternId> AhoCorasick::distinct_matches(std::string_view text) const {
  std::vector<PatternId> hits;
  scan(text, [&](PatternId id) { hits.push_back(id); });
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  return hits;
}

}  // namespace factrace
