#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace factrace {

// Byte-level Aho-Corasick automaton. Patterns are matched as raw byte
// substrings, so UTF-8 text needs no decoding on the hot path.
//
// The root keeps a dense 256-way table; other nodes keep sorted sparse edge
// lists. Each node stores a dictionary-suffix link to the nearest node on its
// failure chain that terminates a pattern, so reporting costs one hop per hit.
class AhoCorasick {
 public:
  using PatternId = std::uint32_t;

  AhoCorasick() = default;
  // Duplicate patterns are allowed and get distinct ids; empty patterns are
  // ignored (they never match).
  explicit AhoCorasick(const std::vector<std::string>& patterns);

  std::size_t pattern_count() const noexcept { return pattern_count_; }
  std::size_t state_count() const noexcept { return nodes_.size(); }

  // Calls on_match(pattern_id) for every occurrence of every pattern.
  template <typename F>
  void scan(std::string_view text, F&& on_match) const {
    if (nodes_.empty()) return;
    std::uint32_t state = 0;
    for (unsigned char c : text) {
      state = step(state, c);
      std::uint32_t out = nodes_[state].terminal ? state : nodes_[state].dict_link;
      while (out != kNone) {
        for (std::uint32_t k = nodes_[out].out_begin; k < nodes_[out].out_end; ++k) {
          on_match(outputs_[k]);
        }
        out = nodes_[out].dict_link;
      }
    }
  }

  // Distinct pattern ids occurring in `text`, sorted ascending.
  std::vector<PatternId> distinct_matches(std::string_view text) const;

 private:
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

  struct Node {
    std::uint32_t edge_begin = 0;
    std::uint32_t edge_end = 0;
    std::uint32_t fail = 0;
    std::uint32_t dict_link = kNone;
    std::uint32_t out_begin = 0;
    std::uint32_t out_end = 0;
    bool terminal = false;
  };
  struct Edge {
    unsigned char byte;
    std::uint32_t target;
  };

  std::uint32_t goto_edge(std::uint32_t state, unsigned char c) const;

  std::uint32_t step(std::uint32_t state, unsigned char c) const {
    for (;;) {
      if (state == 0) return root_[c];
      std::uint32_t next = goto_edge(state, c);
      if (next != kNone) return next;
      state = nodes_[state].fail;
    }
  }

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<PatternId> outputs_;
  std::uint32_t root_[256] = {};
  std::size_t pattern_count_ = 0;
};

}  // namespace factrace
