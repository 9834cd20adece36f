#ifndef DYADSCREEN_PREFIX_TRIE_H_
#define DYADSCREEN_PREFIX_TRIE_H_

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

namespace dyadscreen {

// Byte-keyed trie mapping prefixes to integer payload sets. lookup() reports
// the payloads of every stored prefix of the query, shortest first; there is
// no longest-match exclusivity.
class PrefixTrie {
 public:
  PrefixTrie() : nodes_(1) {}

  // Returns false if `prefix` was already present.
  bool insert(std::string_view prefix, std::vector<int> payload);

  template <typename Fn>
  void for_each_match(std::string_view key, Fn&& fn) const {
    std::int32_t node = 0;
    for (std::size_t i = 0;; ++i) {
      const Node& current = nodes_[static_cast<std::size_t>(node)];
      if (current.terminal) {
        for (int value : current.payload) fn(value);
      }
      if (i == key.size()) break;
      const auto it = current.children.find(static_cast<unsigned char>(key[i]));
      if (it == current.children.end()) break;
      node = it->second;
    }
  }

  std::vector<int> lookup(std::string_view key) const;
  bool contains(std::string_view prefix) const;
  std::size_t size() const { return size_; }

 private:
  struct Node {
    std::map<unsigned char, std::int32_t> children;
    std::vector<int> payload;
    bool terminal = false;
  };
  std::vector<Node> nodes_;
  std::size_t size_ = 0;
};

}  // namespace dyadscreen

#endif  // DYADSCREEN_PREFIX_TRIE_H_
