#include "dyadscreen/prefix_trie.h"

namespace dyadscreen {

bool PrefixTrie::insert(std::string_view prefix, std::vector<int> payload) {
  std::int32_t node = 0;
  for (const char c : prefix) {
    auto& children = nodes_[static_cast<std::size_t>(node)].children;
    const auto key = static_cast<unsigned char>(c);
    const auto it = children.find(key);
    if (it != children.end()) {
      node = it->second;
      continue;
    }
    const auto next = static_cast<std::int32_t>(nodes_.size());
    children.emplace(key, next);
    nodes_.emplace_back();
    node = next;
  }
  Node& target = nodes_[static_cast<std::size_t>(node)];
  if (target.terminal) return false;
  target.terminal = true;
  target.payload = std::move(payload);
  ++size_;
  return true;
}

std::vector<int> PrefixTrie::lookup(std::string_view key) const {
  std::vector<int> out;
  for_each_match(key, [&](int value) { out.push_back(value); });
  return out;
}

bool PrefixTrie::contains(std::string_view prefix) const {
  std::int32_t node = 0;
  for (const char c : prefix) {
    const auto& children = nodes_[static_cast<std::size_t>(node)].children;
    const auto it = children.find(static_cast<unsigned char>(c));
    if (it == children.end()) return false;
    node = it->second;
  }
  return nodes_[static_cast<std::size_t>(node)].terminal;
}

}  // namespace dyadscreen
