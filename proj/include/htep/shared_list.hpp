#pragma once

#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

namespace htep {

// Immutable singly linked list with structure sharing. push_front returns a
// new list whose tail is the original, so sibling plans share all but their
// own additions. Iteration runs newest-first; to_vector() reverses into
// insertion order.
template <class T>
class SharedList {
  struct Node {
    T value;
    std::shared_ptr<Node> next;
  };

 public:
  SharedList() = default;

  SharedList(const SharedList&) = default;
  SharedList(SharedList&&) noexcept = default;
  SharedList& operator=(const SharedList&) = default;
  SharedList& operator=(SharedList&&) noexcept = default;

  ~SharedList() {
    // Unlink long unshared suffixes iteratively; chained shared_ptr
    // destructors would otherwise recurse once per node.
    std::shared_ptr<Node> n = std::move(head_);
    while (n && n.use_count() == 1) {
      n = std::move(n->next);
    }
  }

  [[nodiscard]] SharedList push_front(T value) const {
    SharedList out;
    out.head_ = std::make_shared<Node>(Node{std::move(value), head_});
    out.size_ = size_ + 1;
    return out;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  const T& front() const { return head_->value; }

  template <class F>
  void for_each_newest_first(F&& f) const {
    for (const Node* n = head_.get(); n != nullptr; n = n->next.get()) f(n->value);
  }

  std::vector<T> to_vector() const {
    std::vector<T> out;
    out.reserve(size_);
    for_each_newest_first([&](const T& v) { out.push_back(v); });
    std::reverse(out.begin(), out.end());
    return out;
  }

  // True iff `other` is a suffix of this list (shares the tail node).
  bool extends(const SharedList& other) const {
    if (other.size_ > size_) return false;
    const Node* n = head_.get();
    for (std::size_t i = size_; i > other.size_; --i) n = n->next.get();
    return n == other.head_.get();
  }

 private:
  std::shared_ptr<Node> head_;
  std::size_t size_ = 0;
};

}  // namespace htep
