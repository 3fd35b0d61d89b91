#pragma once

#include <cstddef>
#include <list>
#include <unordered_map>
#include <utility>

namespace newsky::resolver {

// Not thread-safe; RefResolver guards it.
template <typename Key, typename Value>
class LruCache {
public:
    explicit LruCache(std::size_t capacity) : capacity_(capacity) {}

    /// Marks the entry most recently used. nullptr on miss.
    Value* get(const Key& key) {
        const auto it = index_.find(key);
        if (it == index_.end()) return nullptr;
        order_.splice(order_.begin(), order_, it->second);
        return &it->second->second;
    }

    void put(Key key, Value value) {
        if (capacity_ == 0) return;
        if (const auto it = index_.find(key); it != index_.end()) {
            it->second->second = std::move(value);
            order_.splice(order_.begin(), order_, it->second);
            return;
        }
        order_.emplace_front(std::move(key), std::move(value));
        index_.emplace(order_.front().first, order_.begin());
        if (order_.size() > capacity_) {
            index_.erase(order_.back().first);
            order_.pop_back();
        }
    }

    void erase(const Key& key) {
        const auto it = index_.find(key);
        if (it == index_.end()) return;
        order_.erase(it->second);
        index_.erase(it);
    }

    std::size_t size() const { return order_.size(); }
    std::size_t capacity() const { return capacity_; }

    /// Most recently used first.
    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& [key, value] : order_) fn(key, value);
    }

private:
    using Entry = std::pair<Key, Value>;
    std::size_t capacity_;
    std::list<Entry> order_;
    std::unordered_map<Key, typename std::list<Entry>::iterator> index_;
};

}  // namespace newsky::resolver
