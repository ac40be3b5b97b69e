// Allocation accounting for the complexity measurements. The counters live
// here; a binary opts in by compiling one translation unit that defines
// GMOR_DEFINE_TRACKING_OPERATORS before including this header, which
// installs global new/delete overrides feeding the counters.
#pragma once

#include <atomic>
#include <cstddef>

namespace gmor::memtrack {

inline std::atomic<std::size_t>& current_bytes() {
    static std::atomic<std::size_t> v{0};
    return v;
}

inline std::atomic<std::size_t>& peak_bytes() {
    static std::atomic<std::size_t> v{0};
    return v;
}

inline void on_alloc(std::size_t n) noexcept {
    const std::size_t cur = current_bytes().fetch_add(n, std::memory_order_relaxed) + n;
    std::size_t prev = peak_bytes().load(std::memory_order_relaxed);
    while (cur > prev &&
           !peak_bytes().compare_exchange_weak(prev, cur, std::memory_order_relaxed)) {
    }
}

inline void on_free(std::size_t n) noexcept {
    current_bytes().fetch_sub(n, std::memory_order_relaxed);
}

inline std::size_t current() noexcept { return current_bytes().load(std::memory_order_relaxed); }
inline std::size_t peak() noexcept { return peak_bytes().load(std::memory_order_relaxed); }
inline void reset_peak() noexcept { peak_bytes().store(current(), std::memory_order_relaxed); }

}  // namespace gmor::memtrack

#ifdef GMOR_DEFINE_TRACKING_OPERATORS

#include <cstdlib>
#include <malloc.h>
#include <new>

namespace gmor::memtrack::detail {

inline void* tracked_alloc(std::size_t size) {
    void* p = std::malloc(size ? size : 1);
    if (!p) throw std::bad_alloc();
    on_alloc(malloc_usable_size(p));
    return p;
}

inline void tracked_free(void* p) noexcept {
    if (!p) return;
    on_free(malloc_usable_size(p));
    std::free(p);
}

inline void* tracked_alloc_aligned(std::size_t size, std::size_t align) {
    void* p = nullptr;
    if (posix_memalign(&p, align < sizeof(void*) ? sizeof(void*) : align, size ? size : 1) != 0)
        throw std::bad_alloc();
    on_alloc(malloc_usable_size(p));
    return p;
}

}  // namespace gmor::memtrack::detail

void* operator new(std::size_t size) { return gmor::memtrack::detail::tracked_alloc(size); }
void* operator new[](std::size_t size) { return gmor::memtrack::detail::tracked_alloc(size); }
void* operator new(std::size_t size, std::align_val_t align) {
    return gmor::memtrack::detail::tracked_alloc_aligned(size, static_cast<std::size_t>(align));
}
void* operator new[](std::size_t size, std::align_val_t align) {
    return gmor::memtrack::detail::tracked_alloc_aligned(size, static_cast<std::size_t>(align));
}
void operator delete(void* p) noexcept { gmor::memtrack::detail::tracked_free(p); }
void operator delete[](void* p) noexcept { gmor::memtrack::detail::tracked_free(p); }
void operator delete(void* p, std::size_t) noexcept { gmor::memtrack::detail::tracked_free(p); }
void operator delete[](void* p, std::size_t) noexcept { gmor::memtrack::detail::tracked_free(p); }
void operator delete(void* p, std::align_val_t) noexcept { gmor::memtrack::detail::tracked_free(p); }
void operator delete[](void* p, std::align_val_t) noexcept { gmor::memtrack::detail::tracked_free(p); }

#endif  // GMOR_DEFINE_TRACKING_OPERATORS
