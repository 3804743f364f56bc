#pragma once

// Live-scalar accounting. Every long-lived buffer in the library holds a
// ScalarLease for its element count, so peak storage can be read back
// deterministically instead of sampling process RSS.

#include <array>
#include <atomic>
#include <cstdint>
#include <string_view>
#include <utility>

namespace sketchycgm {

enum class LedgerModule : std::size_t {
  operators = 0,
  losses,
  sketch,
  spectral,
  solver,
  reference,
  kCount
};

constexpr std::string_view module_name(LedgerModule m) {
  switch (m) {
    case LedgerModule::operators: return "operators";
    case LedgerModule::losses: return "losses";
    case LedgerModule::sketch: return "sketch";
    case LedgerModule::spectral: return "spectral";
    case LedgerModule::solver: return "solver";
    case LedgerModule::reference: return "reference";
    default: return "unknown";
  }
}

class AllocationLedger {
 public:
  static constexpr std::size_t kModules = static_cast<std::size_t>(LedgerModule::kCount);

  static AllocationLedger& global() {
    static AllocationLedger ledger;
    return ledger;
  }

  void acquire(LedgerModule m, std::int64_t count) {
    live_[index(m)].fetch_add(count, std::memory_order_relaxed);
    const std::int64_t now = total_.fetch_add(count, std::memory_order_acq_rel) + count;
    std::int64_t peak = peak_.load(std::memory_order_relaxed);
    while (now > peak && !peak_.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
    }
  }

  void release(LedgerModule m, std::int64_t count) {
    live_[index(m)].fetch_sub(count, std::memory_order_relaxed);
    total_.fetch_sub(count, std::memory_order_acq_rel);
  }

  std::int64_t live(LedgerModule m) const { return live_[index(m)].load(std::memory_order_relaxed); }
  std::int64_t live_total() const { return total_.load(std::memory_order_acquire); }
  std::int64_t peak_total() const { return peak_.load(std::memory_order_relaxed); }

  /// Restart peak tracking from the current live total.
  void reset_peak() { peak_.store(live_total(), std::memory_order_relaxed); }

 private:
  static constexpr std::size_t index(LedgerModule m) { return static_cast<std::size_t>(m); }

  std::array<std::atomic<std::int64_t>, kModules> live_{};
  std::atomic<std::int64_t> total_{0};
  std::atomic<std::int64_t> peak_{0};
};

/// RAII registration of `count` live scalars against one module.
class ScalarLease {
 public:
  ScalarLease() = default;
  ScalarLease(LedgerModule m, std::int64_t count) : module_(m), count_(count) {
    if (count_ > 0) AllocationLedger::global().acquire(module_, count_);
  }
  ScalarLease(const ScalarLease& other) : ScalarLease(other.module_, other.count_) {}
  ScalarLease(ScalarLease&& other) noexcept
      : module_(other.module_), count_(std::exchange(other.count_, 0)) {}
  ScalarLease& operator=(ScalarLease other) noexcept {
    swap(other);
    return *this;
  }
  ~ScalarLease() {
    if (count_ > 0) AllocationLedger::global().release(module_, count_);
  }

  void swap(ScalarLease& other) noexcept {
    std::swap(module_, other.module_);
    std::swap(count_, other.count_);
  }

  std::int64_t count() const { return count_; }

 private:
  LedgerModule module_ = LedgerModule::solver;
  std::int64_t count_ = 0;
};

}  // namespace sketchycgm
