#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cltrack/core/config.hpp"
#include "cltrack/core/types.hpp"

namespace cltrack::memory {

enum class EntryKind { Initial, ShortTerm, LongTerm };

std::string_view to_string(EntryKind kind);

struct MemoryEntry {
    FrameIndex frame;
    Embedding embedding;
    double iou_score = 0.0;
    EntryKind kind = EntryKind::ShortTerm;
};

/// Builds an entry from a report. Throws PreconditionError if the report carries no
/// embedding or a zero-norm one.
MemoryEntry make_entry(const ScoreReport& report, EntryKind kind);

/// High-confidence candidates waiting for diversity selection.
class CandidatePool {
public:
    explicit CandidatePool(int capacity);

    /// Appends `entry` iff entry.iou_score > gamma_iou.
    /// Throws PreconditionError if the pool is already full or the frame is not newer than
    /// every pooled frame.
    bool offer(MemoryEntry entry, double gamma_iou);

    bool full() const { return entries_.size() == capacity_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::vector<MemoryEntry>& entries() const { return entries_; }
    void clear() { entries_.clear(); }

private:
    std::size_t capacity_;
    std::vector<MemoryEntry> entries_;
};

/// Returns the pooled entry least cosine-similar to `latest_long` (ties: lowest frame)
/// and clears the pool. Throws PreconditionError unless the pool is full.
MemoryEntry select_diverse(CandidatePool& pool, const MemoryEntry& latest_long);

/// Permanent initial entry plus a FIFO of capacity n_l - 1.
class LongTermBank {
public:
    LongTermBank() = default;
    LongTermBank(MemoryEntry initial, int queue_capacity);

    bool initialized() const { return initial_.has_value(); }
    const MemoryEntry& initial() const;
    const std::deque<MemoryEntry>& queue() const { return queue_; }
    std::size_t queue_capacity() const { return queue_capacity_; }
    std::size_t size() const { return (initial_ ? 1 : 0) + queue_.size(); }

    void push(MemoryEntry entry);

    /// Newest queued entry, or the initial entry when the queue is empty.
    const MemoryEntry& latest() const;

private:
    std::optional<MemoryEntry> initial_;
    std::deque<MemoryEntry> queue_;
    std::size_t queue_capacity_ = 0;
};

struct SnapshotItem {
    FrameIndex frame;
    EntryKind kind;
    double iou_score;
    std::uint64_t embedding_hash;
};

/// Read-only summary of an assembled context.
struct MemorySnapshot {
    std::vector<SnapshotItem> items;

    std::size_t size() const { return items.size(); }
    /// newest frame - oldest non-initial frame + 1; 0 when only the initial entry exists.
    std::int64_t span() const;
    /// Single-line JSON: {"items":[{"frame":..,"kind":..,"iou":..,"hash":".."}],"span":..}
    std::string to_json() const;
};

/// Short-term queue, long-term bank and candidate pool behind one memory policy.
class MemoryBank {
public:
    MemoryBank(const ScoreReport& initial, const TrackerConfig& config);

    /// Applies the configured policy to a newly tracked frame.
    void update(const ScoreReport& report);

    /// [initial, long-term oldest..newest, short-term oldest..newest], deduplicated by frame.
    std::vector<MemoryEntry> assemble_context() const;
    MemorySnapshot snapshot() const;

    MemoryPolicy policy() const { return config_.policy; }
    const std::deque<MemoryEntry>& short_term() const { return short_term_; }
    const LongTermBank& long_term() const { return long_term_; }
    const CandidatePool& pool() const { return pool_; }
    std::size_t short_term_capacity() const { return short_capacity_; }
    std::int64_t updates() const { return updates_; }

private:
    void push_short(const MemoryEntry& entry);

    TrackerConfig config_;
    std::size_t short_capacity_;
    std::deque<MemoryEntry> short_term_;
    LongTermBank long_term_;
    CandidatePool pool_;
    std::int64_t updates_ = 0;
    FrameIndex last_frame_;
};

}  // namespace cltrack::memory
