#include "cltrack/memory/memory_bank.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "cltrack/core/error.hpp"
#include "cltrack/core/fault.hpp"
#include "cltrack/core/math.hpp"

namespace cltrack::memory {

std::string_view to_string(EntryKind kind) {
    switch (kind) {
    case EntryKind::Initial:
        return "initial";
    case EntryKind::ShortTerm:
        return "short";
    case EntryKind::LongTerm:
        return "long";
    }
    return "unknown";
}

MemoryEntry make_entry(const ScoreReport& report, EntryKind kind) {
    if (!report.embedding) {
        throw PreconditionError(
            fmt::format("memory: frame {} has no embedding", report.frame.value));
    }
    if (!(report.embedding->norm() > 0.0)) {
        throw PreconditionError(
            fmt::format("memory: frame {} has a zero-norm embedding", report.frame.value));
    }
    return MemoryEntry{report.frame, *report.embedding, report.iou_score, kind};
}

// ---------------------------------------------------------------------------

CandidatePool::CandidatePool(int capacity) : capacity_(static_cast<std::size_t>(capacity)) {
    if (capacity < 1) {
        throw PreconditionError("candidate pool capacity must be >= 1");
    }
    entries_.reserve(capacity_);
}

bool CandidatePool::offer(MemoryEntry entry, double gamma_iou) {
    if (full()) {
        throw PreconditionError("candidate pool is full; drain it with select_diverse first");
    }
    if (!entries_.empty() && entry.frame <= entries_.back().frame) {
        throw PreconditionError("candidate pool: frame indices must increase");
    }
    if (!(entry.iou_score > gamma_iou)) {
        return false;
    }
    entries_.push_back(std::move(entry));
    return true;
}

MemoryEntry select_diverse(CandidatePool& pool, const MemoryEntry& latest_long) {
    if (!pool.full()) {
        throw PreconditionError(fmt::format("select_diverse: pool holds {} of {} candidates",
                                            pool.size(), pool.capacity()));
    }
    const bool inverted = fault::active(fault::Fault::DiversityArgmax);
    const auto& entries = pool.entries();
    std::size_t best = 0;
    double best_sim = cosine_similarity(entries[0].embedding, latest_long.embedding);
    for (std::size_t i = 1; i < entries.size(); ++i) {
        const double sim = cosine_similarity(entries[i].embedding, latest_long.embedding);
        if (inverted ? sim > best_sim : sim < best_sim) {
            best = i;
            best_sim = sim;
        }
    }
    MemoryEntry selected = entries[best];
    selected.kind = EntryKind::LongTerm;
    pool.clear();
    return selected;
}

// ---------------------------------------------------------------------------

LongTermBank::LongTermBank(MemoryEntry initial, int queue_capacity)
    : initial_(std::move(initial)), queue_capacity_(static_cast<std::size_t>(queue_capacity)) {
    initial_->kind = EntryKind::Initial;
}

const MemoryEntry& LongTermBank::initial() const {
    if (!initial_) {
        throw PreconditionError("long-term bank is not initialized");
    }
    return *initial_;
}

void LongTermBank::push(MemoryEntry entry) {
    const auto& newest = latest();
    if (entry.frame <= newest.frame) {
        throw PreconditionError(fmt::format("long-term push: frame {} is not newer than {}",
                                            entry.frame.value, newest.frame.value));
    }
    if (queue_capacity_ == 0) {
        return;
    }
    entry.kind = EntryKind::LongTerm;
    queue_.push_back(std::move(entry));
    while (queue_.size() > queue_capacity_) {
        queue_.pop_front();
    }
}

const MemoryEntry& LongTermBank::latest() const {
    if (!initial_) {
        throw PreconditionError("long-term bank is not initialized");
    }
    return queue_.empty() ? *initial_ : queue_.back();
}

// ---------------------------------------------------------------------------

std::int64_t MemorySnapshot::span() const {
    std::optional<FrameIndex> oldest;
    std::optional<FrameIndex> newest;
    for (const auto& it : items) {
        if (it.kind == EntryKind::Initial) {
            continue;
        }
        if (!oldest || it.frame < *oldest) {
            oldest = it.frame;
        }
        if (!newest || it.frame > *newest) {
            newest = it.frame;
        }
    }
    return oldest ? (*newest - *oldest) + 1 : 0;
}

std::string MemorySnapshot::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& it : items) {
        arr.push_back({{"frame", it.frame.value},
                       {"kind", std::string(to_string(it.kind))},
                       {"iou", it.iou_score},
                       {"hash", fmt::format("{:016x}", it.embedding_hash)}});
    }
    nlohmann::json j;
    j["items"] = std::move(arr);
    j["span"] = span();
    return j.dump();
}

// ---------------------------------------------------------------------------

namespace {

int long_queue_capacity(const TrackerConfig& config) {
    switch (config.policy) {
    case MemoryPolicy::Vanilla:
    case MemoryPolicy::Extended:
        return 0;
    case MemoryPolicy::Interval:
        return config.interval_keep;
    case MemoryPolicy::DLM:
        return config.n_l - 1;
    }
    return 0;
}

const TrackerConfig& validated(const TrackerConfig& config) {
    config.validate();
    return config;
}

}  // namespace

MemoryBank::MemoryBank(const ScoreReport& initial, const TrackerConfig& config)
    : config_(validated(config)),
      short_capacity_(static_cast<std::size_t>(config.effective_short_term_capacity())),
      long_term_(make_entry(initial, EntryKind::Initial), long_queue_capacity(config)),
      pool_(config.n_p),
      last_frame_(initial.frame) {}

void MemoryBank::push_short(const MemoryEntry& entry) {
    short_term_.push_back(entry);
    while (short_term_.size() > short_capacity_) {
        short_term_.pop_front();
    }
}

void MemoryBank::update(const ScoreReport& report) {
    if (report.frame <= last_frame_) {
        throw PreconditionError(fmt::format("memory update: frame {} does not follow frame {}",
                                            report.frame.value, last_frame_.value));
    }
    auto entry = make_entry(report, EntryKind::ShortTerm);
    last_frame_ = report.frame;
    ++updates_;
    push_short(entry);

    switch (config_.policy) {
    case MemoryPolicy::Vanilla:
    case MemoryPolicy::Extended:
        break;
    case MemoryPolicy::Interval:
        if (updates_ % config_.interval_every == 0) {
            long_term_.push(entry);
        }
        break;
    case MemoryPolicy::DLM:
        pool_.offer(entry, config_.gamma_iou);
        if (pool_.full()) {
            long_term_.push(select_diverse(pool_, long_term_.latest()));
        }
        break;
    }
}

std::vector<MemoryEntry> MemoryBank::assemble_context() const {
    std::vector<MemoryEntry> out;
    out.reserve(1 + long_term_.queue().size() + short_term_.size());
    auto add = [&](const MemoryEntry& e) {
        const bool dup = std::any_of(out.begin(), out.end(),
                                     [&](const MemoryEntry& o) { return o.frame == e.frame; });
        if (!dup) {
            out.push_back(e);
        }
    };
    add(long_term_.initial());
    for (const auto& e : long_term_.queue()) {
        add(e);
    }
    for (const auto& e : short_term_) {
        add(e);
    }
    return out;
}

MemorySnapshot MemoryBank::snapshot() const {
    MemorySnapshot snap;
    for (const auto& e : assemble_context()) {
        snap.items.push_back({e.frame, e.kind, e.iou_score, e.embedding.hash()});
    }
    return snap;
}

}  // namespace cltrack::memory
