#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rbmm {

constexpr int kDefaultPageSize = 2048;
constexpr int kDefaultPageBlock = 100;
// Words of a region header, carved out of the first page. Not counted as
// program data.
constexpr int kHeaderWords = 8;

struct RuntimeConfig {
  int page_size = kDefaultPageSize;  // words, including the page link word
  int page_block = kDefaultPageBlock;
};

// A heap word. Cells hold argument values; a reference carries the handle of
// the region it points into.
struct Value {
  int64_t payload = 0;  // integer value or cell address
  int32_t functor = -1;  // -1 for integers
  int32_t region = -1;   // -1 unless a cell reference
};

struct FrameStats {
  uint64_t total = 0;      // frames pushed
  uint64_t max = 0;        // largest number on the stack at once
  uint64_t words = 0;      // words over all pushed frames
  uint64_t max_words = 0;  // largest words on the stack at once
  uint64_t size_records = 0;
  uint64_t protected_regions = 0;

  uint64_t depth = 0, live_words = 0;  // current, for the max trackers
  void push(uint64_t w);
  void pop(uint64_t w);
};

struct RunStats {
  uint64_t regions_total = 0, regions_max = 0;
  uint64_t words_total = 0, words_max = 0;
  uint64_t slr = 0;
  uint64_t wasted_words = 0;
  uint64_t new_alloc_words = 0, new_region_words = 0, then_words = 0, commit_words = 0;
  FrameStats disj, ite, commit;
  uint64_t solutions = 0;
  uint64_t steps = 0;

  uint64_t regions_live = 0, words_live = 0;  // current, for the max trackers
  double saving() const { return words_total ? 1.0 - double(words_max) / double(words_total) : 0.0; }
};

// Why a region is reclaimed; selects the instant-reclaim counter.
enum class ReclaimCause { Remove, NewRegion, Then, Commit, Protected };

struct SizeRecord {
  int region;
  int pages;      // number of pages in use
  int next_free;  // index in the newest page
  uint64_t words;
};

struct DisjFrame {
  uint64_t saved_seq = 0;
  std::vector<int> prot;
  std::vector<SizeRecord> recs;
  uint64_t words() const { return 4 + prot.size() + 3 * recs.size(); }
};

struct IteFrame {
  uint64_t saved_seq = 0;
  std::vector<int> prot;  // -1 once handled after the condition
  std::vector<SizeRecord> recs;
  uint64_t words() const { return 4 + prot.size() + 3 * recs.size(); }
};

struct CommitSlot {
  int frame = -1, entry = -1;
  bool null() const { return frame < 0; }
};

struct CommitEntry {
  int region;  // -1 once reclaimed
  CommitSlot prev;
};

struct CommitFrame {
  uint64_t saved_seq = 0;
  size_t disj_top = 0, ite_top = 0;
  std::vector<CommitEntry> entries;
  uint64_t words() const { return 5 + 2 * entries.size(); }
};

class RegionManager {
public:
  explicit RegionManager(RuntimeConfig cfg = {});

  int create();
  // Allocates n words in the region's newest page, appending a page first
  // if they do not fit. Returns the address of the first word.
  int64_t alloc(int h, int n);
  Value &word(int64_t addr) { return mem_[static_cast<size_t>(addr)]; }

  // Logical remove: reclaims unless protected. Returns true if a mark was
  // set instead (the caller trails it).
  bool remove(int h);
  void reclaim(int h, ReclaimCause cause);

  bool live(int h) const;
  bool reclaimed(int h) const;
  bool marked_removed(int h) const;
  void set_removed(int h, bool v);
  uint64_t seq(int h) const;
  bool disj_protected(int h) const;
  bool ite_protected(int h) const;
  bool is_protected(int h) const { return disj_protected(h) || ite_protected(h); }
  uint64_t words_of(int h) const;

  SizeRecord size_record(int h) const;
  void restore(const SizeRecord &r);
  // Reclaims every region whose sequence number is at least `seq`.
  void reclaim_new(uint64_t seq);

  // Frame stacks; the frame index is its position.
  std::vector<DisjFrame> disj;
  std::vector<IteFrame> ite;
  std::vector<CommitFrame> commit;

  void push_disj(DisjFrame f);
  void pop_disj();
  void push_ite(IteFrame f);
  void pop_ite();  // also unprotects regions still pointing at the frame
  void push_commit(CommitFrame f);
  void pop_commit();
  void protect_ite(int h, int frame);
  void unprotect_ite(int h);
  CommitSlot commit_slot(int h) const;
  void set_commit_slot(int h, CommitSlot s);
  void set_destroy_at_commit(int h);
  bool destroy_at_commit(int h) const;
  // Discards disj and ite frames above the given tops.
  void cut_to(size_t disj_top, size_t ite_top);

  uint64_t next_seq() const { return seq_; }
  int newest() const { return head_; }  // -1 if none
  int older(int h) const;

  RunStats stats;
  const RuntimeConfig &config() const { return cfg_; }

private:
  struct Region {
    uint64_t seq = 0;
    std::vector<int> pages;
    int next_free = 0;
    uint64_t words = 0;
    int prev = -1, next = -1;  // region list: prev is newer, next is older
    int ite_frame = -1;
    CommitSlot commit_slot;
    bool destroy_at_commit = false;
    bool removed = false;
    bool reclaimed = false;
  };

  int take_page();
  void give_page(int p);
  Region &r(int h);
  const Region &r(int h) const;
  void note_words(Region &reg, int64_t delta);

  RuntimeConfig cfg_;
  std::vector<Value> mem_;
  std::vector<int> free_pages_;
  std::vector<Region> regions_;
  int head_ = -1;
  uint64_t seq_ = 1;
};

}  // namespace rbmm
