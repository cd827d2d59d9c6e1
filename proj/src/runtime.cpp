#include "rbmm/runtime.hpp"

#include <algorithm>

#include "rbmm/common.hpp"

namespace rbmm {

void FrameStats::push(uint64_t w) {
  ++total;
  words += w;
  ++depth;
  live_words += w;
  max = std::max(max, depth);
  max_words = std::max(max_words, live_words);
}

void FrameStats::pop(uint64_t w) {
  --depth;
  live_words -= w;
}

RegionManager::RegionManager(RuntimeConfig cfg) : cfg_(cfg) {
  if (cfg_.page_size < kHeaderWords + 2) throw RuntimeError("page size too small");
  if (cfg_.page_block < 1) throw RuntimeError("page block must be positive");
}

RegionManager::Region &RegionManager::r(int h) { return regions_[static_cast<size_t>(h)]; }
const RegionManager::Region &RegionManager::r(int h) const { return regions_[static_cast<size_t>(h)]; }

int RegionManager::take_page() {
  if (free_pages_.empty()) {
    auto base = static_cast<int>(mem_.size() / static_cast<size_t>(cfg_.page_size));
    mem_.resize(mem_.size() + static_cast<size_t>(cfg_.page_block) * static_cast<size_t>(cfg_.page_size));
    for (int i = cfg_.page_block; i-- > 0;) free_pages_.push_back(base + i);
  }
  int p = free_pages_.back();
  free_pages_.pop_back();
  return p;
}

void RegionManager::give_page(int p) { free_pages_.push_back(p); }

int RegionManager::create() {
  int h = static_cast<int>(regions_.size());
  regions_.emplace_back();
  Region &reg = regions_.back();
  reg.seq = seq_++;
  reg.pages.push_back(take_page());
  reg.next_free = kHeaderWords;
  reg.next = head_;
  if (head_ >= 0) r(head_).prev = h;
  head_ = h;
  ++stats.regions_total;
  ++stats.regions_live;
  stats.regions_max = std::max(stats.regions_max, stats.regions_live);
  return h;
}

void RegionManager::note_words(Region &reg, int64_t delta) {
  reg.words = static_cast<uint64_t>(static_cast<int64_t>(reg.words) + delta);
  stats.words_live = static_cast<uint64_t>(static_cast<int64_t>(stats.words_live) + delta);
  stats.words_max = std::max(stats.words_max, stats.words_live);
  stats.slr = std::max(stats.slr, reg.words);
}

int64_t RegionManager::alloc(int h, int n) {
  int usable = cfg_.page_size - 1;
  if (n < 1 || n > usable - kHeaderWords)
    throw RuntimeError("allocation of " + std::to_string(n) + " words does not fit in a page");
  Region &reg = r(h);
  if (reg.next_free + n > usable) {
    stats.wasted_words += static_cast<uint64_t>(usable - reg.next_free);
    int p = take_page();
    Region &again = r(h);
    again.pages.push_back(p);
    again.next_free = 0;
  }
  Region &cur = r(h);
  int64_t addr = static_cast<int64_t>(cur.pages.back()) * cfg_.page_size + 1 + cur.next_free;
  cur.next_free += n;
  stats.words_total += static_cast<uint64_t>(n);
  note_words(cur, n);
  return addr;
}

bool RegionManager::live(int h) const { return h >= 0 && static_cast<size_t>(h) < regions_.size() && !r(h).reclaimed; }
bool RegionManager::reclaimed(int h) const { return r(h).reclaimed; }
bool RegionManager::marked_removed(int h) const { return r(h).removed; }
void RegionManager::set_removed(int h, bool v) { r(h).removed = v; }
uint64_t RegionManager::seq(int h) const { return r(h).seq; }
uint64_t RegionManager::words_of(int h) const { return r(h).words; }
int RegionManager::older(int h) const { return r(h).next; }

bool RegionManager::disj_protected(int h) const { return !disj.empty() && r(h).seq < disj.back().saved_seq; }
bool RegionManager::ite_protected(int h) const { return r(h).ite_frame >= 0; }

bool RegionManager::remove(int h) {
  if (!live(h)) throw SafetyViolation("remove of a reclaimed region");
  if (is_protected(h)) {
    Region &reg = r(h);
    reg.removed = true;
    if (!commit.empty() && reg.seq >= commit.back().saved_seq) reg.destroy_at_commit = true;
    return true;
  }
  reclaim(h, ReclaimCause::Remove);
  return false;
}

void RegionManager::reclaim(int h, ReclaimCause cause) {
  if (!live(h)) throw SafetyViolation("double reclaim of a region");
  Region &reg = r(h);
  for (CommitSlot s = reg.commit_slot; !s.null();) {
    CommitEntry &e = commit[static_cast<size_t>(s.frame)].entries[static_cast<size_t>(s.entry)];
    e.region = -1;
    s = e.prev;
  }
  reg.commit_slot = {};
  switch (cause) {
    case ReclaimCause::NewRegion: stats.new_region_words += reg.words; break;
    case ReclaimCause::Then: stats.then_words += reg.words; break;
    case ReclaimCause::Commit: stats.commit_words += reg.words; break;
    default: break;
  }
  stats.words_live -= reg.words;
  --stats.regions_live;
  for (int p : reg.pages) give_page(p);
  reg.pages.clear();
  if (reg.prev >= 0) r(reg.prev).next = reg.next;
  else head_ = reg.next;
  if (reg.next >= 0) r(reg.next).prev = reg.prev;
  reg.reclaimed = true;
  reg.ite_frame = -1;
}

SizeRecord RegionManager::size_record(int h) const {
  const Region &reg = r(h);
  return {h, static_cast<int>(reg.pages.size()), reg.next_free, reg.words};
}

void RegionManager::restore(const SizeRecord &rec) {
  if (!live(rec.region)) return;
  Region &reg = r(rec.region);
  while (static_cast<int>(reg.pages.size()) > rec.pages) {
    give_page(reg.pages.back());
    reg.pages.pop_back();
  }
  reg.next_free = rec.next_free;
  uint64_t delta = reg.words - rec.words;
  stats.new_alloc_words += delta;
  note_words(reg, -static_cast<int64_t>(delta));
}

void RegionManager::reclaim_new(uint64_t s) {
  while (head_ >= 0 && r(head_).seq >= s) reclaim(head_, ReclaimCause::NewRegion);
}

void RegionManager::push_disj(DisjFrame f) {
  stats.disj.push(f.words());
  stats.disj.size_records += f.recs.size();
  stats.disj.protected_regions += f.prot.size();
  disj.push_back(std::move(f));
}

void RegionManager::pop_disj() {
  stats.disj.pop(disj.back().words());
  disj.pop_back();
}

void RegionManager::push_ite(IteFrame f) {
  stats.ite.push(f.words());
  stats.ite.size_records += f.recs.size();
  stats.ite.protected_regions += f.prot.size();
  ite.push_back(std::move(f));
}

void RegionManager::pop_ite() {
  int idx = static_cast<int>(ite.size()) - 1;
  for (int h : ite.back().prot)
    if (h >= 0 && live(h) && r(h).ite_frame == idx) r(h).ite_frame = -1;
  stats.ite.pop(ite.back().words());
  ite.pop_back();
}

void RegionManager::push_commit(CommitFrame f) {
  stats.commit.push(f.words());
  stats.commit.protected_regions += f.entries.size();
  commit.push_back(std::move(f));
}

void RegionManager::pop_commit() {
  stats.commit.pop(commit.back().words());
  commit.pop_back();
}

void RegionManager::protect_ite(int h, int frame) { r(h).ite_frame = frame; }
void RegionManager::unprotect_ite(int h) {
  if (live(h)) r(h).ite_frame = -1;
}
CommitSlot RegionManager::commit_slot(int h) const { return r(h).commit_slot; }
void RegionManager::set_commit_slot(int h, CommitSlot s) { r(h).commit_slot = s; }
void RegionManager::set_destroy_at_commit(int h) { r(h).destroy_at_commit = true; }
bool RegionManager::destroy_at_commit(int h) const { return r(h).destroy_at_commit; }

void RegionManager::cut_to(size_t disj_top, size_t ite_top) {
  while (disj.size() > disj_top) pop_disj();
  while (ite.size() > ite_top) pop_ite();
}

}  // namespace rbmm
