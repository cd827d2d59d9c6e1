#include <doctest.h>

#include "rbmm/runtime.hpp"

using namespace rbmm;

TEST_CASE("allocation spills into new pages") {
  RuntimeConfig cfg;
  cfg.page_size = 16;
  cfg.page_block = 2;
  RegionManager rm(cfg);
  int h = rm.create();
  for (int i = 0; i < 10; ++i) rm.alloc(h, 3);
  CHECK(rm.words_of(h) == 30);
  CHECK(rm.stats.words_total == 30);
  CHECK(rm.stats.regions_total == 1);
  CHECK(rm.size_record(h).pages > 1);
}

TEST_CASE("remove reclaims unprotected regions") {
  RegionManager rm;
  int a = rm.create(), b = rm.create();
  rm.alloc(a, 4);
  rm.alloc(b, 2);
  CHECK(rm.stats.regions_max == 2);
  CHECK(rm.stats.words_max == 6);
  CHECK_FALSE(rm.remove(a));
  CHECK(rm.reclaimed(a));
  CHECK(rm.live(b));
  CHECK(rm.stats.words_live == 2);
}

TEST_CASE("size records restore a region to a choice point") {
  RegionManager rm;
  int h = rm.create();
  rm.alloc(h, 5);
  SizeRecord rec = rm.size_record(h);
  rm.alloc(h, 7);
  rm.restore(rec);
  CHECK(rm.words_of(h) == 5);
}

TEST_CASE("regions created after a sequence number are reclaimed together") {
  RegionManager rm;
  int old = rm.create();
  uint64_t seq = rm.next_seq();
  int a = rm.create(), b = rm.create();
  rm.reclaim_new(seq);
  CHECK(rm.live(old));
  CHECK(rm.reclaimed(a));
  CHECK(rm.reclaimed(b));
}

TEST_CASE("frame words: fixed part plus per-record and per-region parts") {
  DisjFrame d;
  d.recs.resize(3);
  d.prot = {1};
  CHECK(d.words() == 4 + 1 + 9);
  IteFrame i;
  i.prot = {1, 2};
  CHECK(i.words() == 6);
  CommitFrame c;
  c.entries.resize(2);
  CHECK(c.words() == 9);
}
