// Copyright 2026 The sadp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Deterministic generator for the bundled toy PII corpus. One plain-text
// document per line, roughly 50 words each, with PII surfaces drawn from
// small pools so the vocabulary stays desk-sized. Regenerate with:
//   gen-toy-corpus data/toy_corpus.txt 420 20260808

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "rng.hpp"

namespace {

const std::vector<std::string> kFiller = {
    "the",      "a",        "of",       "and",      "to",      "in",      "is",
    "was",      "for",      "on",       "with",     "as",      "at",      "by",
    "from",     "that",     "this",     "it",       "be",      "are",     "or",
    "an",       "we",       "has",      "have",     "had",     "not",     "but",
    "they",     "will",     "can",      "all",      "new",     "more",    "one",
    "two",      "time",     "team",     "report",   "system",  "update",  "account",
    "service",  "request",  "order",    "status",   "review",  "change",  "issue",
    "ticket",   "support",  "customer", "record",   "billing", "invoice", "payment",
    "shipment", "delivery", "address",  "office",   "meeting", "agenda",  "project",
    "release",  "version",  "server",   "network",  "login",   "session", "device",
    "monitor",  "alert",    "notice",   "message",  "reply",   "thread",  "queue",
    "batch",    "process",  "task",     "plan",     "goal",    "result",  "summary",
    "detail",   "note",     "next",     "last",     "first",   "open",    "closed",
    "pending",  "done",     "ready",    "sent",     "received", "updated", "created",
    "deleted",  "moved",    "copied",   "checked",  "verified", "approved", "rejected",
    "manager",  "agent",    "client",   "vendor",   "partner",  "user",    "admin",
    "today",    "tomorrow", "monday",   "friday",   "week",     "month",   "quarter",
    "year",     "morning",  "evening",  "later",    "soon",     "early",   "again",
    "please",   "thanks",   "regards",  "hello",    "dear",     "follow",  "contact",
    "call",     "send",     "email",    "phone",    "visit",    "confirm", "cancel",
    "schedule", "assign",   "escalate", "resolve",  "close",    "reopen",  "forward",
};

const std::vector<std::string> kLocalParts = {
    "news",  "sales", "info",  "help",   "billing", "orders", "team",
    "admin", "desk",  "ops",   "staff",  "field",   "lab",    "store",
};
const std::vector<std::string> kDomains = {
    "example.com", "mail.net", "corp.org", "service.io",
};

// First names kept disjoint from the filler words; a subset also feeds the
// PERSON_NAME pool so the detector gazetteer finds them.
const std::vector<std::string> kNames = {
    "alice", "bob", "carol", "david", "erin",  "frank", "grace", "henry",
    "irene", "jack", "karen", "liam", "maria", "nathan", "olivia", "peter",
};

struct PiiPools {
  std::vector<std::string> emails;
  std::vector<std::string> ssns;
  std::vector<std::string> phones;
  std::vector<std::string> ips;
  std::vector<std::string> names;
  std::vector<std::string> cards;
  std::vector<std::string> dobs;
};

PiiPools build_pools(sadp::RngStream& rng) {
  PiiPools pools;
  for (const std::string& name : kNames) {
    for (std::size_t d = 0; d < 2; ++d) {
      pools.emails.push_back(name + "@" + kDomains[(d + name.size()) % kDomains.size()]);
    }
  }
  for (const std::string& lp : kLocalParts) {
    pools.emails.push_back(lp + "@" + kDomains[lp.size() % kDomains.size()]);
  }
  for (int i = 0; i < 12; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d-%02d-%04d",
                  100 + static_cast<int>(rng.next_u64() % 800),
                  10 + static_cast<int>(rng.next_u64() % 80),
                  1000 + static_cast<int>(rng.next_u64() % 9000));
    pools.ssns.push_back(buf);
  }
  for (int i = 0; i < 14; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d-555-%04d",
                  200 + static_cast<int>(rng.next_u64() % 700),
                  static_cast<int>(rng.next_u64() % 10000));
    pools.phones.push_back(buf);
  }
  for (int i = 0; i < 16; ++i) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "10.%d.%d.%d", static_cast<int>(rng.next_u64() % 32),
                  static_cast<int>(rng.next_u64() % 256),
                  static_cast<int>(rng.next_u64() % 256));
    pools.ips.push_back(buf);
  }
  pools.names = kNames;
  for (int i = 0; i < 8; ++i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "4%03d-%04d-%04d-%04d",
                  static_cast<int>(rng.next_u64() % 1000),
                  static_cast<int>(rng.next_u64() % 10000),
                  static_cast<int>(rng.next_u64() % 10000),
                  static_cast<int>(rng.next_u64() % 10000));
    pools.cards.push_back(buf);
  }
  for (int i = 0; i < 10; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "19%02d-%02d-%02d",
                  40 + static_cast<int>(rng.next_u64() % 60),
                  1 + static_cast<int>(rng.next_u64() % 12),
                  1 + static_cast<int>(rng.next_u64() % 28));
    pools.dobs.push_back(buf);
  }
  return pools;
}

const std::string& pick(const std::vector<std::string>& pool, sadp::RngStream& rng) {
  return pool[rng.next_u64() % pool.size()];
}

// Skewed first-order transition table over the filler words. This gives the
// corpus real next-word structure (conditional entropy around 1.1 nats), so
// a trained bigram-capable model separates cleanly from an untrained one.
struct WordChain {
  static constexpr int kFanout = 4;
  std::vector<std::array<std::uint32_t, kFanout>> successors;

  explicit WordChain(std::uint64_t seed) {
    sadp::RngStream rng(seed, /*stream=*/7);
    successors.resize(kFiller.size());
    for (std::size_t i = 0; i < kFiller.size(); ++i) {
      for (int s = 0; s < kFanout; ++s) {
        successors[i][static_cast<std::size_t>(s)] =
            static_cast<std::uint32_t>(rng.next_u64() % kFiller.size());
      }
    }
  }

  std::uint32_t step(std::uint32_t current, sadp::RngStream& rng) const {
    const double u = rng.next_unit();
    int slot = 3;
    if (u < 0.55) slot = 0;
    else if (u < 0.80) slot = 1;
    else if (u < 0.95) slot = 2;
    return successors[current][static_cast<std::size_t>(slot)];
  }
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: gen-toy-corpus <out_path> [docs] [seed]\n");
    return 2;
  }
  const std::string out_path = argv[1];
  const int docs = argc > 2 ? std::atoi(argv[2]) : 420;
  const std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 20260808ULL;

  sadp::RngStream rng(seed);
  const PiiPools pools = build_pools(rng);
  const WordChain chain(seed);

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::fprintf(stderr, "cannot write %s\n", out_path.c_str());
    return 2;
  }

  std::uint64_t total_words = 0, pii_words = 0;
  for (int d = 0; d < docs; ++d) {
    const std::size_t length = 45 + rng.next_u64() % 11;
    std::vector<std::string> words;
    words.reserve(length);
    auto cursor = static_cast<std::uint32_t>(rng.next_u64() % kFiller.size());
    for (std::size_t i = 0; i < length; ++i) {
      words.push_back(kFiller[cursor]);
      cursor = chain.step(cursor, rng);
    }

    if (rng.next_unit() < 0.32) {
      const std::size_t insertions = 1 + rng.next_u64() % 3;
      for (std::size_t i = 0; i < insertions; ++i) {
        const std::uint64_t roll = rng.next_u64() % 100;
        const std::string* surface;
        if (roll < 55) surface = &pick(pools.emails, rng);
        else if (roll < 67) surface = &pick(pools.ips, rng);
        else if (roll < 77) surface = &pick(pools.phones, rng);
        else if (roll < 85) surface = &pick(pools.names, rng);
        else if (roll < 91) surface = &pick(pools.ssns, rng);
        else if (roll < 96) surface = &pick(pools.dobs, rng);
        else surface = &pick(pools.cards, rng);
        words[rng.next_u64() % words.size()] = *surface;
      }
    }

    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) out << ' ';
      out << words[i];
    }
    out << '\n';
    total_words += words.size();
  }
  (void)pii_words;
  std::fprintf(stderr, "wrote %d docs, %llu words to %s\n", docs,
               static_cast<unsigned long long>(total_words), out_path.c_str());
  return 0;
}
