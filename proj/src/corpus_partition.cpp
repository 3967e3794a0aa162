#include "cpglab/corpus.hpp"

#include <algorithm>
#include <set>

namespace cpglab::corpus {

const std::vector<LabeledRecord>& Partition::part(Part p) const {
    switch (p) {
        case Part::P1: return p1;
        case Part::P2: return p2;
        case Part::P3: return p3;
    }
    throw std::logic_error("bad part");
}

namespace {

void dedup_within(std::vector<LabeledRecord>& part, int& removed) {
    std::set<std::string> seen;
    std::vector<LabeledRecord> kept;
    for (auto& r : part) {
        if (seen.insert(r.record.normalized_hash).second)
            kept.push_back(std::move(r));
        else
            ++removed;
    }
    part = std::move(kept);
}

void remove_hashes(std::vector<LabeledRecord>& part, const std::set<std::string>& banned,
                   int& removed) {
    std::vector<LabeledRecord> kept;
    for (auto& r : part) {
        if (banned.count(r.record.normalized_hash))
            ++removed;
        else
            kept.push_back(std::move(r));
    }
    part = std::move(kept);
}

std::set<std::string> hashes_of(const std::vector<LabeledRecord>& part) {
    std::set<std::string> out;
    for (const auto& r : part) out.insert(r.record.normalized_hash);
    return out;
}

}  // namespace

Partition build_partition(const std::vector<Commit>& commits, int level_k, uint64_t seed) {
    if (level_k < 1) throw DataError("build_partition: level_k must be >= 1");

    Partition p;
    p.level_k = level_k;
    std::vector<const FunctionRecord*> unchanged_pool;

    for (const auto& c : commits) {
        int k = c.strictness();
        if (k == 1) {
            for (const auto& [before, after] : c.changed) {
                p.p1.push_back({before, 1, Part::P1});
                p.p1.push_back({after, 0, Part::P1});
            }
            for (const auto& f : c.unchanged) unchanged_pool.push_back(&f);
        } else if (k >= 2 && k <= level_k) {
            for (const auto& [before, after] : c.changed) {
                p.p2.push_back({before, 1, Part::P2});
                p.p2.push_back({after, 0, Part::P2});
            }
        }
    }
    if (p.p1.empty()) throw DataError("build_partition: no 1-strict commits, empty partition");

    // dedup p1/p2 and make them disjoint before sizing p3
    int removed = 0;
    dedup_within(p.p1, removed);
    dedup_within(p.p2, removed);
    remove_hashes(p.p2, hashes_of(p.p1), removed);

    std::set<std::string> vuln_hashes = hashes_of(p.p1);
    for (const auto& h : hashes_of(p.p2)) vuln_hashes.insert(h);

    // unique unchanged functions not colliding with p1 ∪ p2, seeded sample
    std::set<std::string> seen;
    std::vector<const FunctionRecord*> candidates;
    for (const FunctionRecord* f : unchanged_pool) {
        if (vuln_hashes.count(f->normalized_hash)) continue;
        if (seen.insert(f->normalized_hash).second) candidates.push_back(f);
    }
    Rng rng(Rng::derive(seed, "p3-sample"));
    rng.shuffle(candidates);
    size_t want = p.p1.size() + p.p2.size();
    if (candidates.size() < want) {
        p.p3_short = true;
        want = candidates.size();
    }
    for (size_t i = 0; i < want; ++i) p.p3.push_back({*candidates[i], 0, Part::P3});
    return p;
}

Partition clean_partition(const Partition& in, CleanStats* stats) {
    Partition p = in;
    CleanStats local;
    dedup_within(p.p1, local.within_part_duplicates);
    dedup_within(p.p2, local.within_part_duplicates);
    dedup_within(p.p3, local.within_part_duplicates);
    remove_hashes(p.p2, hashes_of(p.p1), local.cross_part_removals);

    std::set<std::string> banned = hashes_of(p.p1);
    for (const auto& h : hashes_of(p.p2)) banned.insert(h);
    remove_hashes(p.p3, banned, local.cross_part_removals);

    // re-balance: |p3| must not exceed |p1| + |p2|
    size_t want = p.p1.size() + p.p2.size();
    if (p.p3.size() > want) p.p3.resize(want);
    p.p3_short = p.p3.size() < want;

    if (stats) *stats = local;
    return p;
}

}  // namespace cpglab::corpus
