#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpglab/minilang.hpp"
#include "cpglab/util.hpp"

namespace cpglab::corpus {

struct FunctionRecord {
    std::string id;
    std::string source;
    std::string normalized_hash;  // hex digest of whitespace-normalized, comment-free source
};

// Hashes the token stream, so whitespace and comments never matter.
// Throws minilang::SyntaxError when the source does not lex.
std::string normalized_hash(std::string_view source);

struct Commit {
    std::string commit_id;
    std::vector<std::pair<FunctionRecord, FunctionRecord>> changed;  // (before, after)
    std::vector<FunctionRecord> unchanged;

    int strictness() const { return static_cast<int>(changed.size()); }
};

struct IngestDiagnostics {
    int commits_accepted = 0;
    int commits_rejected = 0;
    int functions_rejected = 0;  // unparseable function bodies
    std::vector<std::string> notes;
};

struct IngestResult {
    std::vector<Commit> commits;
    IngestDiagnostics diagnostics;
};

IngestResult ingest_commits(const std::string& path);
IngestResult ingest_commits_text(std::string_view jsonl, const std::string& origin = "<memory>");

enum class Part { P1, P2, P3 };
const char* to_string(Part p);

struct LabeledRecord {
    FunctionRecord record;
    int label = 0;  // 1 vulnerable, 0 clean
    Part part = Part::P1;
};

struct Partition {
    int level_k = 1;
    std::vector<LabeledRecord> p1;
    std::vector<LabeledRecord> p2;
    std::vector<LabeledRecord> p3;
    bool p3_short = false;  // fewer unchanged functions than |p1|+|p2|

    const std::vector<LabeledRecord>& part(Part p) const;
};

struct CleanStats {
    int within_part_duplicates = 0;
    int cross_part_removals = 0;
};

Partition build_partition(const std::vector<Commit>& commits, int level_k, uint64_t seed);
Partition clean_partition(const Partition& p, CleanStats* stats = nullptr);

struct SplitSpec {
    double train_fraction = 0.75;
    double validation_fraction = 0.10;
    double test_fraction = 0.15;
    uint64_t seed = 0;
    bool stratify_by_label = true;
};

enum class Split { Train, Validation, Test };
const char* to_string(Split s);

struct SplitRecord {
    LabeledRecord rec;
    Split split;
};

struct SplitResult {
    std::vector<SplitRecord> records;
    int leakage_removed = 0;  // test records whose hash also appeared in train/validation

    std::vector<LabeledRecord> select(Split s) const;
    std::vector<LabeledRecord> select(Split s, const std::vector<Part>& combo) const;
};

SplitResult split_dataset(const Partition& p, const SplitSpec& spec);

enum class TaskKind { T1, T2, T0 };

// Filters to `combo`, then relabels: T1 keeps pair labels on P1/P2; T2 marks
// everything from P1/P2 positive and P3 negative.
std::vector<LabeledRecord> relabel_for_task(const std::vector<LabeledRecord>& records,
                                            TaskKind task, const std::vector<Part>& combo);

std::string combo_name(const std::vector<Part>& combo);
std::vector<Part> combo_from_name(std::string_view name);  // e.g. "P1+P3"

// Manifest line format: id,part,label,split,normalized_hash
std::string manifest_csv(const SplitResult& r);

}  // namespace cpglab::corpus
