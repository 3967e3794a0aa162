#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cpglab::gen {

struct GeneratorSpec {
    int n_commits = 100;
    // k -> weight; each commit of strictness k carries 1 true fix pair and
    // k-1 behavior-preserving noise pairs
    std::map<int, double> strictness_distribution = {
        {1, 0.50}, {2, 0.12}, {3, 0.08}, {4, 0.08},
        {5, 0.06}, {6, 0.06}, {7, 0.05}, {8, 0.05}};
    int unchanged_min = 12;
    int unchanged_max = 16;
    uint64_t seed = 0;
    std::vector<std::string> vulnerability_templates = {"array_read", "sink_sanitize",
                                                       "off_by_one"};
    std::vector<std::string> noise_pair_templates = {"rename", "reorder", "const_refactor"};

    void validate() const;
};

struct GeneratedCorpus {
    std::string jsonl;             // commit corpus, one commit per line
    std::string provenance_jsonl;  // per-commit pair kinds ("fix:..."/"noise:...")
};

GeneratedCorpus generate_corpus(const GeneratorSpec& spec);

void write_corpus(const GeneratedCorpus& c, const std::string& path);

}  // namespace cpglab::gen
