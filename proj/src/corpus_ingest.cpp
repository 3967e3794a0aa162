#include "cpglab/corpus.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cpglab::corpus {

using json = nlohmann::json;

std::string normalized_hash(std::string_view source) {
    auto tokens = minilang::tokenize(source);
    std::string joined;
    for (const auto& t : tokens) {
        joined += t.text;
        joined += ' ';
    }
    return to_hex(fnv1a64(joined));
}

const char* to_string(Part p) {
    switch (p) {
        case Part::P1: return "P1";
        case Part::P2: return "P2";
        case Part::P3: return "P3";
    }
    return "?";
}

namespace {

// Returns nullopt when the function body does not parse.
std::optional<FunctionRecord> make_record(const std::string& id, const std::string& source) {
    try {
        minilang::parse_source(source);
        return FunctionRecord{id, source, normalized_hash(source)};
    } catch (const minilang::SyntaxError&) {
        return std::nullopt;
    }
}

}  // namespace

IngestResult ingest_commits_text(std::string_view jsonl, const std::string& origin) {
    IngestResult result;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    int line_no = 0;
    bool saw_any = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        saw_any = true;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(origin + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
        }
        if (!j.contains("commit_id") || !j.contains("changed") || !j.contains("unchanged"))
            throw DataError(origin + ":" + std::to_string(line_no) +
                            ": malformed record: missing commit_id/changed/unchanged");

        Commit c;
        c.commit_id = j.at("commit_id").get<std::string>();
        bool drop_commit = false;
        int pair_idx = 0;
        for (const auto& jp : j.at("changed")) {
            std::string base = c.commit_id + ":changed[" + std::to_string(pair_idx++) + "]";
            auto before = make_record(base + ".before", jp.at("before").get<std::string>());
            auto after = make_record(base + ".after", jp.at("after").get<std::string>());
            if (!before || !after) {
                ++result.diagnostics.functions_rejected;
                drop_commit = true;
                continue;
            }
            if (before->normalized_hash == after->normalized_hash) {
                // not a real change; the commit no longer has a trustworthy pair count
                drop_commit = true;
                continue;
            }
            c.changed.emplace_back(std::move(*before), std::move(*after));
        }
        int fn_idx = 0;
        for (const auto& js : j.at("unchanged")) {
            std::string id = c.commit_id + ":unchanged[" + std::to_string(fn_idx++) + "]";
            auto rec = make_record(id, js.get<std::string>());
            if (!rec) {
                ++result.diagnostics.functions_rejected;
                continue;
            }
            c.unchanged.push_back(std::move(*rec));
        }
        if (drop_commit || c.changed.empty()) {
            ++result.diagnostics.commits_rejected;
            result.diagnostics.notes.push_back(c.commit_id + ": rejected (invalid or empty changed set)");
            continue;
        }
        ++result.diagnostics.commits_accepted;
        result.commits.push_back(std::move(c));
    }
    if (!saw_any) throw DataError(origin + ": empty corpus");
    return result;
}

IngestResult ingest_commits(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError(path + ": cannot open");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ingest_commits_text(ss.str(), path);
}

}  // namespace cpglab::corpus

namespace cpglab {

std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return s;
}

}  // namespace cpglab
