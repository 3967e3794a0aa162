#include "cpglab/generator.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "cpglab/util.hpp"

namespace cpglab::gen {

using json = nlohmann::ordered_json;

void GeneratorSpec::validate() const {
    if (n_commits < 0) throw std::invalid_argument("GeneratorSpec: n_commits < 0");
    if (strictness_distribution.empty())
        throw std::invalid_argument("GeneratorSpec: empty strictness distribution");
    for (const auto& [k, w] : strictness_distribution) {
        if (k < 1) throw std::invalid_argument("GeneratorSpec: strictness level < 1");
        if (w <= 0) throw std::invalid_argument("GeneratorSpec: non-positive weight");
    }
    if (unchanged_min < 0 || unchanged_max < unchanged_min)
        throw std::invalid_argument("GeneratorSpec: bad unchanged range");
    if (vulnerability_templates.empty() || noise_pair_templates.empty())
        throw std::invalid_argument("GeneratorSpec: template lists must be non-empty");
}

namespace {

const std::vector<std::string> kFnNames = {"get",  "read", "fetch", "load",  "pick",
                                           "scan", "take", "calc",  "check", "step"};
const std::vector<std::string> kArrNames = {"data", "buf", "items", "arr", "vals", "cells"};
const std::vector<std::string> kIdxNames = {"i", "j", "pos", "idx", "cur", "ofs"};
const std::vector<std::string> kSizeNames = {"n", "len", "count", "size", "limit", "cap"};
const std::vector<std::string> kAccNames = {"s", "total", "acc", "sum", "out", "res"};
const std::vector<std::string> kStrNames = {"msg", "text", "input", "body", "line", "raw"};
const std::vector<std::string> kTmpNames = {"a", "b", "c", "t", "u", "v"};
const std::vector<std::string> kLits = {"\"x\"", "\"log\"", "\"tag\"", "\"end\"", "\"sep\"",
                                        "\"hdr\""};

struct NamePicker {
    Rng& rng;
    int counter;

    std::string fn() {
        return kFnNames[rng.index(kFnNames.size())] + "_" + std::to_string(counter);
    }
    std::string pick(const std::vector<std::string>& pool) { return pool[rng.index(pool.size())]; }
    std::string pick_other(const std::vector<std::string>& pool, const std::string& not_this) {
        std::string s = pick(pool);
        return s == not_this ? pick_other(pool, not_this) : s;
    }
    std::string lit() { return std::to_string(rng.range(1, 99)); }
};

// Fraction of fix pairs whose before/after sides differ only in which variable
// a guard or sanitizer touches; telling them apart needs dataflow, not tokens.
constexpr double kHardFixProbability = 0.75;

struct FnPair {
    std::string before;
    std::string after;
};

// ---- vulnerability templates: before is vulnerable, after carries the fix ----

FnPair vuln_array_read(NamePicker& p) {
    std::string name = p.fn(), arr = p.pick(kArrNames), idx = p.pick(kIdxNames),
                n = p.pick(kSizeNames), v = p.pick(kTmpNames);
    if (p.rng.uniform() < kHardFixProbability) {
        // before guards the read with an unrelated variable; the fix retargets
        // the guard to the index actually used
        std::string decoy = p.pick_other(kIdxNames, idx);
        std::string sig = "fn " + name + "(" + arr + ": int[], " + idx + ": int, " + decoy +
                          ": int, " + n + ": int) {\n";
        auto body = [&](const std::string& guard_var) {
            return sig + "  let " + v + " = 0;\n  if (" + guard_var + " < " + n + ") {\n    " + v +
                   " = " + arr + "[" + idx + "];\n  }\n  return " + v + ";\n}\n";
        };
        return {body(decoy), body(idx)};
    }
    std::string sig = "fn " + name + "(" + arr + ": int[], " + idx + ": int, " + n + ": int) {\n";
    std::string before = sig + "  let " + v + " = " + arr + "[" + idx + "];\n  return " + v +
                         ";\n}\n";
    std::string after = sig + "  let " + v + " = 0;\n  if (" + idx + " < " + n + ") {\n    " + v +
                        " = " + arr + "[" + idx + "];\n  }\n  return " + v + ";\n}\n";
    return {before, after};
}

FnPair vuln_sink_sanitize(NamePicker& p) {
    std::string name = p.fn(), s = p.pick(kStrNames), t = p.pick(kTmpNames),
                lit = kLits[p.rng.index(kLits.size())];
    if (p.rng.uniform() < kHardFixProbability) {
        // before sanitizes a bystander string and sinks the raw one; the fix
        // routes the sunk value through the sanitizer instead
        std::string r = p.pick_other(kStrNames, s), u = p.pick_other(kTmpNames, t);
        std::string sig = "fn " + name + "(" + s + ": str, " + r + ": str) {\n";
        std::string head = "  let " + t + " = concat(" + s + ", " + lit + ");\n";
        std::string before = sig + head + "  let " + u + " = sanitize(" + r + ");\n  sink(" + t +
                             ");\n  return 0;\n}\n";
        std::string after = sig + head + "  let " + u + " = sanitize(" + t + ");\n  sink(" + u +
                            ");\n  return 0;\n}\n";
        return {before, after};
    }
    std::string sig = "fn " + name + "(" + s + ": str) {\n";
    std::string head = "  let " + t + " = concat(" + s + ", " + lit + ");\n";
    std::string before = sig + head + "  sink(" + t + ");\n  return 0;\n}\n";
    std::string after =
        sig + head + "  " + t + " = sanitize(" + t + ");\n  sink(" + t + ");\n  return 0;\n}\n";
    return {before, after};
}

FnPair vuln_off_by_one(NamePicker& p) {
    std::string name = p.fn(), arr = p.pick(kArrNames), n = p.pick(kSizeNames),
                acc = p.pick(kAccNames), i = p.pick(kIdxNames);
    if (p.rng.uniform() < kHardFixProbability) {
        // before bounds the loop by the wrong size parameter; the fix swaps in
        // the one that names the array's length
        std::string decoy = p.pick_other(kSizeNames, n);
        std::string sig = "fn " + name + "(" + arr + ": int[], " + n + ": int, " + decoy +
                          ": int) {\n";
        auto body = [&](const std::string& bound) {
            return sig + "  let " + acc + " = 0;\n  let " + i + " = 0;\n  while (" + i + " < " +
                   bound + ") {\n    " + acc + " = " + acc + " + " + arr + "[" + i + "];\n    " +
                   i + " = " + i + " + 1;\n  }\n  return " + acc + ";\n}\n";
        };
        return {body(decoy), body(n)};
    }
    auto body = [&](const std::string& cmp) {
        return "fn " + name + "(" + arr + ": int[], " + n + ": int) {\n  let " + acc +
               " = 0;\n  let " + i + " = 0;\n  while (" + i + " " + cmp + " " + n + ") {\n    " +
               acc + " = " + acc + " + " + arr + "[" + i + "];\n    " + i + " = " + i +
               " + 1;\n  }\n  return " + acc + ";\n}\n";
    };
    return {body("<="), body("<")};
}

// ---- safe templates: structurally distinct from the vulnerable family ----

std::string safe_arith(NamePicker& p) {
    std::string name = p.fn(), a = p.pick(kTmpNames), b = p.pick(kSizeNames),
                c = p.pick(kAccNames), d = p.pick(kIdxNames);
    return "fn " + name + "(" + a + ": int, " + b + ": int) {\n  let " + c + " = " + a + " * " +
           p.lit() + " + " + b + ";\n  let " + d + " = " + c + " - " + p.lit() + ";\n  return " +
           d + ";\n}\n";
}

std::string safe_max(NamePicker& p) {
    std::string name = p.fn(), a = p.pick(kTmpNames), b = p.pick(kSizeNames),
                m = p.pick(kAccNames);
    return "fn " + name + "(" + a + ": int, " + b + ": int) {\n  let " + m + " = " + a +
           ";\n  if (" + b + " > " + a + ") {\n    " + m + " = " + b + ";\n  }\n  return " + m +
           ";\n}\n";
}

std::string safe_tri_sum(NamePicker& p) {
    std::string name = p.fn(), n = p.pick(kSizeNames), i = p.pick(kIdxNames),
                acc = p.pick(kAccNames);
    return "fn " + name + "(" + n + ": int) {\n  let " + i + " = 0;\n  let " + acc +
           " = " + p.lit() + ";\n  while (" + i + " < " + n + ") {\n    " + acc + " = " + acc +
           " + " + i + ";\n    " + i + " = " + i + " + 1;\n  }\n  return " + acc + ";\n}\n";
}

std::string safe_logic(NamePicker& p) {
    std::string name = p.fn(), a = p.pick(kTmpNames), b = p.pick(kSizeNames),
                r = p.pick(kAccNames);
    return "fn " + name + "(" + a + ": int, " + b + ": int) {\n  let " + r + " = 0;\n  if (" + a +
           " > " + p.lit() + " && " + b + " > 0) {\n    " + r + " = 1;\n  }\n  return " + r +
           ";\n}\n";
}

std::string safe_scale(NamePicker& p) {
    std::string name = p.fn(), a = p.pick(kTmpNames), f = p.pick(kIdxNames),
                r = p.pick(kAccNames);
    return "fn " + name + "(" + a + ": int) {\n  let " + f + " = " + p.lit() + ";\n  let " + r +
           " = " + a + " * " + f + " / " + p.lit() + ";\n  return " + r + ";\n}\n";
}

// safe but superficially vulnerable-looking: unguarded reads at fixed offsets
std::string safe_probe(NamePicker& p) {
    std::string name = p.fn(), arr = p.pick(kArrNames), n = p.pick(kSizeNames),
                a = p.pick(kTmpNames), b = p.pick_other(kTmpNames, a);
    return "fn " + name + "(" + arr + ": int[], " + n + ": int) {\n  let " + a + " = " + arr +
           "[0];\n  let " + b + " = " + arr + "[1];\n  return " + a + " + " + b + " * " + n +
           ";\n}\n";
}

// safe but superficially vulnerable-looking: unsanitized concat into a logger
std::string safe_report(NamePicker& p) {
    std::string name = p.fn(), s = p.pick(kStrNames), t = p.pick(kTmpNames),
                lit = kLits[p.rng.index(kLits.size())];
    return "fn " + name + "(" + s + ": str) {\n  let " + t + " = concat(" + s + ", " + lit +
           ");\n  log(" + t + ");\n  return 0;\n}\n";
}

std::string safe_function(NamePicker& p) {
    switch (p.rng.index(7)) {
        case 0: return safe_arith(p);
        case 1: return safe_max(p);
        case 2: return safe_tri_sum(p);
        case 3: return safe_logic(p);
        case 4: return safe_probe(p);
        case 5: return safe_report(p);
        default: return safe_scale(p);
    }
}

// ---- noise pairs: behavior-preserving edits to a safe function ----

FnPair noise_rename(NamePicker& p) {
    std::string name = p.fn();
    std::string a1 = p.pick(kTmpNames), b1 = p.pick(kSizeNames);
    std::string c1 = p.pick(kAccNames), c2 = p.pick(kIdxNames);
    std::string k1 = p.lit(), k2 = p.lit();
    auto body = [&](const std::string& c) {
        return "fn " + name + "(" + a1 + ": int, " + b1 + ": int) {\n  let " + c + " = " + a1 +
               " * " + k1 + " + " + b1 + ";\n  return " + c + " - " + k2 + ";\n}\n";
    };
    if (c2 == c1) c2 += "2";
    return {body(c1), body(c2)};
}

FnPair noise_reorder(NamePicker& p) {
    std::string name = p.fn(), x = p.pick(kTmpNames), y = p.pick(kIdxNames),
                z = p.pick(kAccNames);
    if (y == x) y += "2";
    std::string k1 = p.lit(), k2 = p.lit();
    std::string dx = "  let " + x + " = " + k1 + ";\n";
    std::string dy = "  let " + y + " = " + k2 + ";\n";
    std::string tail = "  let " + z + " = " + x + " + " + y + ";\n  return " + z + ";\n}\n";
    std::string sig = "fn " + name + "() {\n";
    return {sig + dx + dy + tail, sig + dy + dx + tail};
}

FnPair noise_const_refactor(NamePicker& p) {
    std::string name = p.fn(), c = p.pick(kAccNames), a = p.pick(kTmpNames);
    int64_t total = p.rng.range(10, 90);
    int64_t part = p.rng.range(1, total - 1);
    auto body = [&](const std::string& init) {
        return "fn " + name + "(" + a + ": int) {\n  let " + c + " = " + init + ";\n  return " +
               a + " + " + c + ";\n}\n";
    };
    return {body(std::to_string(total)),
            body(std::to_string(part) + " + " + std::to_string(total - part))};
}

}  // namespace

GeneratedCorpus generate_corpus(const GeneratorSpec& spec) {
    spec.validate();
    Rng rng(Rng::derive(spec.seed, "generate"));
    int counter = 0;
    NamePicker picker{rng, 0};

    double total_weight = 0;
    for (const auto& [k, w] : spec.strictness_distribution) total_weight += w;

    auto sample_strictness = [&] {
        double r = rng.uniform() * total_weight;
        double cum = 0;
        for (const auto& [k, w] : spec.strictness_distribution) {
            cum += w;
            if (r < cum) return k;
        }
        return spec.strictness_distribution.rbegin()->first;
    };

    std::string corpus, provenance;
    for (int c = 0; c < spec.n_commits; ++c) {
        int k = sample_strictness();
        json commit;
        commit["commit_id"] = "c" + std::to_string(c);
        commit["changed"] = json::array();
        json prov;
        prov["commit_id"] = commit["commit_id"];
        prov["pairs"] = json::array();

        // exactly one true fix pair, placed at a random slot among k pairs
        size_t fix_slot = rng.index(static_cast<size_t>(k));
        for (int pair = 0; pair < k; ++pair) {
            picker.counter = counter++;
            FnPair fp;
            std::string kind;
            if (static_cast<size_t>(pair) == fix_slot) {
                const std::string& tpl =
                    spec.vulnerability_templates[rng.index(spec.vulnerability_templates.size())];
                kind = "fix:" + tpl;
                if (tpl == "array_read") fp = vuln_array_read(picker);
                else if (tpl == "sink_sanitize") fp = vuln_sink_sanitize(picker);
                else if (tpl == "off_by_one") fp = vuln_off_by_one(picker);
                else throw std::invalid_argument("unknown vulnerability template: " + tpl);
            } else {
                const std::string& tpl =
                    spec.noise_pair_templates[rng.index(spec.noise_pair_templates.size())];
                kind = "noise:" + tpl;
                if (tpl == "rename") fp = noise_rename(picker);
                else if (tpl == "reorder") fp = noise_reorder(picker);
                else if (tpl == "const_refactor") fp = noise_const_refactor(picker);
                else throw std::invalid_argument("unknown noise template: " + tpl);
                // refactorings run in either direction; an undirected pair
                // carries no label signal
                if (rng.index(2)) std::swap(fp.before, fp.after);
            }
            json jp;
            jp["before"] = fp.before;
            jp["after"] = fp.after;
            commit["changed"].push_back(std::move(jp));
            json pp;
            pp["kind"] = kind;
            prov["pairs"].push_back(std::move(pp));
        }

        int n_unchanged =
            static_cast<int>(rng.range(spec.unchanged_min, spec.unchanged_max));
        commit["unchanged"] = json::array();
        for (int u = 0; u < n_unchanged; ++u) {
            picker.counter = counter++;
            commit["unchanged"].push_back(safe_function(picker));
        }

        corpus += commit.dump();
        corpus += '\n';
        provenance += prov.dump();
        provenance += '\n';
    }
    return {corpus, provenance};
}

void write_corpus(const GeneratedCorpus& c, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(path + ": cannot open for writing");
    f << c.jsonl;
    std::ofstream p(path + ".provenance.jsonl", std::ios::binary);
    if (!p) throw std::runtime_error(path + ".provenance.jsonl: cannot open for writing");
    p << c.provenance_jsonl;
}

}  // namespace cpglab::gen
