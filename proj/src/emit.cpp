#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cpglab/harness.hpp"

namespace cpglab::harness {

namespace {

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == '+' || c == '@' || c == '.') c = '_';
    return s;
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << body;
}

// Fixed palette; combos beyond it cycle.
const std::vector<std::string> kPalette = {"#1b6ca8", "#c0392b", "#27ae60",
                                           "#8e44ad", "#d35400", "#16a085",
                                           "#2c3e50"};

}  // namespace

std::string render_sweep_svg(const metrics::EvalReport& report, const std::string& test_combo) {
    auto aggregates = report.median_over_trials();

    // Series: train combo -> sorted (x, median AUC). The x axis is the
    // partition level k, unless every train combo carries an "@fraction"
    // suffix, in which case the fraction is the axis.
    bool fraction_axis = !aggregates.empty();
    for (const auto& [key, agg] : aggregates)
        if (key.test_combo == test_combo && key.train_combo.find('@') == std::string::npos)
            fraction_axis = false;

    std::map<std::string, std::map<double, double>> series;
    for (const auto& [key, agg] : aggregates) {
        if (key.test_combo != test_combo || agg.trials == 0) continue;
        if (fraction_axis) {
            auto at = key.train_combo.find('@');
            double x = std::stod(key.train_combo.substr(at + 1));
            series[key.train_combo.substr(0, at)][x] = agg.median_roc_auc;
        } else {
            series[key.train_combo][static_cast<double>(key.k)] = agg.median_roc_auc;
        }
    }

    double x_min = 1e300, x_max = -1e300;
    for (const auto& [name, pts] : series)
        for (const auto& [x, y] : pts) {
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
        }
    if (series.empty() || x_min == x_max) {
        x_min = 0.0;
        x_max = 1.0;
    }

    const double w = 640, h = 400, ml = 60, mr = 160, mt = 30, mb = 50;
    const double y_min = 0.0, y_max = 1.0;
    auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - y_min) / (y_max - y_min) * (h - mt - mb); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
           "viewBox=\"0 0 640 400\">\n";
    svg += "<rect width=\"640\" height=\"400\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"320\" y=\"18\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"13\">median ROC AUC, test on " + test_combo + "</text>\n";
    // axes
    svg += "<line x1=\"" + fmt("%.2f", ml) + "\" y1=\"" + fmt("%.2f", h - mb) + "\" x2=\"" +
           fmt("%.2f", w - mr) + "\" y2=\"" + fmt("%.2f", h - mb) +
           "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + fmt("%.2f", ml) + "\" y1=\"" + fmt("%.2f", mt) + "\" x2=\"" +
           fmt("%.2f", ml) + "\" y2=\"" + fmt("%.2f", h - mb) +
           "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    for (double y = 0.0; y <= 1.0001; y += 0.25) {
        svg += "<line x1=\"" + fmt("%.2f", ml) + "\" y1=\"" + fmt("%.2f", py(y)) + "\" x2=\"" +
               fmt("%.2f", w - mr) + "\" y2=\"" + fmt("%.2f", py(y)) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt("%.2f", ml - 8) + "\" y=\"" + fmt("%.2f", py(y) + 4) +
               "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">" +
               fmt("%.2f", y) + "</text>\n";
    }
    std::set<double> xticks;
    for (const auto& [name, pts] : series)
        for (const auto& [x, y] : pts) xticks.insert(x);
    if (xticks.empty()) xticks = {x_min, x_max};
    for (double x : xticks) {
        svg += "<text x=\"" + fmt("%.2f", px(x)) + "\" y=\"" + fmt("%.2f", h - mb + 18) +
               "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">" +
               fmt(fraction_axis ? "%.2f" : "%.0f", x) + "</text>\n";
    }
    svg += "<text x=\"" + fmt("%.2f", (ml + w - mr) / 2) + "\" y=\"" + fmt("%.2f", h - 12) +
           "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">" +
           std::string(fraction_axis ? "train fraction of P3" : "partition level k") +
           "</text>\n";

    int idx = 0;
    for (const auto& [name, pts] : series) {
        const std::string& color = kPalette[idx % kPalette.size()];
        std::string poly;
        for (const auto& [x, y] : pts) {
            if (!poly.empty()) poly += " ";
            poly += fmt("%.2f", px(x)) + "," + fmt("%.2f", py(y));
        }
        if (pts.size() > 1)
            svg += "<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"" + color +
                   "\" stroke-width=\"2\"/>\n";
        for (const auto& [x, y] : pts)
            svg += "<circle cx=\"" + fmt("%.2f", px(x)) + "\" cy=\"" + fmt("%.2f", py(y)) +
                   "\" r=\"3\" fill=\"" + color + "\"/>\n";
        double ly = mt + 16 + 18 * idx;
        svg += "<rect x=\"" + fmt("%.2f", w - mr + 10) + "\" y=\"" + fmt("%.2f", ly - 9) +
               "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
        svg += "<text x=\"" + fmt("%.2f", w - mr + 28) + "\" y=\"" + fmt("%.2f", ly + 2) +
               "\" font-family=\"monospace\" font-size=\"11\">" + name + "</text>\n";
        ++idx;
    }
    svg += "</svg>\n";
    return svg;
}

EmittedFiles emit_outputs(const metrics::EvalReport& report, const std::string& rq,
                          const std::string& out_dir) {
    EmittedFiles files;
    auto emit = [&](const std::string& name, const std::string& body) {
        std::string path = out_dir + "/" + name;
        write_file(path, body);
        files.paths.push_back(path);
    };
    emit(rq + "_results.csv", report.to_csv());
    emit(rq + "_medians.csv", report.aggregates_to_csv());

    std::set<std::string> test_combos;
    for (const auto& [key, entry] : report.entries) test_combos.insert(key.test_combo);
    for (const auto& tc : test_combos)
        emit(rq + "_auc_" + sanitize(tc) + ".svg", render_sweep_svg(report, tc));
    return files;
}

}  // namespace cpglab::harness
