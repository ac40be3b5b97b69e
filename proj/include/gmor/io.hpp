// Text file formats: feature points, correspondences, result/truth
// documents. Parse errors carry file:line diagnostics; writers use 17
// significant digits so round-trips are lossless.
#pragma once

#include "gmor/core_geometry.hpp"
#include "gmor/correspondence.hpp"
#include "gmor/feature_matching.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmor {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline ParseError parse_error(const std::string& path, long line, const std::string& what) {
    return ParseError(path + ":" + std::to_string(line) + ": " + what);
}

// tokenizes a data line into doubles; returns false for blank/comment lines
inline bool line_values(const std::string& line, std::vector<double>& out, const std::string& path,
                        long line_no) {
    out.clear();
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
        if (tok.front() == '#') break;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw parse_error(path, line_no, "expected a number, got '" + tok + "'");
        }
    }
    return !out.empty();
}

}  // namespace detail

/// Feature file: one point per line, "x y z f1 f2 ... fD". D is inferred
/// from the first data line and enforced on the rest.
inline std::vector<FeaturePoint> read_feature_points(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::vector<FeaturePoint> out;
    std::string line;
    std::vector<double> vals;
    long line_no = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::line_values(line, vals, path, line_no)) continue;
        if (vals.size() < 4)
            throw detail::parse_error(path, line_no, "need x y z plus at least one feature value");
        if (dim == 0) dim = vals.size() - 3;
        if (vals.size() - 3 != dim)
            throw detail::parse_error(path, line_no,
                                      "feature dimension " + std::to_string(vals.size() - 3) +
                                          " differs from first line's " + std::to_string(dim));
        FeaturePoint fp;
        fp.position = {vals[0], vals[1], vals[2]};
        fp.feature.assign(vals.begin() + 3, vals.end());
        double n2 = 0.0;
        for (double v : fp.feature) n2 += v * v;
        if (!(n2 > 0.0)) throw detail::parse_error(path, line_no, "zero-norm feature vector");
        out.push_back(std::move(fp));
    }
    if (out.empty()) throw ParseError(path + ": no feature points found");
    return out;
}

/// Correspondence file: "px py pz qx qy qz w" per line, weight optional.
inline std::vector<WeightedCorrespondence> read_correspondences(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::vector<WeightedCorrespondence> out;
    std::string line;
    std::vector<double> vals;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::line_values(line, vals, path, line_no)) continue;
        if (vals.size() != 6 && vals.size() != 7)
            throw detail::parse_error(path, line_no, "expected 6 or 7 values per correspondence");
        const double w = vals.size() == 7 ? vals[6] : 1.0;
        if (!(w > 0.0)) throw detail::parse_error(path, line_no, "weight must be > 0");
        out.push_back(make_correspondence({vals[0], vals[1], vals[2]},
                                          {vals[3], vals[4], vals[5]}, w));
    }
    if (out.empty()) throw ParseError(path + ": no correspondences found");
    return out;
}

inline void write_correspondences(const std::string& path,
                                  const std::vector<WeightedCorrespondence>& corr) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    out << "# px py pz qx qy qz w\n";
    for (const auto& c : corr) {
        out << detail::format_real(c.p.x) << ' ' << detail::format_real(c.p.y) << ' '
            << detail::format_real(c.p.z) << ' ' << detail::format_real(c.q.x) << ' '
            << detail::format_real(c.q.y) << ' ' << detail::format_real(c.q.z) << ' '
            << detail::format_real(c.weight) << '\n';
    }
}

/// Key-value result/truth document. Truth documents carry only the
/// transform; registration results fill in the rest.
struct ResultDocument {
    Rot3 rotation;
    Vec3 translation;
    std::optional<double> consensus_weight;
    std::optional<long> inlier_count;
    std::optional<int> translation_only;
    std::optional<std::array<double, 3>> timings_ms;      // stage1, stage2, refine
    std::optional<std::array<long, 2>> branches_expanded;  // stage1, stage2

    RigidTransform transform() const { return {rotation, translation}; }
};

inline void write_result_document(std::ostream& out, const ResultDocument& doc) {
    out << "rotation";
    for (double v : doc.rotation.m) out << ' ' << detail::format_real(v);
    out << "\ntranslation " << detail::format_real(doc.translation.x) << ' '
        << detail::format_real(doc.translation.y) << ' ' << detail::format_real(doc.translation.z)
        << '\n';
    if (doc.consensus_weight)
        out << "consensus_weight " << detail::format_real(*doc.consensus_weight) << '\n';
    if (doc.inlier_count) out << "inlier_count " << *doc.inlier_count << '\n';
    if (doc.translation_only) out << "translation_only " << *doc.translation_only << '\n';
    if (doc.timings_ms) {
        out << "timings_ms";
        for (double v : *doc.timings_ms) out << ' ' << detail::format_real(v);
        out << '\n';
    }
    if (doc.branches_expanded) {
        out << "branches_expanded";
        for (long v : *doc.branches_expanded) out << ' ' << v;
        out << '\n';
    }
}

inline void write_result_document(const std::string& path, const ResultDocument& doc) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    write_result_document(out, doc);
}

inline ResultDocument read_result_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    ResultDocument doc;
    bool saw_rotation = false, saw_translation = false;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string key;
        if (!(ss >> key) || key.front() == '#') continue;
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        auto need = [&](std::size_t n) {
            if (vals.size() != n)
                throw detail::parse_error(path, line_no,
                                          key + " expects " + std::to_string(n) + " values");
        };
        if (key == "rotation") {
            need(9);
            for (int i = 0; i < 9; ++i) doc.rotation.m[static_cast<std::size_t>(i)] = vals[static_cast<std::size_t>(i)];
            saw_rotation = true;
        } else if (key == "translation") {
            need(3);
            doc.translation = {vals[0], vals[1], vals[2]};
            saw_translation = true;
        } else if (key == "consensus_weight") {
            need(1);
            doc.consensus_weight = vals[0];
        } else if (key == "inlier_count") {
            need(1);
            doc.inlier_count = static_cast<long>(vals[0]);
        } else if (key == "translation_only") {
            need(1);
            doc.translation_only = static_cast<int>(vals[0]);
        } else if (key == "timings_ms") {
            need(3);
            doc.timings_ms = {vals[0], vals[1], vals[2]};
        } else if (key == "branches_expanded") {
            need(2);
            doc.branches_expanded = {static_cast<long>(vals[0]), static_cast<long>(vals[1])};
        } else {
            throw detail::parse_error(path, line_no, "unknown key '" + key + "'");
        }
    }
    if (!saw_rotation || !saw_translation)
        throw ParseError(path + ": document is missing rotation or translation");
    return doc;
}

}  // namespace gmor
